from pathlib import Path
from typing import List, Optional

import numpy as np
import pandas as pd
import typer
from rich.table import Table

from trescashape.cli.impl.common import console, exit_on_error, load_run_config, out_dir, print_stats_completed
from trescashape.contact.oracle import oracle_projected_gradient
from trescashape.contact.problem import ProblemData
from trescashape.contact.switching import DiscreteProblem, solve_tresca
from trescashape.exceptions import EXIT_NONCONVERGENCE, BadConfigException
from trescashape.fem.sources import constant_scalar, constant_vector
from trescashape.io.tables import curvature_table, write_curvature_csv, write_grad_check_csv, write_json, write_report_json, write_run_info
from trescashape.io.vtk import write_boundary_vtk
from trescashape.mesh.generators import generate_rectangle_mesh
from trescashape.shape.fd_check import fd_gradient_check, random_direction
from trescashape.shape.gradient import shape_gradient_report
from trescashape.utils import logger
from trescashape.utils.timer import Timer

ORACLE_TOLERANCE = 1e-6


def _parse_t_list(text: str) -> List[float]:
    try:
        t_list = [float(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise BadConfigException(f"--t must be a comma-separated list of step sizes, got {text!r}")
    if not t_list or any(not t > 0 for t in t_list):
        raise BadConfigException(f"step sizes must be positive, got {text!r}")
    return t_list


def grad_check(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Run configuration file (key = value)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed of the first random direction"),
    h: Optional[float] = typer.Option(None, "--h", help="Override the target mesh edge length"),
    directions: int = typer.Option(1, "--directions", "-n", help="Number of seeded random directions"),
    t: str = typer.Option("1e-2,1e-3", "--t", help="Comma-separated finite-difference step sizes"),
):
    """Compare finite-difference quotients of the energy with both shape-gradient forms."""
    with exit_on_error("grad-check"), Timer("grad-check command") as timer:
        cfg = load_run_config(config, out=out, seed=seed, h=h)
        t_list = _parse_t_list(t)
        if directions < 1:
            raise BadConfigException("--directions must be at least 1")
        cfg.check_threshold()
        problem = cfg.problem_data()
        mesh = cfg.build_mesh()
        u0, state = solve_tresca(mesh, problem)
        target = out_dir(cfg)

        tables = []
        for k in range(directions):
            theta = random_direction(mesh, cfg.seed + k)
            tables.append(fd_gradient_check(mesh, problem, theta, t_list, u0=u0, state=state))
            if k == 0:
                write_report_json(target / "gradient_report.json", shape_gradient_report(mesh, problem, u0, state, theta))
        table = pd.concat(tables, ignore_index=True)
        write_grad_check_csv(target / "grad_check.csv", table)
        write_run_info(target / "run_info.json", "grad-check", cfg.to_summary_dict(), mesh, h=cfg.h, directions=directions, t=t_list)

        summary = Table(title="Shape gradient check")
        for column in ("direction", "t", "FD quotient", "volume form", "boundary form", "rel. err. volume", "rel. err. boundary"):
            summary.add_column(column, justify="right")
        for i, row in table.iterrows():
            summary.add_row(
                str(i // len(t_list)),
                f"{row.t:.1e}",
                f"{row.fd_quotient:.8g}",
                f"{row.value_volume:.8g}",
                f"{row.value_boundary:.8g}",
                f"{row.rel_error_volume:.2e}",
                f"{row.rel_error_boundary:.2e}",
            )
        console.print(summary)
    print_stats_completed("Gradient check", timer.elapsed, target)


def curvature_check(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Run configuration file (key = value)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    h: Optional[float] = typer.Option(None, "--h", help="Override the target mesh edge length"),
):
    """Compare the discrete boundary curvature of the ellipse mesh with the exact curvature."""
    with exit_on_error("curvature-check"), Timer("curvature-check command") as timer:
        cfg = load_run_config(config, out=out, h=h)
        mesh = cfg.build_mesh()
        table = curvature_table(mesh, cfg.a, cfg.b)
        target = out_dir(cfg)
        write_curvature_csv(target / "curvature.csv", table)
        write_boundary_vtk(mesh, target / "boundary.vtk", h=cfg.h)
        write_run_info(target / "run_info.json", "curvature-check", cfg.to_summary_dict(), mesh, h=cfg.h)

        vertex = table.iloc[int(np.argmax(table.x.to_numpy()))]
        console.print(f"[white]Boundary nodes:[/white] [bright_black]{len(table)}[/bright_black]")
        console.print(f"[white]Max relative error:[/white] [bright_black]{table.rel_error.max():.3e}[/bright_black]")
        console.print(
            f"[white]At ({vertex.x:.4g}, {vertex.y:.4g}):[/white] [bright_black]H = {vertex.H:.8g}, exact {vertex.H_exact:.8g}[/bright_black]"
        )
    print_stats_completed("Curvature check", timer.elapsed, target)


def oracle_check(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Run configuration file; only mu, lambda and solver settings are used"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    n: int = typer.Option(5, "--cells", help="Cells per side of the unit-square mesh"),
):
    """Compare the switching solver with projected-gradient iterations on a coarse unit square."""
    with exit_on_error("oracle-check"), Timer("oracle-check command") as timer:
        cfg = load_run_config(config, out=out)
        if not 1 <= n <= 6:
            raise BadConfigException("--cells must lie in [1, 6] so the oracle mesh stays coarse")
        mesh = generate_rectangle_mesh(1.0, 1.0, n, n, dirichlet_sides=("left",))
        problem = ProblemData(
            f=constant_vector(0.0, -1.0),
            g=constant_scalar(0.3),
            mu=cfg.mu,
            lam=cfg.lam,
            linear_tol=cfg.linear_tol,
            switching_tol=cfg.switching_tol,
            max_switch_iters=cfg.max_switch_iters,
            linear_method=cfg.linear_method,
        )
        with Timer() as t_switch:
            u_switch, state = solve_tresca(mesh, problem)
        with Timer() as t_oracle:
            u_oracle = oracle_projected_gradient(mesh, problem)
        diff = (u_switch - u_oracle).flat
        K = DiscreteProblem.assemble(mesh, problem).stiffness
        energy_norm = float(np.sqrt(max(diff @ (K @ diff), 0.0)))
        logger.fs.info(f"[oracle_check] energy-norm difference {energy_norm!r}")
        target = out_dir(cfg)
        write_json(
            target / "oracle_check.json",
            {
                "n_vertices": mesh.n_vertices,
                "energy_norm_difference": energy_norm,
                "switch_iters": state.switch_iters,
                "runtime_switching_s": t_switch.elapsed,
                "runtime_oracle_s": t_oracle.elapsed,
            },
        )

        console.print(f"[white]Mesh:[/white] [bright_black]{mesh.n_vertices} nodes[/bright_black]")
        console.print(f"[white]Energy-norm difference:[/white] [bright_black]{energy_norm:.3e}[/bright_black]")
        console.print(
            f"[white]Runtime:[/white] [bright_black]switching {t_switch.elapsed:.3f}s, projected gradient {t_oracle.elapsed:.3f}s[/bright_black]"
        )
        if not energy_norm <= ORACLE_TOLERANCE:
            typer.secho(f"oracle mismatch: energy-norm difference {energy_norm:.3e} > {ORACLE_TOLERANCE:g}", fg="red", err=True)
            raise typer.Exit(EXIT_NONCONVERGENCE)
    print_stats_completed("Oracle check", timer.elapsed, target)
