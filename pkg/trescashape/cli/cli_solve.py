from pathlib import Path
from typing import Optional

import numpy as np
import typer

from trescashape.cli.impl.common import console, exit_on_error, load_run_config, out_dir, print_header, print_stats_completed
from trescashape.contact.energy import energy
from trescashape.contact.state import ContactMode
from trescashape.contact.switching import solve_tresca
from trescashape.io.tables import write_contact_csv, write_run_info
from trescashape.io.vtk import contact_point_fields, write_boundary_vtk, write_vtk
from trescashape.utils import logger
from trescashape.utils.timer import Timer


def solve(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Run configuration file (key = value)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for sampled checks"),
    h: Optional[float] = typer.Option(None, "--h", help="Override the target mesh edge length"),
):
    """Solve the Tresca friction problem once on the initial ellipse."""
    print_header()
    with exit_on_error("solve"), Timer("solve command") as t:
        cfg = load_run_config(config, out=out, seed=seed, h=h)
        cfg.check_threshold()
        problem = cfg.problem_data()
        mesh = cfg.build_mesh()
        console.print(f"[bright_black]Mesh: {mesh.n_vertices} nodes, {mesh.n_triangles} triangles (h = {cfg.h:g})[/bright_black]")

        u, state = solve_tresca(mesh, problem)
        J = energy(mesh, problem, u)
        counts = {mode.name: int(np.sum(state.modes == mode)) for mode in ContactMode}
        logger.fs.info(f"[solve] J = {J!r}, switch_iters = {state.switch_iters}, modes = {counts}")

        target = out_dir(cfg)
        write_vtk(mesh, contact_point_fields(mesh, problem, u, state), target / "solution.vtk", title="trescashape solve", h=cfg.h)
        write_boundary_vtk(mesh, target / "boundary.vtk", h=cfg.h)
        write_contact_csv(target / "contact.csv", mesh, state)
        write_run_info(
            target / "run_info.json",
            "solve",
            cfg.to_summary_dict(),
            mesh,
            h=cfg.h,
            energy=J,
            switch_iters=state.switch_iters,
            modes=counts,
        )

        console.print(f"[white]Energy 𝓘(u):[/white] [bright_black]{J:.10g}[/bright_black]")
        console.print(f"[white]Switching iterations:[/white] [bright_black]{state.switch_iters}[/bright_black]")
        console.print("[white]Tresca nodes:[/white] [bright_black]" + ", ".join(f"{k} {v}" for k, v in counts.items()) + "[/bright_black]")
    print_stats_completed("Solve", t.elapsed, target)
