from pathlib import Path
from typing import Optional

import typer

from trescashape.cli.impl.common import console, exit_on_error, load_run_config, out_dir, print_header, print_stats_completed
from trescashape.cli.impl.progress_bar import ProgressBarOptimizationHook
from trescashape.contact.switching import solve_tresca
from trescashape.exceptions import DeformationStallException
from trescashape.io.tables import write_history_csv, write_run_info
from trescashape.io.vtk import contact_point_fields, write_boundary_vtk, write_vtk
from trescashape.optimizer.uzawa import run_optimization
from trescashape.utils.timer import Timer


def optimize(
    config: Optional[Path] = typer.Option(None, "--config", "-c", help="Run configuration file (key = value)"),
    out: Optional[Path] = typer.Option(None, "--out", "-o", help="Output directory"),
    seed: Optional[int] = typer.Option(None, "--seed", help="Seed for sampled checks"),
    h: Optional[float] = typer.Option(None, "--h", help="Override the target mesh edge length"),
    max_iters: Optional[int] = typer.Option(None, "--max-iters", help="Override the iteration cap"),
    progress: bool = typer.Option(True, help="Show a progress bar"),
):
    """Minimize the energy under the volume constraint with Uzawa updates of the multiplier."""
    print_header()
    with exit_on_error("optimize"), Timer("optimize command") as t:
        cfg = load_run_config(config, out=out, seed=seed, h=h, max_iters=max_iters)
        cfg.check_threshold()
        problem = cfg.problem_data()
        optim = cfg.optim_config()
        mesh0 = cfg.build_mesh()
        target = out_dir(cfg)
        snapshot_dir = target / "snapshots" if optim.snapshot_every else None
        hook = ProgressBarOptimizationHook(snapshot_dir=snapshot_dir, h=cfg.h, show=progress)

        try:
            mesh, history = run_optimization(mesh0, problem, optim, hook=hook)
        except DeformationStallException as e:
            if e.history is not None:
                write_history_csv(target / "history.csv", e.history)
            raise
        write_history_csv(target / "history.csv", history)

        u, state = solve_tresca(mesh, problem)
        write_vtk(mesh0, None, target / "initial.vtk", title="trescashape initial mesh", h=cfg.h)
        write_vtk(mesh, contact_point_fields(mesh, problem, u, state), target / "final.vtk", title="trescashape optimized", h=cfg.h)
        write_boundary_vtk(mesh, target / "final_boundary.vtk", h=cfg.h)
        first, last = history[0], history[-1]
        write_run_info(
            target / "run_info.json",
            "optimize",
            cfg.to_summary_dict(),
            mesh0,
            h=cfg.h,
            iterations=len(history),
            J_initial=first.J,
            J_final=last.J,
            volume_final=last.volume,
            multiplier_final=last.multiplier,
        )

        console.print(f"[white]Iterations:[/white] [bright_black]{len(history)}[/bright_black]")
        console.print(f"[white]Energy:[/white] [bright_black]{first.J:.10g} → {last.J:.10g}[/bright_black]")
        console.print(f"[white]Volume:[/white] [bright_black]{first.volume:.10g} → {last.volume:.10g} (target {optim.target_volume:.10g})[/bright_black]")
    print_stats_completed("Optimization", t.elapsed, target)
