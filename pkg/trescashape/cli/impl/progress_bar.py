from pathlib import Path
from typing import Optional

from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn

from trescashape.fem.fields import VectorField
from trescashape.io.vtk import write_vtk
from trescashape.mesh.mesh import Mesh
from trescashape.optimizer.hooks import OptimizationHook
from trescashape.optimizer.uzawa import IterationRecord, OptimHistory
from trescashape.utils import logger


class ProgressBarOptimizationHook(OptimizationHook):
    """Progress bar over optimizer iterations; snapshots are written as VTK into snapshot_dir."""

    def __init__(self, snapshot_dir: Optional[Path] = None, h: Optional[float] = None, show: bool = True):
        self.snapshot_dir = snapshot_dir
        self.h = h
        self.pbar = Progress(
            SpinnerColumn(),
            TextColumn("Optimizing{task.description}"),
            BarColumn(),
            MofNCompleteColumn(),
            TimeElapsedColumn(),
            transient=True,
            disable=not show,
        )
        self.task = None
        self.snapshots = []

    def on_start(self, mesh: Mesh, max_iters: int):
        self.task = self.pbar.add_task("", total=max_iters)
        self.pbar.start()

    def on_iteration(self, record: IterationRecord):
        self.pbar.update(
            self.task,
            advance=1,
            description=f" J={record.J:.6g} |Ω|={record.volume:.6g} ℓ={record.multiplier:.4g}",
        )

    def on_snapshot(self, iteration: int, mesh: Mesh, u: VectorField):
        if self.snapshot_dir is None:
            return
        path = write_vtk(mesh, {"displacement": u}, self.snapshot_dir / f"iter_{iteration:04d}.vtk", title=f"iteration {iteration}", h=self.h)
        self.snapshots.append(path)
        logger.fs.debug(f"[ProgressBarOptimizationHook] wrote {path}")

    def on_finish(self, history: OptimHistory):
        self.pbar.stop()
