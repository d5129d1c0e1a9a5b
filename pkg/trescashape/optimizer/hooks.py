from abc import ABC

from typing import TYPE_CHECKING

from trescashape.fem.fields import VectorField
from trescashape.mesh.mesh import Mesh

if TYPE_CHECKING:
    from trescashape.optimizer.uzawa import IterationRecord, OptimHistory


class OptimizationHook(ABC):
    """Hook that follows the optimization loop"""

    def on_start(self, mesh: Mesh, max_iters: int):
        """Before the first Tresca solve"""
        raise NotImplementedError()

    def on_iteration(self, record: "IterationRecord"):
        """After an iterate is solved and recorded"""
        raise NotImplementedError()

    def on_snapshot(self, iteration: int, mesh: Mesh, u: VectorField):
        """Every snapshot_every iterations, with the solved iterate"""
        raise NotImplementedError()

    def on_finish(self, history: "OptimHistory"):
        """After the loop stopped, normally or not"""
        raise NotImplementedError()


class EmptyOptimizationHook(OptimizationHook):
    """Empty optimization hook that does nothing"""

    def on_start(self, mesh: Mesh, max_iters: int):
        return

    def on_iteration(self, record: "IterationRecord"):
        return

    def on_snapshot(self, iteration: int, mesh: Mesh, u: VectorField):
        return

    def on_finish(self, history: "OptimHistory"):
        return
