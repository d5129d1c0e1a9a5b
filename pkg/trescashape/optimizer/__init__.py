from trescashape.optimizer.config import OptimConfig
from trescashape.optimizer.hooks import EmptyOptimizationHook, OptimizationHook
from trescashape.optimizer.uzawa import (
    IterationRecord,
    OptimHistory,
    run_optimization,
    stopping_check,
    volume_constraint_gradient,
)

__all__ = [
    "EmptyOptimizationHook",
    "IterationRecord",
    "OptimConfig",
    "OptimHistory",
    "OptimizationHook",
    "run_optimization",
    "stopping_check",
    "volume_constraint_gradient",
]
