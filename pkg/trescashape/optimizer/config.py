import math
from dataclasses import dataclass

from typing import Optional

from trescashape.exceptions import BadConfigException
from trescashape.shape.descent import MESH_MOTIONS

GRADIENT_FORMS = ("volume", "boundary")


@dataclass(frozen=True)
class OptimConfig:
    target_volume: float = math.pi
    rho: float = 1.0
    ell0: float = 0.0
    step0: Optional[float] = None  # None: 0.1 × mean boundary edge length
    shrink: float = 0.5
    max_iters: int = 200
    window: int = 20
    delta_j: float = 1e-4
    min_angle_deg: float = 5.0
    max_shrinks: int = 20
    gradient_form: str = "volume"
    penalty: float = 0.0
    mesh_motion: str = "elasticity"
    relax_angle_deg: float = 20.0  # relax interior vertices below this min angle; 0 disables
    snapshot_every: int = 0

    def __post_init__(self):
        if not self.target_volume > 0:
            raise BadConfigException(f"target volume must be positive, got {self.target_volume}")
        if not self.rho >= 0:
            raise BadConfigException(f"Uzawa rate rho must be non-negative, got {self.rho}")
        if self.step0 is not None and not self.step0 > 0:
            raise BadConfigException(f"initial step must be positive, got {self.step0}")
        if not 0 < self.shrink < 1:
            raise BadConfigException(f"step shrink factor must lie in (0, 1), got {self.shrink}")
        if self.max_iters < 1 or self.window < 1 or self.max_shrinks < 0:
            raise BadConfigException("max_iters and window must be at least 1, max_shrinks non-negative")
        if not self.delta_j > 0:
            raise BadConfigException(f"stopping tolerance delta_j must be positive, got {self.delta_j}")
        if not 0 <= self.min_angle_deg < 60:
            raise BadConfigException(f"min angle floor must lie in [0, 60) degrees, got {self.min_angle_deg}")
        if self.gradient_form not in GRADIENT_FORMS:
            raise BadConfigException(f"gradient_form must be one of {GRADIENT_FORMS}, got {self.gradient_form!r}")
        if self.mesh_motion not in MESH_MOTIONS:
            raise BadConfigException(f"mesh_motion must be one of {MESH_MOTIONS}, got {self.mesh_motion!r}")
        if not 0 <= self.relax_angle_deg < 60:
            raise BadConfigException(f"relax angle must lie in [0, 60) degrees, got {self.relax_angle_deg}")
        if not self.penalty >= 0 or self.snapshot_every < 0:
            raise BadConfigException("penalty and snapshot_every must be non-negative")

    @property
    def min_angle(self) -> float:
        return math.radians(self.min_angle_deg)

    @property
    def relax_angle(self) -> float:
        return math.radians(self.relax_angle_deg)

    def to_summary_dict(self):
        return {
            "target_volume": self.target_volume,
            "rho": self.rho,
            "ell0": self.ell0,
            "step0": self.step0,
            "shrink": self.shrink,
            "max_iters": self.max_iters,
            "window": self.window,
            "delta_j": self.delta_j,
            "min_angle_deg": self.min_angle_deg,
            "max_shrinks": self.max_shrinks,
            "gradient_form": self.gradient_form,
            "penalty": self.penalty,
            "mesh_motion": self.mesh_motion,
            "relax_angle_deg": self.relax_angle_deg,
            "snapshot_every": self.snapshot_every,
        }
