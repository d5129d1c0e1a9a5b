from dataclasses import dataclass

import numpy as np

from trescashape.exceptions import BadConfigException, DataEvaluationException
from trescashape.fem.sources import ScalarSource, VectorSource, evaluate_scalar
from trescashape.fem.system import SOLVER_METHODS
from trescashape.mesh.mesh import Mesh


@dataclass(frozen=True)
class ProblemData:
    f: VectorSource
    g: ScalarSource
    mu: float
    lam: float
    linear_tol: float = 1e-10
    switching_tol: float = 1e-8
    eps_slip: float = 1e-6
    max_switch_iters: int = 200
    linear_method: str = "direct"

    def __post_init__(self):
        if not self.mu > 0:
            raise BadConfigException(f"mu must be positive, got {self.mu}")
        if not self.lam >= 0:
            raise BadConfigException(f"lambda must be non-negative, got {self.lam}")
        if not self.eps_slip > 0:
            raise BadConfigException(f"eps_slip must be positive, got {self.eps_slip}")
        if not (self.linear_tol > 0 and self.switching_tol > 0):
            raise BadConfigException("solver tolerances must be positive")
        if self.max_switch_iters < 1:
            raise BadConfigException("max_switch_iters must be at least 1")
        if self.linear_method not in SOLVER_METHODS:
            raise BadConfigException(f"linear_method must be one of {SOLVER_METHODS}, got {self.linear_method!r}")

    def threshold(self, mesh: Mesh) -> np.ndarray:
        """g at the Tresca nodes; raises DataEvaluationException unless strictly positive."""
        g = evaluate_scalar(self.g, mesh.vertices[mesh.tresca_nodes])
        if np.any(g <= 0):
            bad = int(mesh.tresca_nodes[np.argmin(g)])
            raise DataEvaluationException(f"friction threshold g must be positive, got {g.min():.6g} at node {bad}")
        return g

    def to_summary_dict(self):
        return {
            "mu": self.mu,
            "lambda": self.lam,
            "linear_tol": self.linear_tol,
            "switching_tol": self.switching_tol,
            "eps_slip": self.eps_slip,
            "max_switch_iters": self.max_switch_iters,
            "linear_method": self.linear_method,
        }
