from trescashape.contact.energy import energy, friction_functional, vi_residual
from trescashape.contact.oracle import oracle_projected_gradient
from trescashape.contact.problem import ProblemData
from trescashape.contact.state import BoundaryPartition, ContactMode, ContactState, classify_boundary
from trescashape.contact.switching import DiscreteProblem, solve_dirichlet_neumann, solve_pure_stick, solve_tresca

__all__ = [
    "BoundaryPartition",
    "ContactMode",
    "ContactState",
    "DiscreteProblem",
    "ProblemData",
    "classify_boundary",
    "energy",
    "friction_functional",
    "oracle_projected_gradient",
    "solve_dirichlet_neumann",
    "solve_pure_stick",
    "solve_tresca",
    "vi_residual",
]
