import numpy as np

from trescashape.contact.problem import ProblemData
from trescashape.contact.switching import DiscreteProblem
from trescashape.fem.fields import VectorField
from trescashape.mesh.mesh import Mesh


def friction_weights(mesh: Mesh, problem: ProblemData) -> np.ndarray:
    """g·w at each Tresca node."""
    return problem.threshold(mesh) * mesh.frame.weights[mesh.tresca_positions]


def friction_functional(mesh: Mesh, problem: ProblemData, u: VectorField) -> float:
    """φ_h(u) = Σ_Tresca g |u·τ| w."""
    u.check_mesh(mesh)
    tau = mesh.frame.tangents[mesh.tresca_positions]
    u_tau = np.einsum("ia,ia->i", u.values[mesh.tresca_nodes], tau)
    return float(np.sum(friction_weights(mesh, problem) * np.abs(u_tau)))


def energy(mesh: Mesh, problem: ProblemData, u: VectorField, discrete: DiscreteProblem = None) -> float:
    """ℐ(u) = ½ a(u, u) + φ_h(u) − ⟨F, u⟩."""
    dp = discrete if discrete is not None else DiscreteProblem.assemble(mesh, problem)
    x = u.flat
    return float(0.5 * x @ (dp.stiffness @ x) + friction_functional(mesh, problem, u) - dp.load @ x)


def vi_residual(mesh: Mesh, problem: ProblemData, u: VectorField, n_samples: int = 20, seed: int = 0) -> float:
    """Smallest slack a(u, v−u) + φ_h(v) − φ_h(u) − ⟨F, v−u⟩ over the test fields.

    Test fields: v = 0, v = 2u, the residual step v = u − R/L (R = K u − F on the non-Dirichlet dofs, L ≥ ‖K‖) and
    n_samples seeded perturbations v = u + δ with δ = 0 on Γ_D. A solution of the discrete problem has slack ≥ 0.
    """
    from trescashape.contact.oracle import estimate_lipschitz

    u.check_mesh(mesh)
    dp = DiscreteProblem.assemble(mesh, problem)
    K, F = dp.stiffness, dp.load
    x = u.flat
    free = np.repeat(~mesh.dirichlet_mask, 2)
    residual = K @ x - F
    phi_u = friction_functional(mesh, problem, u)

    def slack(v: np.ndarray) -> float:
        d = v - x
        return float(residual @ d + friction_functional(mesh, problem, VectorField.on(mesh, v)) - phi_u)

    fields = [np.zeros_like(x), 2.0 * x]
    R = np.where(free, residual, 0.0)
    fields.append(x - R / estimate_lipschitz(K[free][:, free], seed=seed))

    rng = np.random.default_rng(seed)
    amplitude = max(float(np.max(np.abs(x))), 1.0) if len(x) else 1.0
    for _ in range(n_samples):
        delta = np.where(free, rng.standard_normal(len(x)), 0.0) * amplitude
        fields.append(x + delta)
    return min(slack(v) for v in fields)
