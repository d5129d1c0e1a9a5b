"""Brute-force proximal-gradient minimization of the discrete Tresca energy, for cross-checking the switching solver."""
import numpy as np
import scipy.sparse as sp
from typing import List, Optional

from trescashape.contact.energy import friction_weights
from trescashape.contact.problem import ProblemData
from trescashape.contact.switching import DiscreteProblem
from trescashape.fem.fields import VectorField
from trescashape.mesh.mesh import Mesh
from trescashape.utils import logger

# step 1/L with L above the power-iteration estimate, which approaches λ_max from below
LIPSCHITZ_SAFETY = 1.1


def estimate_lipschitz(K, n_iter: int = 100, seed: int = 0) -> float:
    """LIPSCHITZ_SAFETY × the largest eigenvalue of the SPD matrix K estimated by power iteration."""
    n = K.shape[0]
    if n == 0:
        return 1.0
    x = np.random.default_rng(seed).standard_normal(n)
    lam = 0.0
    for _ in range(n_iter):
        y = K @ x
        norm = np.linalg.norm(y)
        if norm == 0.0:
            return 1.0
        lam = float(x @ y / (x @ x))
        x = y / norm
    return LIPSCHITZ_SAFETY * lam


def oracle_projected_gradient(
    mesh: Mesh, problem: ProblemData, max_iter: int = 200000, tol: float = 1e-12, energy_trace: Optional[List[float]] = None
) -> VectorField:
    """ISTA on ½uᵀKu + Σ g w |u·τ| − Fᵀu over the non-Dirichlet dofs; stops when L‖Δu‖ ≤ tol‖F‖."""
    dp = DiscreteProblem.assemble(mesh, problem)
    free = np.flatnonzero(np.repeat(~mesh.dirichlet_mask, 2))
    K = sp.csr_matrix(dp.stiffness)[free][:, free].toarray()
    F = dp.load[free]
    u = np.zeros(len(free))
    fnorm = float(np.linalg.norm(F))
    if fnorm == 0.0:
        return VectorField.zeros(mesh)

    # Tresca nodes in the reduced numbering
    index = np.full(2 * mesh.n_vertices, -1)
    index[free] = np.arange(len(free))
    tx, ty = index[2 * mesh.tresca_nodes], index[2 * mesh.tresca_nodes + 1]
    tau = mesh.frame.tangents[mesh.tresca_positions]
    gw = friction_weights(mesh, problem)

    L = estimate_lipschitz(K)
    threshold = gw / L

    def full_energy(x):
        x_tau = x[tx] * tau[:, 0] + x[ty] * tau[:, 1]
        return float(0.5 * x @ (K @ x) + np.sum(gw * np.abs(x_tau)) - F @ x)

    for it in range(max_iter):
        x = u - (K @ u - F) / L
        x_tau = x[tx] * tau[:, 0] + x[ty] * tau[:, 1]
        shrunk = np.sign(x_tau) * np.maximum(np.abs(x_tau) - threshold, 0.0)
        x[tx] += (shrunk - x_tau) * tau[:, 0]
        x[ty] += (shrunk - x_tau) * tau[:, 1]
        step = float(np.linalg.norm(x - u))
        u = x
        if energy_trace is not None:
            energy_trace.append(full_energy(u))
        if L * step <= tol * fnorm:
            logger.fs.debug(f"[oracle_projected_gradient] converged after {it + 1} iterations")
            break
    else:
        logger.fs.warning(f"[oracle_projected_gradient] stopped at the iteration cap {max_iter}")

    values = np.zeros(2 * mesh.n_vertices)
    values[free] = u
    return VectorField.on(mesh, values)
