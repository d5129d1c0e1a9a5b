from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from trescashape.contact.state import ContactMode, ContactState
from trescashape.fem.calculus import boundary_field_calculus, lame_stress, nodal_gradients, recovered_gradient_operator
from trescashape.fem.fields import VectorField
from trescashape.fem.sources import ScalarSource, evaluate_scalar, fd_step, scalar_gradient
from trescashape.mesh.mesh import Mesh


def contract_gradient_rows(mesh: Mesh, nodes: np.ndarray, weights: np.ndarray) -> sp.csr_matrix:
    """(len(nodes), 2nv): θ ↦ Σ_ab weights[k, a, b] ∇θ(node_k)[a, b] with the recovered gradient."""
    G = recovered_gradient_operator(mesh)
    out = sp.csr_matrix((len(nodes), 2 * mesh.n_vertices))
    for a in range(2):
        for b in range(2):
            out = out + sp.diags(weights[:, a, b]) @ G[4 * nodes + 2 * a + b]
    return out.tocsr()


def p_theta_operator(mesh: Mesh, g: ScalarSource) -> sp.csr_matrix:
    """(n_tresca, 2nv): θ ↦ p(θ) = ∇g·θ + g(div_τθ − ∇θτ·τ) at the Tresca nodes."""
    frame = mesh.frame
    pos, nodes = mesh.tresca_positions, mesh.tresca_nodes
    n, tau = frame.normals[pos], frame.tangents[pos]
    x = mesh.vertices[nodes]
    grad_g = scalar_gradient(g, x, fd_step(mesh.diameter))
    g_val = evaluate_scalar(g, x)

    # div_τθ − ∇θτ·τ = tr∇θ − ∇θn·n − ∇θτ·τ
    weights = np.eye(2)[None, :, :] - np.einsum("ia,ib->iab", n, n) - np.einsum("ia,ib->iab", tau, tau)
    tangential = sp.diags(g_val) @ contract_gradient_rows(mesh, nodes, weights)

    k = np.arange(len(nodes))
    pointwise = sp.csr_matrix(
        (np.concatenate([grad_g[:, 0], grad_g[:, 1]]), (np.concatenate([k, k]), np.concatenate([2 * nodes, 2 * nodes + 1]))),
        shape=(len(nodes), 2 * mesh.n_vertices),
    )
    return (pointwise + tangential).tocsr()


def p_theta(mesh: Mesh, g: ScalarSource, theta: VectorField) -> np.ndarray:
    c = boundary_field_calculus(mesh, theta, g)
    return c.grad_g_theta + c.g * (c.div_tau - c.grad_theta_tau_tau)


def xi_m(mesh: Mesh, u0: VectorField, theta: VectorField, mu: float, lam: float) -> np.ndarray:
    """(n_tresca, 2): ((Ae(u))∇θᵀ + A(∇u∇θ) + (∇θ − divθ I)Ae(u)) n at the Tresca nodes."""
    nodes = mesh.tresca_nodes
    n = mesh.frame.normals[mesh.tresca_positions]
    Gu = nodal_gradients(mesh, u0)[nodes]
    Gt = nodal_gradients(mesh, theta)[nodes]
    sigma = lame_stress(Gu, mu, lam)
    div = Gt[:, 0, 0] + Gt[:, 1, 1]
    M = (
        sigma @ np.swapaxes(Gt, 1, 2)
        + lame_stress(Gu @ Gt, mu, lam)
        + (Gt - div[:, None, None] * np.eye(2)) @ sigma
    )
    return np.einsum("iab,ib->ia", M, n)


@dataclass(frozen=True, eq=False)
class DerivativeData:
    """Data of the material-derivative problem at the Tresca nodes (mesh.tresca_nodes order).

    offsets[k] = (∇θᵀu)·τ; slip_direction is u_τ/|u_τ| τ on SLIP nodes and multiplier_direction (s_τ/g) τ on
    STICK_BOUNDARY nodes, zero elsewhere. The Neumann data ξ^m(θ) enters the discrete problem in weak form, see
    material.neumann_rate.
    """

    nodes: np.ndarray
    p: np.ndarray
    offsets: np.ndarray
    slip_direction: np.ndarray
    multiplier_direction: np.ndarray

    def friction_rate(self, weights: np.ndarray) -> np.ndarray:
        """(n_tresca, 2): w p(θ) (multiplier_direction − slip_direction), the rate of the friction load."""
        return (weights * self.p)[:, None] * (self.multiplier_direction - self.slip_direction)


def derivative_data(mesh: Mesh, problem, u0: VectorField, state: ContactState, theta: VectorField) -> DerivativeData:
    pos, nodes = mesh.tresca_positions, mesh.tresca_nodes
    tau = mesh.frame.tangents[pos]
    Gt = nodal_gradients(mesh, theta)[nodes]
    offsets = np.einsum("iab,ia,ib->i", Gt, u0.values[nodes], tau)

    slip = state.modes == ContactMode.SLIP
    boundary = state.modes == ContactMode.STICK_BOUNDARY
    slip_direction = np.where(slip[:, None], state.slip_signs[:, None] * tau, 0.0)
    multiplier_direction = np.where(boundary[:, None], (state.s_tau / state.g)[:, None] * tau, 0.0)
    return DerivativeData(
        nodes=nodes.copy(),
        p=p_theta(mesh, problem.g, theta),
        offsets=offsets,
        slip_direction=slip_direction,
        multiplier_direction=multiplier_direction,
    )
