"""Linear operators on nodal fields (gradients, traces) and the pointwise boundary calculus built from them.

Gradient layout: a (4·rows, 2nv) operator maps interleaved nodal dofs to 2x2 gradients stored row-major, entry
4r + 2a + b holding ∂v_a/∂x_b.

At boundary nodes the recovered gradient G is the area-weighted average A of the adjacent element gradients with its
action on the tangent replaced by the exact polyline rate ρ (see mesh.frame.frame_rate_operator):
G = A + (ρ − Aτ)τᵀ, so Gτ = ρ and Gn = An.
"""
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp

from trescashape.fem.fields import VectorField
from trescashape.fem.sources import ScalarSource, evaluate_scalar, fd_step, scalar_gradient
from trescashape.mesh.frame import frame_rate_operator, tangential_transport_operator
from trescashape.mesh.mesh import Mesh


def element_gradient_operator(mesh: Mesh) -> sp.csr_matrix:
    """(4nt, 2nv): nodal dofs to the constant P1 gradient of each triangle."""
    nt = mesh.n_triangles
    grads = mesh.basis_gradients
    rows, cols, data = [], [], []
    t_idx = np.arange(nt)
    for a in range(2):
        for b in range(2):
            for k in range(3):
                rows.append(4 * t_idx + 2 * a + b)
                cols.append(2 * mesh.triangles[:, k] + a)
                data.append(grads[:, k, b])
    return sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(4 * nt, 2 * mesh.n_vertices))


def _nodal_average_operator(mesh: Mesh) -> sp.csr_matrix:
    """(4nv, 4nt): area-weighted average of element gradients over the triangles around each node."""
    nt, nv = mesh.n_triangles, mesh.n_vertices
    nodes = mesh.triangles.ravel()
    tris = np.repeat(np.arange(nt), 3)
    weights = np.repeat(mesh.triangle_areas, 3)
    patch_area = np.bincount(nodes, weights=weights, minlength=nv)
    w = weights / patch_area[nodes]
    rows = (4 * nodes[:, None] + np.arange(4)[None, :]).ravel()
    cols = (4 * tris[:, None] + np.arange(4)[None, :]).ravel()
    return sp.csr_matrix((np.repeat(w, 4), (rows, cols)), shape=(4 * nv, 4 * nt))


def nodal_gradient_operator(mesh: Mesh, boundary_corrected: bool = True) -> sp.csr_matrix:
    """(4nv, 2nv) recovered nodal gradient; see module docstring for the boundary correction."""
    averaged = (_nodal_average_operator(mesh) @ element_gradient_operator(mesh)).tocsr()
    if not boundary_corrected:
        return averaged

    frame = mesh.frame
    nodes = frame.nodes
    nb, nv = len(nodes), mesh.n_vertices
    tau = frame.tangents

    # lift[4i+2a+b, 2k+a] = τ_b : writes ρ_a τ_b into G
    rows, cols, data = [], [], []
    for a in range(2):
        for b in range(2):
            rows.append(4 * nodes + 2 * a + b)
            cols.append(2 * np.arange(nb) + a)
            data.append(tau[:, b])
    lift = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(4 * nv, 2 * nb))

    # project[4i+2a+b, 4i+2a+c] = τ_b τ_c : the part of A acting along τ
    rows, cols, data = [], [], []
    for a in range(2):
        for b in range(2):
            for c in range(2):
                rows.append(4 * nodes + 2 * a + b)
                cols.append(4 * nodes + 2 * a + c)
                data.append(tau[:, b] * tau[:, c])
    project = sp.csr_matrix((np.concatenate(data), (np.concatenate(rows), np.concatenate(cols))), shape=(4 * nv, 4 * nv))

    return (averaged + lift @ frame_rate_operator(mesh) - project @ averaged).tocsr()


@lru_cache(maxsize=8)
def recovered_gradient_operator(mesh: Mesh) -> sp.csr_matrix:
    """Boundary-corrected nodal_gradient_operator, cached per mesh."""
    return nodal_gradient_operator(mesh, boundary_corrected=True)


def nodal_gradients(mesh: Mesh, field: VectorField, boundary_corrected: bool = True) -> np.ndarray:
    """(nv, 2, 2) recovered gradients, [i, a, b] = ∂v_a/∂x_b at node i."""
    field.check_mesh(mesh)
    op = recovered_gradient_operator(mesh) if boundary_corrected else nodal_gradient_operator(mesh, boundary_corrected=False)
    return (op @ field.flat).reshape(-1, 2, 2)


def element_gradients(mesh: Mesh, field: VectorField) -> np.ndarray:
    """(nt, 2, 2) exact P1 gradients per triangle."""
    field.check_mesh(mesh)
    return np.einsum("tka,tkb->tab", field.values[mesh.triangles], mesh.basis_gradients)


def lame_stress(strain_or_gradient: np.ndarray, mu: float, lam: float) -> np.ndarray:
    """A(M) = 2μ sym(M) + λ tr(M) I for a stack of 2x2 matrices."""
    M = strain_or_gradient
    sym = 0.5 * (M + np.swapaxes(M, -1, -2))
    trace = M[..., 0, 0] + M[..., 1, 1]
    return 2.0 * mu * sym + lam * trace[..., None, None] * np.eye(2)


@dataclass(frozen=True, eq=False)
class BoundaryCalculus:
    """Pointwise boundary quantities of a direction θ at the Tresca nodes (mesh.tresca_nodes order)."""

    nodes: np.ndarray
    div_tau: np.ndarray
    grad_theta_tau_tau: np.ndarray
    grad_theta_tau_n: np.ndarray
    tangential_theta_tau_n: np.ndarray
    theta_n: np.ndarray
    grad_g_theta: np.ndarray
    dn_g: np.ndarray
    g: np.ndarray


def tresca_rows(mesh: Mesh, op: sp.csr_matrix) -> sp.csr_matrix:
    """Restrict a per-boundary-node operator (rows in loop order) to the Tresca nodes."""
    return op[mesh.tresca_positions]


def boundary_field_calculus(mesh: Mesh, theta: VectorField, g: ScalarSource) -> BoundaryCalculus:
    theta.check_mesh(mesh)
    frame = mesh.frame
    pos = mesh.tresca_positions
    nodes = mesh.tresca_nodes
    flat = theta.flat

    G = nodal_gradients(mesh, theta)[nodes]
    tau, n = frame.tangents[pos], frame.normals[pos]
    G_tau = np.einsum("iab,ib->ia", G, tau)
    G_n = np.einsum("iab,ib->ia", G, n)
    div = G[:, 0, 0] + G[:, 1, 1]

    x = mesh.vertices[nodes]
    grad_g = scalar_gradient(g, x, fd_step(mesh.diameter))
    return BoundaryCalculus(
        nodes=nodes,
        div_tau=div - np.einsum("ia,ia->i", G_n, n),
        grad_theta_tau_tau=np.einsum("ia,ia->i", G_tau, tau),
        grad_theta_tau_n=np.einsum("ia,ia->i", G_tau, n),
        tangential_theta_tau_n=tresca_rows(mesh, tangential_transport_operator(mesh)) @ flat,
        theta_n=np.einsum("ia,ia->i", theta.values[nodes], n),
        grad_g_theta=np.einsum("ia,ia->i", grad_g, theta.values[nodes]),
        dn_g=np.einsum("ia,ia->i", grad_g, n),
        g=evaluate_scalar(g, x),
    )


__all__ = [
    "BoundaryCalculus",
    "boundary_field_calculus",
    "element_gradient_operator",
    "element_gradients",
    "lame_stress",
    "nodal_gradient_operator",
    "nodal_gradients",
    "recovered_gradient_operator",
    "tresca_rows",
]
