"""Discrete boundary-curve geometry: normals, tangents, arc weights, curvature and their rates under vertex motion."""
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from trescashape.mesh.mesh import Mesh


@dataclass(frozen=True, eq=False)
class BoundaryFrame:
    """Per boundary node, in loop order (row k belongs to vertex mesh.boundary_nodes[k])."""

    nodes: np.ndarray
    normals: np.ndarray
    tangents: np.ndarray
    weights: np.ndarray
    curvature: np.ndarray
    prev_lengths: np.ndarray
    next_lengths: np.ndarray

    @property
    def perimeter(self) -> float:
        return float(np.sum(self.weights))


def _rot_cw(v: np.ndarray) -> np.ndarray:
    """Rotate by -π/2: the outward normal of a counterclockwise edge direction."""
    return np.stack([v[..., 1], -v[..., 0]], axis=-1)


def _edge_geometry(mesh: Mesh):
    x = mesh.vertices[mesh.boundary_nodes]
    e_next = np.roll(x, -1, axis=0) - x
    e_prev = np.roll(e_next, 1, axis=0)
    l_next = np.hypot(e_next[:, 0], e_next[:, 1])
    l_prev = np.roll(l_next, 1)
    return x, e_prev, e_next, l_prev, l_next


def compute_boundary_frame(mesh: Mesh) -> BoundaryFrame:
    _, e_prev, e_next, l_prev, l_next = _edge_geometry(mesh)
    u_prev = e_prev / l_prev[:, None]
    u_next = e_next / l_next[:, None]

    n = _rot_cw(u_prev) + _rot_cw(u_next)
    n /= np.linalg.norm(n, axis=1)[:, None]
    tau = np.stack([-n[:, 1], n[:, 0]], axis=1)

    weights = 0.5 * (l_prev + l_next)
    cross = u_prev[:, 0] * u_next[:, 1] - u_prev[:, 1] * u_next[:, 0]
    dot = np.einsum("ij,ij->i", u_prev, u_next)
    turning = np.arctan2(cross, dot)
    return BoundaryFrame(
        nodes=mesh.boundary_nodes.copy(),
        normals=n,
        tangents=tau,
        weights=weights,
        curvature=turning / weights,
        prev_lengths=l_prev,
        next_lengths=l_next,
    )


def boundary_frame(mesh: Mesh) -> BoundaryFrame:
    return mesh.frame


def mean_curvature(mesh: Mesh) -> np.ndarray:
    """Turning angle at each boundary node over its arc weight; positive on convex boundaries."""
    return mesh.frame.curvature


def _loop_neighbors(mesh: Mesh):
    nodes = mesh.boundary_nodes
    return np.roll(nodes, 1), nodes, np.roll(nodes, -1)


def _scatter_rows(n_rows: int, n_vertices: int, rows, nodes, coeffs) -> sp.csr_matrix:
    """Rows r get coeffs[:, 0] at dof 2*node and coeffs[:, 1] at dof 2*node+1."""
    rows = np.concatenate([np.asarray(r) for r in rows])
    nodes = np.concatenate([np.asarray(v) for v in nodes])
    coeffs = np.concatenate([np.asarray(c) for c in coeffs])
    data = np.concatenate([coeffs[:, 0], coeffs[:, 1]])
    cols = np.concatenate([2 * nodes, 2 * nodes + 1])
    return sp.csr_matrix((data, (np.concatenate([rows, rows]), cols)), shape=(n_rows, 2 * n_vertices))


def stretch_rate_operator(mesh: Mesh) -> sp.csr_matrix:
    """(nb, 2nv): θ ↦ relative rate of each node's arc weight, the discrete tangential divergence of θ."""
    _, e_prev, e_next, l_prev, l_next = _edge_geometry(mesh)
    prev, node, nxt = _loop_neighbors(mesh)
    u_prev, u_next = e_prev / l_prev[:, None], e_next / l_next[:, None]
    scale = (1.0 / (l_prev + l_next))[:, None]
    rows = np.arange(len(node))
    return _scatter_rows(
        len(node), mesh.n_vertices, [rows, rows, rows], [prev, node, nxt], [-u_prev * scale, (u_prev - u_next) * scale, u_next * scale]
    )


def rotation_rate_operator(mesh: Mesh) -> sp.csr_matrix:
    """(nb, 2nv): θ ↦ rate of rotation of each node's unit tangent towards its normal."""
    _, e_prev, e_next, l_prev, l_next = _edge_geometry(mesh)
    prev, node, nxt = _loop_neighbors(mesh)
    frame = mesh.frame
    n = frame.normals
    u_prev, u_next = e_prev / l_prev[:, None], e_next / l_next[:, None]
    bisector = np.linalg.norm(u_prev + u_next, axis=1)
    c_prev = (n - np.einsum("ij,ij->i", u_prev, n)[:, None] * u_prev) / (l_prev * bisector)[:, None]
    c_next = (n - np.einsum("ij,ij->i", u_next, n)[:, None] * u_next) / (l_next * bisector)[:, None]
    rows = np.arange(len(node))
    return _scatter_rows(len(node), mesh.n_vertices, [rows, rows, rows], [prev, node, nxt], [-c_prev, c_prev - c_next, c_next])


def frame_rate_operator(mesh: Mesh) -> sp.csr_matrix:
    """(2nb, 2nv): θ ↦ d/dt of the scaled tangent, stretch·τ + rotation·n, i.e. the action of ∇θ on τ along the polyline."""
    frame = mesh.frame
    stretch = stretch_rate_operator(mesh)
    rotation = rotation_rate_operator(mesh)
    nb = len(frame.nodes)
    blocks = []
    for a in range(2):
        blocks.append(sp.diags(frame.tangents[:, a]) @ stretch + sp.diags(frame.normals[:, a]) @ rotation)
    # interleave rows: row 2k + a
    stacked = sp.vstack(blocks).tocsr()
    order = np.empty(2 * nb, dtype=np.int64)
    order[0::2] = np.arange(nb)
    order[1::2] = nb + np.arange(nb)
    return stacked[order]


def tangential_transport_operator(mesh: Mesh) -> sp.csr_matrix:
    """(nb, 2nv): θ ↦ ∇_τ(θ_τ)·n, the centered arc-length difference of (θ·τ)τ dotted with the node normal."""
    frame = mesh.frame
    prev, node, nxt = _loop_neighbors(mesh)
    tau, n = frame.tangents, frame.normals
    tau_prev, tau_next = np.roll(tau, 1, axis=0), np.roll(tau, -1, axis=0)
    scale = 1.0 / (frame.prev_lengths + frame.next_lengths)
    c_next = (np.einsum("ij,ij->i", tau_next, n) * scale)[:, None] * tau_next
    c_prev = -(np.einsum("ij,ij->i", tau_prev, n) * scale)[:, None] * tau_prev
    rows = np.arange(len(node))
    return _scatter_rows(len(node), mesh.n_vertices, [rows, rows], [prev, nxt], [c_prev, c_next])


def normal_component_operator(mesh: Mesh) -> sp.csr_matrix:
    """(nb, 2nv): θ ↦ θ·n at each boundary node."""
    frame = mesh.frame
    rows = np.arange(len(frame.nodes))
    return _scatter_rows(len(rows), mesh.n_vertices, [rows], [frame.nodes], [frame.normals])
