import uuid
from dataclasses import dataclass, field
from enum import IntEnum
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from typing import TYPE_CHECKING, NamedTuple

from trescashape.exceptions import DeformationException, MeshException
from trescashape.utils import logger

if TYPE_CHECKING:
    from trescashape.fem.fields import VectorField
    from trescashape.mesh.frame import BoundaryFrame


class BoundaryTag(IntEnum):
    DIRICHLET = 0
    TRESCA = 1


class MeshQuality(NamedTuple):
    min_angle: float
    max_aspect_ratio: float


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def signed_areas(vertices: np.ndarray, triangles: np.ndarray) -> np.ndarray:
    p0, p1, p2 = vertices[triangles[:, 0]], vertices[triangles[:, 1]], vertices[triangles[:, 2]]
    d1, d2 = p1 - p0, p2 - p0
    return 0.5 * (d1[:, 0] * d2[:, 1] - d1[:, 1] * d2[:, 0])


@dataclass(frozen=True, eq=False)
class Mesh:
    """Conforming P1 triangulation with one counterclockwise boundary loop.

    boundary_edges[k] = (b_k, b_{k+1}) and edge_tags[k] is its BoundaryTag. A boundary node is DIRICHLET as soon as
    one of its two edges is DIRICHLET, so Γ_D/Γ_T junction nodes carry the Dirichlet condition.
    """

    vertices: np.ndarray
    triangles: np.ndarray
    boundary_edges: np.ndarray
    edge_tags: np.ndarray
    token: str = field(default_factory=lambda: uuid.uuid4().hex)

    @classmethod
    def from_arrays(cls, vertices, triangles, boundary_edges, edge_tags, validate: bool = True) -> "Mesh":
        vertices = _readonly(np.array(vertices, dtype=float).reshape(-1, 2))
        triangles = _readonly(np.array(triangles, dtype=np.int64).reshape(-1, 3))
        boundary_edges = _readonly(np.array(boundary_edges, dtype=np.int64).reshape(-1, 2))
        edge_tags = _readonly(np.array([int(BoundaryTag(t)) for t in edge_tags], dtype=np.int64))
        mesh = cls(vertices, triangles, boundary_edges, edge_tags)
        if validate:
            mesh.validate()
        return mesh

    def validate(self, require_contact_split: bool = False):
        nv = len(self.vertices)
        if len(self.triangles) == 0:
            raise MeshException("mesh has no triangles")
        if self.triangles.min() < 0 or self.triangles.max() >= nv:
            raise MeshException("triangle references a vertex out of range")
        if not np.all(np.isfinite(self.vertices)):
            raise MeshException("vertex coordinates must be finite")
        areas = signed_areas(self.vertices, self.triangles)
        if np.any(areas <= 0):
            bad = int(np.argmin(areas))
            raise MeshException(f"triangle {bad} has non-positive signed area {areas[bad]:.3e}")
        if len(self.edge_tags) != len(self.boundary_edges):
            raise MeshException("every boundary edge needs exactly one tag")

        # one closed simple loop
        edges = self.boundary_edges
        if len(edges) < 3 or np.any(edges[:, 1] != np.roll(edges[:, 0], -1)):
            raise MeshException("boundary edges must form one closed loop ordered head to tail")
        if len(np.unique(edges[:, 0])) != len(edges):
            raise MeshException("boundary loop visits a vertex twice")

        # each boundary edge lies on exactly one triangle, with the triangle to its left
        directed = {}
        for t, tri in enumerate(self.triangles):
            for k in range(3):
                directed[(int(tri[k]), int(tri[(k + 1) % 3]))] = t
        for i, j in edges:
            if (int(i), int(j)) not in directed or (int(j), int(i)) in directed:
                raise MeshException(f"boundary edge ({i}, {j}) must belong to exactly one triangle, traversed counterclockwise")

        if require_contact_split:
            if len(self.dirichlet_nodes) == 0:
                raise MeshException("mesh has an empty Dirichlet node set")
            if len(self.tresca_nodes) == 0:
                raise MeshException("mesh has an empty Tresca node set")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    @property
    def boundary_nodes(self) -> np.ndarray:
        """Boundary vertices in counterclockwise loop order."""
        return self.boundary_edges[:, 0]

    @cached_property
    def boundary_node_tags(self) -> np.ndarray:
        prev_tags = np.roll(self.edge_tags, 1)
        both_tresca = (prev_tags == BoundaryTag.TRESCA) & (self.edge_tags == BoundaryTag.TRESCA)
        return _readonly(np.where(both_tresca, int(BoundaryTag.TRESCA), int(BoundaryTag.DIRICHLET)).astype(np.int64))

    @cached_property
    def tresca_positions(self) -> np.ndarray:
        """Positions in the boundary loop of the Tresca nodes."""
        return _readonly(np.flatnonzero(self.boundary_node_tags == BoundaryTag.TRESCA))

    @cached_property
    def tresca_nodes(self) -> np.ndarray:
        return _readonly(self.boundary_nodes[self.tresca_positions].copy())

    @cached_property
    def dirichlet_nodes(self) -> np.ndarray:
        return _readonly(self.boundary_nodes[self.boundary_node_tags == BoundaryTag.DIRICHLET].copy())

    @cached_property
    def dirichlet_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.dirichlet_nodes] = True
        return _readonly(mask)

    @cached_property
    def boundary_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_vertices, dtype=bool)
        mask[self.boundary_nodes] = True
        return _readonly(mask)

    @cached_property
    def triangle_areas(self) -> np.ndarray:
        return _readonly(signed_areas(self.vertices, self.triangles))

    @cached_property
    def basis_gradients(self) -> np.ndarray:
        """(nt, 3, 2) constant gradients of the three P1 hat functions of each triangle."""
        v = self.vertices[self.triangles]
        x, y = v[:, :, 0], v[:, :, 1]
        area2 = 2.0 * self.triangle_areas
        grads = np.empty((self.n_triangles, 3, 2))
        grads[:, 0, 0], grads[:, 0, 1] = y[:, 1] - y[:, 2], x[:, 2] - x[:, 1]
        grads[:, 1, 0], grads[:, 1, 1] = y[:, 2] - y[:, 0], x[:, 0] - x[:, 2]
        grads[:, 2, 0], grads[:, 2, 1] = y[:, 0] - y[:, 1], x[:, 1] - x[:, 0]
        return _readonly(grads / area2[:, None, None])

    @cached_property
    def edge_lengths(self) -> np.ndarray:
        """Length of boundary edge k."""
        d = self.vertices[self.boundary_edges[:, 1]] - self.vertices[self.boundary_edges[:, 0]]
        return _readonly(np.hypot(d[:, 0], d[:, 1]))

    @cached_property
    def diameter(self) -> float:
        lo, hi = self.vertices.min(axis=0), self.vertices.max(axis=0)
        return float(np.hypot(*(hi - lo)))

    @cached_property
    def h_mean(self) -> float:
        return float(np.mean(self.edge_lengths))

    @cached_property
    def frame(self) -> "BoundaryFrame":
        from trescashape.mesh.frame import compute_boundary_frame

        return compute_boundary_frame(self)

    def with_vertices(self, vertices: np.ndarray) -> "Mesh":
        """Same connectivity and tags, new coordinates and a new identity token."""
        return Mesh(_readonly(np.array(vertices, dtype=float)), self.triangles, self.boundary_edges, self.edge_tags)


def area(mesh: Mesh) -> float:
    return float(np.sum(mesh.triangle_areas))


def deform(mesh: Mesh, theta: "VectorField", t: float) -> Mesh:
    """Move every vertex to x + t·θ(x); raises DeformationException if a triangle inverts."""
    theta.check_mesh(mesh)
    values = theta.values
    if len(mesh.dirichlet_nodes) and np.any(values[mesh.dirichlet_nodes] != 0.0):
        raise MeshException("deformation field must vanish on Dirichlet nodes")
    if t == 0:
        return mesh.with_vertices(mesh.vertices.copy())

    moved = mesh.vertices + t * values
    areas = signed_areas(moved, mesh.triangles)
    if np.all(areas > 0):
        return mesh.with_vertices(moved)

    bad = int(np.flatnonzero(areas <= 0)[0])
    lo, hi = 0.0, float(t)
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if np.all(signed_areas(mesh.vertices + mid * values, mesh.triangles) > 0):
            lo = mid
        else:
            hi = mid
    logger.fs.debug(f"[deform] triangle {bad} inverts at t={t:.6g}, largest admissible t={lo:.6g}")
    raise DeformationException(f"deformation by t={t:.6g} inverts triangle {bad}", triangle_index=bad, max_step=lo)


def triangle_angles(mesh: Mesh) -> np.ndarray:
    """(nt, 3) interior angles in radians."""
    v = mesh.vertices[mesh.triangles]
    angles = np.empty((mesh.n_triangles, 3))
    for k in range(3):
        a = v[:, (k + 1) % 3] - v[:, k]
        b = v[:, (k + 2) % 3] - v[:, k]
        cross = np.abs(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0])
        dot = np.einsum("ij,ij->i", a, b)
        angles[:, k] = np.arctan2(cross, dot)
    return angles


def mesh_quality(mesh: Mesh) -> MeshQuality:
    """Smallest interior angle and largest circumradius-to-twice-inradius ratio (1 for equilateral)."""
    v = mesh.vertices[mesh.triangles]
    lengths = np.stack([np.linalg.norm(v[:, (k + 1) % 3] - v[:, k], axis=1) for k in range(3)], axis=1)
    a2 = np.abs(mesh.triangle_areas)
    semi = 0.5 * lengths.sum(axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.prod(lengths, axis=1) * semi / (8.0 * a2**2)
    ratio = np.where(a2 > 0, ratio, np.inf)
    return MeshQuality(min_angle=float(triangle_angles(mesh).min()), max_aspect_ratio=float(ratio.max()))


def relax_interior(mesh: Mesh, blends=(1.0, 0.5, 0.25)) -> Mesh:
    """Move interior vertices toward the harmonic (neighbor-average) placement for the current boundary.

    The first blend factor whose result raises the minimum angle wins; the mesh is returned unchanged otherwise.
    Boundary vertices never move.
    """
    tri = mesh.triangles
    i = np.concatenate([tri[:, 0], tri[:, 1], tri[:, 2]])
    j = np.concatenate([tri[:, 1], tri[:, 2], tri[:, 0]])
    rows, cols = np.concatenate([i, j]), np.concatenate([j, i])
    adjacency = sp.coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(mesh.n_vertices, mesh.n_vertices)).tocsr()
    adjacency.data[:] = 1.0
    laplacian = (sp.diags(np.asarray(adjacency.sum(axis=1)).ravel()) - adjacency).tocsc()

    interior = np.flatnonzero(~mesh.boundary_mask)
    boundary = mesh.boundary_nodes
    if len(interior) == 0:
        return mesh
    rhs = adjacency[interior][:, boundary] @ mesh.vertices[boundary]
    block = laplacian[interior][:, interior]
    harmonic = np.column_stack([np.atleast_1d(spla.spsolve(block, rhs[:, k])) for k in range(2)])

    current = mesh_quality(mesh).min_angle
    for blend in blends:
        moved = mesh.vertices.copy()
        moved[interior] += blend * (harmonic - moved[interior])
        if not np.all(signed_areas(moved, tri) > 0):
            continue
        candidate = mesh.with_vertices(moved)
        angle = mesh_quality(candidate).min_angle
        if angle > current:
            logger.fs.debug(f"[relax_interior] blend {blend}: min angle {np.degrees(current):.3f}° -> {np.degrees(angle):.3f}°")
            return candidate
    return mesh
