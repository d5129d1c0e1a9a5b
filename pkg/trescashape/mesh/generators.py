import math

import numpy as np
from scipy.integrate import cumulative_trapezoid
from scipy.spatial import Delaunay
from typing import List, Sequence, Tuple

from trescashape.exceptions import BadConfigException, MeshException
from trescashape.mesh.mesh import BoundaryTag, Mesh, signed_areas
from trescashape.utils import logger

TWO_PI = 2.0 * math.pi
_ARC_TOL = 1e-12

Arc = Tuple[float, float]

RECTANGLE_SIDES = ("bottom", "right", "top", "left")


def _in_arcs(gamma: np.ndarray, arcs: Sequence[Arc]) -> np.ndarray:
    inside = np.zeros(gamma.shape, dtype=bool)
    for lo, hi in arcs:
        for shift in (-TWO_PI, 0.0, TWO_PI):
            g = gamma + shift
            inside |= (g >= lo - _ARC_TOL) & (g <= hi + _ARC_TOL)
    return inside


def _validate_arcs(arcs: Sequence[Arc]) -> List[Arc]:
    out = []
    for arc in arcs:
        if len(arc) != 2:
            raise BadConfigException(f"Dirichlet arc {arc} must be a pair (start, end)")
        lo, hi = float(arc[0]), float(arc[1])
        if not (math.isfinite(lo) and math.isfinite(hi)) or hi <= lo:
            raise BadConfigException(f"Dirichlet arc [{lo}, {hi}] must have start < end")
        if lo < -_ARC_TOL or hi - lo > TWO_PI + _ARC_TOL or hi > 2 * TWO_PI:
            raise BadConfigException(f"Dirichlet arc [{lo}, {hi}] must be a subinterval of one turn starting in [0, 2π]")
        out.append((lo, hi))
    return out


def _ellipse_boundary_parameters(a: float, b: float, h: float, arcs: Sequence[Arc]) -> np.ndarray:
    """Parameters γ of the boundary nodes: γ = 0 and every arc endpoint, then uniform arc length in between."""
    fine = np.linspace(0.0, TWO_PI, 20001)
    speed = np.hypot(a * np.sin(fine), b * np.cos(fine))
    arclength = cumulative_trapezoid(speed, fine, initial=0.0)

    breaks = {0.0}
    for lo, hi in arcs:
        for end in (lo, hi):
            end = end % TWO_PI
            if abs(end - TWO_PI) < _ARC_TOL:
                end = 0.0
            breaks.add(end)
    breakpoints = sorted(breaks)
    # merge breakpoints closer than the tolerance
    merged = [breakpoints[0]]
    for p in breakpoints[1:]:
        if p - merged[-1] > 1e-9:
            merged.append(p)
    merged.append(TWO_PI)

    params = []
    for start, end in zip(merged[:-1], merged[1:]):
        s0, s1 = np.interp([start, end], fine, arclength)
        n_seg = max(1, int(round((s1 - s0) / h)))
        s = s0 + (s1 - s0) * np.arange(n_seg) / n_seg
        gammas = np.interp(s, arclength, fine)
        gammas[0] = start
        params.extend(gammas.tolist())
    return np.array(params)


def _hex_lattice(a: float, b: float, h: float) -> np.ndarray:
    dy = h * math.sqrt(3.0) / 2.0
    rows = np.arange(-math.ceil(b / dy), math.ceil(b / dy) + 1)
    cols = np.arange(-math.ceil(a / h) - 1, math.ceil(a / h) + 2)
    jj, ii = np.meshgrid(rows, cols, indexing="ij")
    x = ii * h + 0.5 * h * (jj % 2)
    y = jj * dy
    return np.stack([x.ravel(), y.ravel()], axis=1)


def _distance_to_polygon(points: np.ndarray, polygon: np.ndarray, chunk: int = 1024) -> np.ndarray:
    p = polygon
    d = np.roll(polygon, -1, axis=0) - p
    dd = np.einsum("ij,ij->i", d, d)
    out = np.empty(len(points))
    for start in range(0, len(points), chunk):
        pts = points[start : start + chunk]
        rel = pts[:, None, :] - p[None, :, :]
        s = np.clip(np.einsum("kij,ij->ki", rel, d) / dd[None, :], 0.0, 1.0)
        closest = p[None, :, :] + s[:, :, None] * d[None, :, :]
        out[start : start + chunk] = np.min(np.linalg.norm(pts[:, None, :] - closest, axis=2), axis=1)
    return out


def generate_ellipse_mesh(a: float, b: float, h: float, dirichlet_arcs: Sequence[Arc], require_dirichlet: bool = True) -> Mesh:
    """Triangulate the ellipse (a cos γ, b sin γ) at target edge length h.

    Boundary edges whose parameter interval lies in one of dirichlet_arcs are tagged DIRICHLET. Interior nodes come from
    a hexagonal lattice kept at least 0.6h away from the boundary polygon; the point set is Delaunay-triangulated, and
    because the boundary nodes are in convex position the hull is exactly the boundary polygon.
    """
    if not (a > 0 and b > 0):
        raise BadConfigException(f"ellipse semi-axes must be positive, got a={a}, b={b}")
    if not (0 < h < min(a, b)):
        raise BadConfigException(f"target edge length h={h} must lie in (0, min(a, b))")
    arcs = _validate_arcs(dirichlet_arcs)

    gammas = _ellipse_boundary_parameters(a, b, h, arcs)
    boundary = np.stack([a * np.cos(gammas), b * np.sin(gammas)], axis=1)
    nb = len(boundary)
    mid = 0.5 * (gammas + np.append(gammas[1:], TWO_PI))
    edge_tags = np.where(_in_arcs(mid, arcs), int(BoundaryTag.DIRICHLET), int(BoundaryTag.TRESCA))

    lattice = _hex_lattice(a, b, h)
    inside = (lattice[:, 0] / a) ** 2 + (lattice[:, 1] / b) ** 2 < 1.0
    lattice = lattice[inside]
    if len(lattice):
        lattice = lattice[_distance_to_polygon(lattice, boundary) >= 0.6 * h]
    points = np.vstack([boundary, lattice])

    triangles = Delaunay(points).simplices.astype(np.int64)
    areas = signed_areas(points, triangles)
    flip = areas < 0
    triangles[flip] = triangles[flip][:, [0, 2, 1]]
    keep = np.abs(areas) > 1e-12 * h * h
    if not np.all(keep):
        logger.fs.warning(f"[generate_ellipse_mesh] dropping {int(np.sum(~keep))} degenerate triangles")
        triangles = triangles[keep]

    edges = np.stack([np.arange(nb), np.roll(np.arange(nb), -1)], axis=1)
    mesh = Mesh.from_arrays(points, triangles, edges, edge_tags)
    if require_dirichlet:
        _require_contact_split(mesh)
    logger.fs.debug(f"[generate_ellipse_mesh] a={a} b={b} h={h}: {mesh.n_vertices} vertices, {mesh.n_triangles} triangles, {nb} boundary nodes")
    return mesh


def _require_contact_split(mesh: Mesh):
    try:
        mesh.validate(require_contact_split=True)
    except MeshException as e:
        raise BadConfigException(f"invalid Dirichlet/Tresca split: {e}") from e


def generate_rectangle_mesh(
    width: float = 1.0, height: float = 1.0, nx: int = 5, ny: int = 5, dirichlet_sides: Sequence[str] = ("left",), require_dirichlet: bool = True
) -> Mesh:
    """Structured mesh of [0, width] x [0, height] with nx x ny cells, each split along its rising diagonal."""
    if not (width > 0 and height > 0 and nx >= 1 and ny >= 1):
        raise BadConfigException("rectangle mesh needs positive sides and at least one cell per direction")
    unknown = set(dirichlet_sides) - set(RECTANGLE_SIDES)
    if unknown:
        raise BadConfigException(f"unknown rectangle sides {sorted(unknown)}, expected a subset of {RECTANGLE_SIDES}")

    xs = np.linspace(0.0, width, nx + 1)
    ys = np.linspace(0.0, height, ny + 1)
    X, Y = np.meshgrid(xs, ys)
    vertices = np.stack([X.ravel(), Y.ravel()], axis=1)
    idx = lambda i, j: j * (nx + 1) + i

    triangles = []
    for j in range(ny):
        for i in range(nx):
            v00, v10, v11, v01 = idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1)
            triangles.append((v00, v10, v11))
            triangles.append((v00, v11, v01))

    loop, tags = [], []
    sides = {
        "bottom": [idx(i, 0) for i in range(nx)],
        "right": [idx(nx, j) for j in range(ny)],
        "top": [idx(i, ny) for i in range(nx, 0, -1)],
        "left": [idx(0, j) for j in range(ny, 0, -1)],
    }
    for side in RECTANGLE_SIDES:
        loop.extend(sides[side])
        tags.extend([BoundaryTag.DIRICHLET if side in dirichlet_sides else BoundaryTag.TRESCA] * len(sides[side]))
    edges = np.stack([np.array(loop), np.roll(np.array(loop), -1)], axis=1)

    mesh = Mesh.from_arrays(vertices, triangles, edges, tags)
    if require_dirichlet:
        _require_contact_split(mesh)
    return mesh
