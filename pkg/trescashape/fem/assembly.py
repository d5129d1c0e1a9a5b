import io

import numpy as np
import scipy.io
import scipy.sparse as sp
from typing import Optional

from trescashape.exceptions import AssemblyException, BadConfigException
from trescashape.fem.sources import VectorSource, evaluate_vector
from trescashape.mesh.mesh import Mesh
from trescashape.utils.fn import PathLike, atomic_write_text

# barycentric coordinates of the three edge midpoints; exact for quadratics
MIDPOINT_BARYCENTRIC = np.array([[0.5, 0.5, 0.0], [0.0, 0.5, 0.5], [0.5, 0.0, 0.5]])

# two-point Gauss rule on [0, 1]
GAUSS2_POINTS = np.array([0.5 - 0.5 / np.sqrt(3.0), 0.5 + 0.5 / np.sqrt(3.0)])
GAUSS2_WEIGHTS = np.array([0.5, 0.5])


def element_dofs(mesh: Mesh) -> np.ndarray:
    """(nt, 6) interleaved dof indices of each triangle."""
    tri = mesh.triangles
    dofs = np.empty((mesh.n_triangles, 6), dtype=np.int64)
    dofs[:, 0::2] = 2 * tri
    dofs[:, 1::2] = 2 * tri + 1
    return dofs


def _check_areas(mesh: Mesh):
    bad = np.flatnonzero(mesh.triangle_areas <= 1e-300)
    if len(bad):
        raise AssemblyException(f"degenerate triangle {int(bad[0])} (area {mesh.triangle_areas[bad[0]]:.3e})")


def strain_matrices(mesh: Mesh) -> np.ndarray:
    """(nt, 3, 6) maps element dofs to engineering strain (e_xx, e_yy, 2e_xy)."""
    grads = mesh.basis_gradients
    B = np.zeros((mesh.n_triangles, 3, 6))
    B[:, 0, 0::2] = grads[:, :, 0]
    B[:, 1, 1::2] = grads[:, :, 1]
    B[:, 2, 0::2] = grads[:, :, 1]
    B[:, 2, 1::2] = grads[:, :, 0]
    return B


def lame_matrix(mu: float, lam: float) -> np.ndarray:
    return np.array([[2 * mu + lam, lam, 0.0], [lam, 2 * mu + lam, 0.0], [0.0, 0.0, mu]])


def _assemble(mesh: Mesh, element_matrices: np.ndarray, dofs: np.ndarray, n: int) -> sp.csr_matrix:
    k = dofs.shape[1]
    rows = np.repeat(dofs, k, axis=1).ravel()
    cols = np.tile(dofs, (1, k)).ravel()
    return sp.coo_matrix((element_matrices.ravel(), (rows, cols)), shape=(n, n)).tocsr()


def assemble_elasticity(mesh: Mesh, mu: float, lam: float, element_weights: Optional[np.ndarray] = None) -> sp.csr_matrix:
    """Plane-strain stiffness ∫ 2μ e(φ_i):e(φ_j) + λ div φ_i div φ_j, interleaved dofs; element_weights scale each triangle."""
    if not mu > 0 or not lam >= 0:
        raise BadConfigException(f"Lamé parameters need mu > 0 and lambda >= 0, got mu={mu}, lambda={lam}")
    _check_areas(mesh)
    B = strain_matrices(mesh)
    D = lame_matrix(mu, lam)
    scale = mesh.triangle_areas if element_weights is None else mesh.triangle_areas * element_weights
    ke = np.einsum("t,tai,ab,tbj->tij", scale, B, D, B)
    return _assemble(mesh, ke, element_dofs(mesh), 2 * mesh.n_vertices)


def midpoint_quadrature(mesh: Mesh):
    """Quadrature points (nt, 3, 2) and weights (nt, 3) of the three-midpoint rule."""
    v = mesh.vertices[mesh.triangles]
    points = np.einsum("qk,tkd->tqd", MIDPOINT_BARYCENTRIC, v)
    weights = np.repeat(mesh.triangle_areas[:, None] / 3.0, 3, axis=1)
    return points, weights


def assemble_load(mesh: Mesh, f: VectorSource) -> np.ndarray:
    """∫ f·φ_i with the three-midpoint rule."""
    points, weights = midpoint_quadrature(mesh)
    fq = evaluate_vector(f, points.reshape(-1, 2)).reshape(mesh.n_triangles, 3, 2)
    # local[t, k, c] = Σ_q w_q φ_k(x_q) f_c(x_q)
    local = np.einsum("tq,qk,tqc->tkc", weights, MIDPOINT_BARYCENTRIC, fq)
    F = np.zeros(2 * mesh.n_vertices)
    np.add.at(F, element_dofs(mesh).ravel(), local.reshape(-1))
    return F


def assemble_scalar_laplacian(mesh: Mesh) -> sp.csr_matrix:
    grads = mesh.basis_gradients
    ke = np.einsum("t,tid,tjd->tij", mesh.triangle_areas, grads, grads)
    return _assemble(mesh, ke, mesh.triangles, mesh.n_vertices)


def assemble_scalar_mass(mesh: Mesh) -> sp.csr_matrix:
    local = (np.ones((3, 3)) + np.eye(3)) / 12.0
    me = mesh.triangle_areas[:, None, None] * local[None, :, :]
    return _assemble(mesh, me, mesh.triangles, mesh.n_vertices)


def assemble_h1_metric(mesh: Mesh) -> sp.csr_matrix:
    """Vector H1 inner product ∫ ∇u:∇v + u·v with consistent mass, interleaved dofs."""
    _check_areas(mesh)
    scalar = assemble_scalar_laplacian(mesh) + assemble_scalar_mass(mesh)
    return sp.kron(scalar, sp.identity(2), format="csr")


def write_matrix_market(path: PathLike, operator: sp.spmatrix, comment: str = "") -> None:
    buf = io.BytesIO()
    scipy.io.mmwrite(buf, sp.coo_matrix(operator), comment=comment, symmetry="symmetric")
    atomic_write_text(path, buf.getvalue().decode("ascii"))
