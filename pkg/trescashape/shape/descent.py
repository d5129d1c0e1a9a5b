import numpy as np
from typing import Callable, Union

from trescashape.exceptions import TrescaShapeException
from trescashape.fem.assembly import assemble_elasticity, assemble_h1_metric
from trescashape.fem.fields import VectorField
from trescashape.fem.system import SparseSystem, solve_constrained
from trescashape.mesh.mesh import Mesh
from trescashape.shape.gradient import LinearShapeFunctional
from trescashape.utils import logger

GradientFunctional = Union[LinearShapeFunctional, Callable[[VectorField], float]]

MESH_MOTIONS = ("elasticity", "riesz")


def h1_norm(mesh: Mesh, theta: VectorField) -> float:
    theta.check_mesh(mesh)
    x = theta.flat
    return float(np.sqrt(max(x @ (assemble_h1_metric(mesh) @ x), 0.0)))


def functional_coefficients(mesh: Mesh, functional: GradientFunctional) -> np.ndarray:
    """Coefficient vector c with functional(θ) = c·θ, probing nodal basis fields that vanish on Γ_D if needed."""
    if isinstance(functional, LinearShapeFunctional):
        if functional.mesh_token != mesh.token:
            raise TrescaShapeException("functional belongs to a different mesh")
        return np.where(np.repeat(mesh.dirichlet_mask, 2), 0.0, functional.coefficients)
    c = np.zeros(2 * mesh.n_vertices)
    basis = np.zeros(2 * mesh.n_vertices)
    for dof in np.flatnonzero(np.repeat(~mesh.dirichlet_mask, 2)):
        basis[dof] = 1.0
        c[dof] = functional(VectorField.on(mesh, basis))
        basis[dof] = 0.0
    return c


def descent_direction(mesh: Mesh, functional: GradientFunctional, tol: float = 1e-12) -> VectorField:
    """θ0 with ∫∇θ0:∇θ + θ0·θ = −𝒥′(θ) for every θ vanishing on Γ_D, so 𝒥′(θ0) = −‖θ0‖²_{H1}."""
    c = functional_coefficients(mesh, functional)
    if not np.any(c):
        return VectorField.zeros(mesh)
    system = SparseSystem(mesh, assemble_h1_metric(mesh), -c).fix_nodes(mesh.dirichlet_nodes)
    theta0 = solve_constrained(system, tol=tol, method="direct")

    slope = float(c @ theta0.flat)
    norm2 = h1_norm(mesh, theta0) ** 2
    if abs(slope + norm2) > 1e-8 * max(norm2, 1e-300):
        logger.fs.warning(f"[descent_direction] descent identity off: J'(θ0) = {slope:.6e}, ‖θ0‖² = {norm2:.6e}")
    return theta0


def mesh_motion(mesh: Mesh, theta0: VectorField, tol: float = 1e-12) -> VectorField:
    """Normal part (θ0·n)n of θ0 on the Tresca nodes, extended inside by linear elasticity with stiffness ∝ 1/|T|.

    Small triangles are stiff, so they move almost rigidly; tangential sliding of boundary nodes is dropped.
    """
    theta0.check_mesh(mesh)
    pos, nodes = mesh.tresca_positions, mesh.tresca_nodes
    n = mesh.frame.normals[pos]
    normal = np.einsum("ia,ia->i", theta0.values[nodes], n)[:, None] * n
    areas = mesh.triangle_areas
    K = assemble_elasticity(mesh, 1.0, 0.0, element_weights=areas.max() / areas)
    system = SparseSystem(mesh, K, np.zeros(2 * mesh.n_vertices)).fix_nodes(mesh.dirichlet_nodes).fix_values(nodes, normal)
    return solve_constrained(system, tol=tol, method="direct")


def deformation_direction(mesh: Mesh, functional: GradientFunctional, motion: str = "elasticity") -> VectorField:
    """Descent direction used to move the mesh: θ0 itself ("riesz") or its mesh_motion ("elasticity").

    The elasticity field is kept only when it still descends, 𝒥′(θ) < 0; otherwise θ0 is returned.
    """
    if motion not in MESH_MOTIONS:
        raise TrescaShapeException(f"unknown mesh motion {motion!r}, expected one of {MESH_MOTIONS}")
    theta0 = descent_direction(mesh, functional)
    if motion == "riesz" or not np.any(theta0.values):
        return theta0
    theta = mesh_motion(mesh, theta0)
    slope = float(functional_coefficients(mesh, functional) @ theta.flat)
    if not slope < 0:
        logger.fs.warning(f"[deformation_direction] elasticity motion is not a descent direction (J' = {slope:.6e}), using θ0")
        return theta0
    return theta
