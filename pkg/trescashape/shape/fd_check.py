import numpy as np
import pandas as pd
from typing import Optional, Sequence

from trescashape.contact.energy import energy
from trescashape.contact.problem import ProblemData
from trescashape.contact.state import ContactState
from trescashape.contact.switching import solve_tresca
from trescashape.fem.fields import VectorField
from trescashape.mesh.mesh import Mesh, deform
from trescashape.shape.descent import h1_norm
from trescashape.shape.gradient import boundary_form_functional, volume_form_functional
from trescashape.shape.material import solve_material_derivative
from trescashape.utils.fn import do_parallel

GRAD_CHECK_COLUMNS = ["t", "fd_quotient", "value_volume", "value_boundary", "rel_error_volume", "rel_error_boundary"]


def relative_error(approx: float, exact: float) -> float:
    if approx == exact:
        return 0.0
    return abs(approx - exact) / max(abs(exact), 1e-300)


def fd_gradient_check(
    mesh: Mesh,
    problem: ProblemData,
    theta: VectorField,
    t_list: Sequence[float],
    u0: Optional[VectorField] = None,
    state: Optional[ContactState] = None,
    n_workers: int = -1,
) -> pd.DataFrame:
    """(𝒥(Ω_t) − 𝒥(Ω))/t for each t against both gradient forms; rows follow t_list order."""
    if u0 is None or state is None:
        u0, state = solve_tresca(mesh, problem)
    value_volume = volume_form_functional(mesh, problem, u0, state)(theta)
    value_boundary = boundary_form_functional(mesh, problem, u0, state)(theta)
    j0 = energy(mesh, problem, u0)

    def quotient(t: float) -> float:
        moved = deform(mesh, theta, t)
        u_t, _ = solve_tresca(moved, problem, warm_start=state)
        return (energy(moved, problem, u_t) - j0) / t

    quotients = do_parallel(quotient, [float(t) for t in t_list], n=n_workers, return_args=False)
    rows = [
        {
            "t": float(t),
            "fd_quotient": q,
            "value_volume": value_volume,
            "value_boundary": value_boundary,
            "rel_error_volume": relative_error(q, value_volume),
            "rel_error_boundary": relative_error(q, value_boundary),
        }
        for t, q in zip(t_list, quotients)
    ]
    return pd.DataFrame(rows, columns=GRAD_CHECK_COLUMNS)


def material_derivative_fd_errors(
    mesh: Mesh,
    problem: ProblemData,
    theta: VectorField,
    t_list: Sequence[float],
    u0: Optional[VectorField] = None,
    state: Optional[ContactState] = None,
) -> np.ndarray:
    """‖(ū_t − u)/t − ū′‖_{H1} for each t, ū_t the solution on the deformed mesh read back node by node."""
    if u0 is None or state is None:
        u0, state = solve_tresca(mesh, problem)
    ubar_prime = solve_material_derivative(mesh, problem, u0, state, theta)

    def error(t: float) -> float:
        u_t, _ = solve_tresca(deform(mesh, theta, t), problem, warm_start=state)
        quotient = VectorField.on(mesh, (u_t.values - u0.values) / t)
        return h1_norm(mesh, quotient - ubar_prime)

    return np.array(do_parallel(error, [float(t) for t in t_list], return_args=False))


def random_direction(mesh: Mesh, seed: int, n_modes: int = 3) -> VectorField:
    """Seeded smooth deformation field: low-frequency trigonometric modes, unit max-norm, zero on Dirichlet nodes."""
    rng = np.random.default_rng(seed)
    lo, hi = mesh.vertices.min(axis=0), mesh.vertices.max(axis=0)
    xi = (mesh.vertices - lo) / np.maximum(hi - lo, 1e-300)
    values = np.zeros((mesh.n_vertices, 2))
    for k in range(1, n_modes + 1):
        phase = rng.uniform(0.0, 2.0 * np.pi, size=(2, 2))
        amp = rng.standard_normal(2) / k
        for c in range(2):
            values[:, c] += amp[c] * np.sin(np.pi * k * xi[:, 0] + phase[c, 0]) * np.cos(np.pi * k * xi[:, 1] + phase[c, 1])
    values[mesh.dirichlet_nodes] = 0.0
    peak = np.max(np.abs(values))
    return VectorField.on(mesh, values / peak if peak > 0 else values)
