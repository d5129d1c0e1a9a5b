import time
from pathlib import Path

import numpy as np
import pytest

from trescashape.config import RunConfig, load_config
from trescashape.contact.energy import energy
from trescashape.contact.oracle import oracle_projected_gradient
from trescashape.contact.state import ContactMode
from trescashape.contact.switching import DiscreteProblem, solve_tresca
from trescashape.mesh.generators import generate_ellipse_mesh, generate_rectangle_mesh
from trescashape.mesh.mesh import area, deform, mesh_quality
from trescashape.optimizer.uzawa import run_optimization
from trescashape.shape.descent import descent_direction, h1_norm
from trescashape.shape.fd_check import fd_gradient_check, material_derivative_fd_errors, random_direction
from trescashape.shape.gradient import volume_form_functional

REFERENCE_CFG = Path(__file__).resolve().parents[2] / "configs" / "reference.cfg"

pytestmark = pytest.mark.slow


@pytest.fixture(scope="module")
def reference_run():
    cfg = load_config(REFERENCE_CFG)
    problem = cfg.problem_data()
    mesh = cfg.build_mesh()
    u, state = solve_tresca(mesh, problem)
    return cfg, problem, mesh, u, state


def test_switching_matches_projected_gradient_oracle(square_problem):
    mesh = generate_rectangle_mesh(1.0, 1.0, 5, 5, dirichlet_sides=("left",))
    assert mesh.n_vertices <= 60
    start = time.perf_counter()
    u_switch, _ = solve_tresca(mesh, square_problem)
    u_oracle = oracle_projected_gradient(mesh, square_problem)
    assert time.perf_counter() - start < 5.0
    diff = (u_switch - u_oracle).flat
    K = DiscreteProblem.assemble(mesh, square_problem).stiffness
    assert np.sqrt(diff @ (K @ diff)) <= 1e-6


def test_discrete_friction_law(reference_run):
    cfg, problem, mesh, u, state = reference_run
    tau = mesh.frame.tangents[mesh.tresca_positions]
    u_tau = np.einsum("ia,ia->i", u.values[state.nodes], tau)
    g = state.g
    dp = DiscreteProblem.assemble(mesh, problem)
    traction_scale = np.abs(dp.load).max() / mesh.frame.weights.min()
    scale = max(1.0, float(np.max(np.abs(u_tau)))) * max(traction_scale, float(np.max(g)))

    assert np.max(np.abs(u_tau * state.s_tau + g * np.abs(u_tau))) <= 1e-8 * scale
    assert np.all(np.abs(state.s_tau) <= g * (1.0 + 1e-8))
    assert np.max(np.abs(state.sigma_n)) <= 1e-6 * traction_scale


def test_energy_identity(reference_run):
    cfg, problem, mesh, u, state = reference_run
    K = DiscreteProblem.assemble(mesh, problem).stiffness
    half_a = 0.5 * u.flat @ (K @ u.flat)
    assert energy(mesh, problem, u) == pytest.approx(-half_a, rel=1e-10)


def test_top_boundary_slips_and_bottom_sticks(reference_run):
    cfg, problem, mesh, u, state = reference_run
    y = mesh.vertices[state.nodes, 1]
    assert np.any(state.modes[y > 0] == ContactMode.SLIP)
    assert not np.any(state.modes[y < -0.5] == ContactMode.SLIP)


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_gradient_matches_difference_quotients(reference_run, seed):
    cfg, problem, mesh, u, state = reference_run
    theta = random_direction(mesh, seed)
    table = fd_gradient_check(mesh, problem, theta, [1e-2, 1e-3], u0=u, state=state)
    coarse, fine = table.iloc[0], table.iloc[1]
    assert fine.rel_error_volume <= 0.05
    assert fine.rel_error_volume < coarse.rel_error_volume
    assert fine.rel_error_boundary <= 0.05
    assert fine.rel_error_boundary < coarse.rel_error_boundary
    assert abs(fine.value_boundary - fine.value_volume) <= 0.05 * abs(fine.value_volume)


def test_descent_direction_decreases_energy(reference_run):
    cfg, problem, mesh, u, state = reference_run
    functional = volume_form_functional(mesh, problem, u, state)
    theta0 = descent_direction(mesh, functional)
    norm2 = h1_norm(mesh, theta0) ** 2
    assert functional(theta0) == pytest.approx(-norm2, rel=1e-8)

    direction = theta0.scaled(1.0 / np.max(np.abs(theta0.values)))
    moved = deform(mesh, direction, 1e-3)
    u_t, _ = solve_tresca(moved, problem, warm_start=state)
    assert (energy(moved, problem, u_t) - energy(mesh, problem, u)) / 1e-3 < 0.0


@pytest.mark.parametrize("seed", [0, 1])
def test_material_derivative_difference_quotients(seed):
    cfg = RunConfig()
    mesh = generate_ellipse_mesh(cfg.a, cfg.b, 0.2, cfg.dirichlet_arcs)
    assert mesh.n_vertices <= 200
    problem = cfg.problem_data()
    errors = material_derivative_fd_errors(mesh, problem, random_direction(mesh, seed), [1e-1, 1e-2, 1e-3])
    assert errors[1] < errors[0]
    assert errors[2] < errors[1]


def test_volume_constrained_optimization():
    cfg = load_config(REFERENCE_CFG)
    problem = cfg.problem_data()
    mesh0 = cfg.build_mesh()
    start = time.perf_counter()
    mesh, history = run_optimization(mesh0, problem, cfg.optim_config())
    assert time.perf_counter() - start < 600.0

    first, last = history[0], history[-1]
    assert last.J < first.J
    assert abs(last.volume - np.pi) <= 0.01 * np.pi
    assert abs(area(mesh) - np.pi) <= 0.01 * np.pi
    floor = min(cfg.min_angle_deg, first.min_angle)
    assert all(r.min_angle >= floor - 1e-9 for r in history.records)
    assert np.degrees(mesh_quality(mesh).min_angle) >= floor - 1e-9


def test_pure_lagrangian_reference_run_terminates():
    cfg = load_config(REFERENCE_CFG).with_overrides(penalty=0.0)
    mesh0 = cfg.build_mesh()
    mesh, history = run_optimization(mesh0, cfg.problem_data(), cfg.optim_config())
    assert len(history) >= 2
    floor = min(cfg.min_angle_deg, history[0].min_angle)
    assert all(r.min_angle >= floor - 1e-9 for r in history.records)
    assert np.degrees(mesh_quality(mesh).min_angle) >= floor - 1e-9
    np.testing.assert_array_equal(mesh.vertices[mesh.dirichlet_nodes], mesh0.vertices[mesh0.dirichlet_nodes])
