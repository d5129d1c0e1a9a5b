import json

import numpy as np
import pytest

from trescashape.contact.energy import energy
from trescashape.contact.problem import ProblemData
from trescashape.contact.state import ContactMode, ContactState
from trescashape.contact.switching import solve_tresca
from trescashape.exceptions import TrescaShapeException
from trescashape.fem.fields import TractionField, VectorField
from trescashape.fem.sources import constant_scalar, constant_vector
from trescashape.mesh.generators import generate_ellipse_mesh
from trescashape.mesh.mesh import deform
from trescashape.shape.fd_check import GRAD_CHECK_COLUMNS, fd_gradient_check, random_direction, relative_error
from trescashape.shape.gradient import (
    BOUNDARY_RECOVERIES,
    LinearShapeFunctional,
    boundary_form_functional,
    junction_nodes,
    shape_gradient_boundary,
    shape_gradient_report,
    shape_gradient_volume,
    volume_form_functional,
)


@pytest.fixture
def reference_solution(coarse_ellipse, reference_problem):
    u, state = solve_tresca(coarse_ellipse, reference_problem)
    return coarse_ellipse, reference_problem, u, state


def far_interior_direction(mesh, seed=0):
    """Random field supported away from every triangle that touches a Tresca node."""
    near = np.zeros(mesh.n_vertices, dtype=bool)
    touches = np.isin(mesh.triangles, mesh.tresca_nodes).any(axis=1)
    near[mesh.triangles[touches].ravel()] = True
    near[mesh.boundary_nodes] = True
    values = np.random.default_rng(seed).standard_normal((mesh.n_vertices, 2))
    values[near] = 0.0
    return VectorField.on(mesh, values), int(np.sum(~near))


def test_zero_direction_gives_zero(reference_solution):
    mesh, problem, u, state = reference_solution
    theta = VectorField.zeros(mesh)
    assert shape_gradient_volume(mesh, problem, u, theta, state) == 0.0
    assert shape_gradient_boundary(mesh, problem, u, state, theta) == 0.0


def test_zero_load_gives_zero_gradient(coarse_ellipse, reference_config):
    problem = reference_config.with_overrides(f_x="0", f_y="0").problem_data()
    u, state = solve_tresca(coarse_ellipse, problem)
    theta = random_direction(coarse_ellipse, seed=3)
    assert shape_gradient_volume(coarse_ellipse, problem, u, theta, state) == 0.0
    assert shape_gradient_boundary(coarse_ellipse, problem, u, state, theta) == 0.0


def test_forms_are_linear_in_direction(reference_solution):
    mesh, problem, u, state = reference_solution
    t1, t2 = random_direction(mesh, seed=1), random_direction(mesh, seed=2)
    combined = t1.scaled(2.0) + t2.scaled(-0.5)
    for functional in (volume_form_functional(mesh, problem, u, state), boundary_form_functional(mesh, problem, u, state)):
        expected = 2.0 * functional(t1) - 0.5 * functional(t2)
        assert functional(combined) == pytest.approx(expected, rel=1e-10, abs=1e-14)


def test_boundary_form_only_sees_the_tresca_boundary(reference_solution):
    mesh, problem, u, state = reference_solution
    theta, support = far_interior_direction(mesh)
    assert support > 0
    assert shape_gradient_boundary(mesh, problem, u, state, theta) == pytest.approx(0.0, abs=1e-14)
    assert shape_gradient_volume(mesh, problem, u, theta, state) != 0.0


def affine_shear_state(mesh, problem, A):
    """Sticking state of u = A x with trace-free strain, whose traction is tangential on every axis-aligned side."""
    frame, pos, nodes = mesh.frame, mesh.tresca_positions, mesh.tresca_nodes
    u = VectorField.on(mesh, mesh.vertices @ A.T)
    sigma = problem.mu * (A + A.T)
    n, tau = frame.normals[pos], frame.tangents[pos]
    s_tau = np.einsum("ia,ab,ib->i", tau, sigma, n)
    state = ContactState(
        mesh_token=mesh.token,
        nodes=nodes,
        modes=np.full(len(nodes), int(ContactMode.STICK_STRICT)),
        slip_signs=-np.sign(s_tau),
        traction=TractionField(nodes=nodes, sigma_n=np.zeros(len(nodes)), s_tau=s_tau),
        g=np.full(len(nodes), 10.0),
        u_tau=np.einsum("ia,ia->i", u.values[nodes], tau),
    )
    return u, state, sigma


@pytest.mark.parametrize("recovery", BOUNDARY_RECOVERIES)
def test_boundary_recovery_is_exact_for_affine_shear(unit_square, recovery):
    mesh = unit_square
    problem = ProblemData(f=constant_vector(0.0, 0.0), g=constant_scalar(10.0), mu=1.0, lam=0.5)
    A = np.array([[0.0, 0.4], [-0.1, 0.0]])
    u, state, sigma = affine_shear_state(mesh, problem, A)

    frame, pos, nodes = mesh.frame, mesh.tresca_positions, mesh.tresca_nodes
    side = np.abs(frame.curvature[pos]) < 1e-12
    assert side.sum() >= 6
    values = np.zeros((mesh.n_vertices, 2))
    values[nodes[side]] = frame.normals[pos][side]
    theta = VectorField.on(mesh, values)

    w, n, tau = frame.weights[pos][side], frame.normals[pos][side], frame.tangents[pos][side]
    density = 0.5 * np.sum(sigma * 0.5 * (A + A.T))
    dn_u_tau = np.einsum("ia,ab,ib->i", tau, A, n)
    terms = boundary_form_functional(mesh, problem, u, state, recovery=recovery).evaluate_terms(theta)
    assert terms["energy_density"] == pytest.approx(np.sum(w * density), rel=1e-12)
    assert terms["shear_normal_derivative"] == pytest.approx(-np.sum(w * state.s_tau[side] * dn_u_tau), rel=1e-12)
    assert terms["load"] == 0.0


def test_unknown_boundary_recovery_is_rejected(reference_solution):
    mesh, problem, u, state = reference_solution
    with pytest.raises(TrescaShapeException):
        boundary_form_functional(mesh, problem, u, state, recovery="patch")


def test_volume_form_matches_difference_quotient_under_pure_stick(unit_square):
    problem = ProblemData(f=constant_vector(0.0, -1.0), g=constant_scalar(100.0), mu=1.0, lam=1.0)
    theta = random_direction(unit_square, seed=7)
    u, state = solve_tresca(unit_square, problem)
    table = fd_gradient_check(unit_square, problem, theta, [1e-5], u0=u, state=state, n_workers=1)
    assert list(table.columns) == GRAD_CHECK_COLUMNS
    row = table.iloc[0]
    assert row.value_volume != 0.0
    assert row.rel_error_volume < 1e-2

    moved = deform(unit_square, theta, 1e-5)
    u_t, _ = solve_tresca(moved, problem)
    quotient = (energy(moved, problem, u_t) - energy(unit_square, problem, u)) / 1e-5
    assert row.fd_quotient == pytest.approx(quotient, rel=1e-4)


def test_functional_terms_and_plus(reference_solution):
    mesh, problem, u, state = reference_solution
    functional = volume_form_functional(mesh, problem, u, state)
    assert list(functional.terms) == ["divergence_energy", "load_transport", "stress_transport", "boundary_load", "duality", "friction"]
    theta = random_direction(mesh, seed=4)
    terms = functional.evaluate_terms(theta)
    assert sum(terms.values()) == pytest.approx(functional(theta), rel=1e-12, abs=1e-15)

    extra = LinearShapeFunctional.on(mesh, {"friction": np.ones(2 * mesh.n_vertices), "volume": np.full(2 * mesh.n_vertices, 2.0)})
    combined = functional.plus(extra, weight=0.5)
    assert list(combined.terms)[-1] == "volume"
    expected = functional(theta) + 0.5 * float(np.sum(theta.flat)) + float(np.sum(theta.flat))
    assert combined(theta) == pytest.approx(expected, rel=1e-12, abs=1e-12)
    np.testing.assert_allclose(combined.coefficients, functional.coefficients + 1.5)


def test_functional_rejects_foreign_mesh_and_bad_shape(reference_solution, unit_square):
    mesh, problem, u, state = reference_solution
    functional = volume_form_functional(mesh, problem, u, state)
    with pytest.raises(TrescaShapeException):
        functional(VectorField.zeros(unit_square))
    with pytest.raises(TrescaShapeException):
        LinearShapeFunctional.on(mesh, {"bad": np.zeros(3)})
    other = LinearShapeFunctional.on(unit_square, {"x": np.zeros(2 * unit_square.n_vertices)})
    with pytest.raises(TrescaShapeException):
        functional.plus(other)


def test_junction_nodes_of_reference_ellipse(coarse_ellipse):
    junctions = junction_nodes(coarse_ellipse)
    assert len(junctions) == 4
    assert set(junctions.tolist()) <= set(coarse_ellipse.tresca_nodes.tolist())


def test_gradient_report(reference_solution):
    mesh, problem, u, state = reference_solution
    theta = random_direction(mesh, seed=5)
    report = shape_gradient_report(mesh, problem, u, state, theta)
    assert report.value_volume == pytest.approx(shape_gradient_volume(mesh, problem, u, theta, state), rel=1e-12)
    assert report.value_boundary == pytest.approx(shape_gradient_boundary(mesh, problem, u, state, theta), rel=1e-12)
    assert report.theta_norm_h1 > 0.0
    assert any(name.startswith("volume.") for name in report.terms)
    assert any(name.startswith("boundary.") for name in report.terms)

    payload = json.loads(report.to_json())
    assert set(payload) == {"value_boundary", "value_volume", "terms", "theta_norm_h1", "junction_nodes"}
    assert payload["junction_nodes"] == junction_nodes(mesh).tolist()


def test_random_direction(coarse_ellipse):
    theta = random_direction(coarse_ellipse, seed=11)
    np.testing.assert_array_equal(theta.values, random_direction(coarse_ellipse, seed=11).values)
    assert not np.array_equal(theta.values, random_direction(coarse_ellipse, seed=12).values)
    assert np.max(np.abs(theta.values)) == pytest.approx(1.0)
    np.testing.assert_array_equal(theta.values[coarse_ellipse.dirichlet_nodes], 0.0)


def test_random_direction_without_dirichlet_nodes():
    disk = generate_ellipse_mesh(1.0, 1.0, 0.3, [], require_dirichlet=False)
    theta = random_direction(disk, seed=0, n_modes=1)
    assert np.max(np.abs(theta.values)) == pytest.approx(1.0)


def test_relative_error():
    assert relative_error(1.0, 1.0) == 0.0
    assert relative_error(1.1, 1.0) == pytest.approx(0.1)
    assert relative_error(0.0, -2.0) == 1.0
