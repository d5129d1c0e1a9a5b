import numpy as np

from trescashape.contact.switching import solve_dirichlet_neumann
from trescashape.fem.assembly import assemble_elasticity, assemble_load
from trescashape.fem.fields import VectorField
from trescashape.fem.system import SparseSystem, solve_constrained
from trescashape.fem.traction import boundary_traction, nodal_residual


def test_zero_displacement_zero_traction(unit_square):
    traction = boundary_traction(unit_square, VectorField.zeros(unit_square), 1.0, 1.0, np.zeros(2 * unit_square.n_vertices))
    assert np.all(traction.sigma_n == 0.0) and np.all(traction.s_tau == 0.0)
    np.testing.assert_array_equal(traction.nodes, unit_square.tresca_nodes)


def test_traction_free_boundary(coarse_ellipse, reference_problem):
    u = solve_dirichlet_neumann(coarse_ellipse, reference_problem)
    F = assemble_load(coarse_ellipse, reference_problem.f)
    traction = boundary_traction(coarse_ellipse, u, reference_problem.mu, reference_problem.lam, F)
    scale = np.abs(F).max() / coarse_ellipse.frame.weights.min()
    assert np.abs(traction.sigma_n).max() < 1e-8 * scale
    assert np.abs(traction.s_tau).max() < 1e-8 * scale


def test_global_equilibrium(coarse_ellipse, reference_problem):
    u = solve_dirichlet_neumann(coarse_ellipse, reference_problem)
    K = assemble_elasticity(coarse_ellipse, reference_problem.mu, reference_problem.lam)
    F = assemble_load(coarse_ellipse, reference_problem.f)
    r = nodal_residual(coarse_ellipse, u, K, F).reshape(-1, 2)
    boundary_force = r[coarse_ellipse.boundary_nodes].sum(axis=0)
    total_load = F.reshape(-1, 2).sum(axis=0)
    np.testing.assert_allclose(boundary_force + total_load, 0.0, atol=1e-8 * np.abs(F).sum())


def test_recovers_applied_edge_load(unit_square):
    # clamp the left side, pull the right side with unit traction (1, 0)
    K = assemble_elasticity(unit_square, 1.0, 0.5)
    x = unit_square.vertices
    right = np.flatnonzero(np.isclose(x[:, 0], 1.0))
    applied = np.zeros((unit_square.n_vertices, 2))
    for node in right:
        applied[node, 0] = 0.125 if np.isclose(x[node, 1], 0.0) or np.isclose(x[node, 1], 1.0) else 0.25
    u = solve_constrained(SparseSystem(unit_square, K, applied.reshape(-1)).fix_nodes(unit_square.dirichlet_nodes), method="direct")

    traction = boundary_traction(unit_square, u, 1.0, 0.5, np.zeros(2 * unit_square.n_vertices), stiffness=K)
    xt = x[traction.nodes]
    on_right = np.isclose(xt[:, 0], 1.0) & (xt[:, 1] > 0.0) & (xt[:, 1] < 1.0)
    assert on_right.sum() == 3
    np.testing.assert_allclose(traction.sigma_n[on_right], 1.0, atol=1e-8)
    np.testing.assert_allclose(traction.s_tau[on_right], 0.0, atol=1e-8)
    free = ~np.isclose(xt[:, 0], 1.0)
    np.testing.assert_allclose(traction.sigma_n[free], 0.0, atol=1e-8)
