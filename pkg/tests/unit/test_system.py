import numpy as np
import pytest

from trescashape.exceptions import ConstraintException
from trescashape.fem.assembly import assemble_elasticity, assemble_h1_metric
from trescashape.fem.system import SparseSystem, solve_constrained


def test_unconstrained_spd_solve(unit_square):
    M = assemble_h1_metric(unit_square)
    w = np.random.default_rng(1).normal(size=M.shape[0])
    for method in ("direct", "cg"):
        u = solve_constrained(SparseSystem(unit_square, M, M @ w), tol=1e-12, method=method)
        np.testing.assert_allclose(u.flat, w, atol=1e-8)


def test_component_constraints(unit_square):
    K = assemble_elasticity(unit_square, 1.0, 1.0)
    system = SparseSystem(unit_square, K, np.zeros(K.shape[0])).fix_nodes(unit_square.dirichlet_nodes, 0.25)
    u = solve_constrained(system, method="direct")
    # rigid translation by 0.25 is the unique solution
    np.testing.assert_allclose(u.values, 0.25, atol=1e-10)


def test_all_dofs_constrained(unit_square):
    K = assemble_elasticity(unit_square, 1.0, 1.0)
    system = SparseSystem(unit_square, K, np.ones(K.shape[0])).fix_nodes(range(unit_square.n_vertices), -1.0)
    np.testing.assert_array_equal(solve_constrained(system).values, -1.0)


def test_directional_constraint(unit_square):
    K = assemble_elasticity(unit_square, 1.0, 1.0)
    F = np.zeros(K.shape[0])
    F[1::2] = -0.01
    node = int(unit_square.tresca_nodes[3])
    d = np.array([1.0, 2.0])
    system = SparseSystem(unit_square, K, F).fix_nodes(unit_square.dirichlet_nodes).fix_direction(node, d, 0.5)
    u_direct = solve_constrained(system, method="direct")
    u_cg = solve_constrained(system, tol=1e-12, method="cg")
    assert u_direct.values[node] @ d == pytest.approx(0.5, abs=1e-12)
    np.testing.assert_allclose(u_cg.values, u_direct.values, atol=1e-8)


def test_conflicting_constraints(unit_square):
    K = assemble_elasticity(unit_square, 1.0, 1.0)
    F = np.zeros(K.shape[0])
    with pytest.raises(ConstraintException):
        solve_constrained(SparseSystem(unit_square, K, F).fix_nodes([0], 0.0).fix_nodes([0], 1.0))
    with pytest.raises(ConstraintException):
        solve_constrained(SparseSystem(unit_square, K, F).fix_direction(3, [0.0, 0.0]))
    with pytest.raises(ConstraintException):
        solve_constrained(SparseSystem(unit_square, K, F).fix_nodes([3]).fix_direction(3, [1.0, 0.0]))
    with pytest.raises(ConstraintException):
        solve_constrained(SparseSystem(unit_square, K, F).fix_direction(3, [1.0, 0.0], 0.0).fix_direction(3, [0.0, 1.0], 0.0))
    with pytest.raises(ConstraintException):
        solve_constrained(SparseSystem(unit_square, K, F).fix_nodes([0]), method="gmres")
