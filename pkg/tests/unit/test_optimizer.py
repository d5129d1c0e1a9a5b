import math

import numpy as np
import pytest

from trescashape.exceptions import BadConfigException, DeformationStallException
from trescashape.fem.fields import VectorField
from trescashape.mesh.mesh import area, deform
from trescashape.optimizer.config import OptimConfig
from trescashape.optimizer.hooks import OptimizationHook
from trescashape.optimizer.uzawa import (
    HISTORY_CSV_COLUMNS,
    IterationRecord,
    OptimHistory,
    run_optimization,
    stopping_check,
    volume_constraint_gradient,
)


class RecordingHook(OptimizationHook):
    def __init__(self):
        self.events = []

    def on_start(self, mesh, max_iters):
        self.events.append(("start", max_iters))

    def on_iteration(self, record):
        self.events.append(("iteration", record.iter))

    def on_snapshot(self, iteration, mesh, u):
        self.events.append(("snapshot", iteration))

    def on_finish(self, history):
        self.events.append(("finish", len(history)))


def history_of(energies):
    records = [IterationRecord(k, J, math.pi, 0.0, 0.0, 0, 30.0) for k, J in enumerate(energies)]
    return OptimHistory(records)


def test_stopping_check_window():
    cfg = OptimConfig(window=3, delta_j=1e-4)
    assert not stopping_check(history_of([]), cfg)
    assert not stopping_check(history_of([1.0]), cfg)
    assert not stopping_check(history_of([1.0] * 3), cfg)
    # iteration 3 is the first window end
    assert stopping_check(history_of([1.0] * 4), cfg)
    assert not stopping_check(history_of([1.0] * 5), cfg)
    assert stopping_check(history_of([1.0] * 7), cfg)


def test_stopping_check_compares_window_ends():
    cfg = OptimConfig(window=2, delta_j=1e-4)
    # the first window compares iteration 2 with the initial shape
    assert not stopping_check(history_of([1.0, 0.9, 0.5]), cfg)
    assert stopping_check(history_of([1.0, 0.9, 1.00005]), cfg)
    # iterations 4 and 2 differ by 0.5, iterations 6 and 4 by 5e-5
    assert not stopping_check(history_of([1.0, 0.9, 0.8, 0.6, 0.3]), cfg)
    assert stopping_check(history_of([1.0, 0.9, 0.8, 0.6, 0.3, 0.2, 0.30005]), cfg)


def test_optim_config_validation():
    OptimConfig()
    for bad in (
        dict(target_volume=0.0),
        dict(rho=-1.0),
        dict(step0=0.0),
        dict(shrink=1.0),
        dict(max_iters=0),
        dict(window=0),
        dict(delta_j=0.0),
        dict(min_angle_deg=60.0),
        dict(gradient_form="spectral"),
        dict(mesh_motion="laplace"),
        dict(relax_angle_deg=-1.0),
        dict(penalty=-1.0),
        dict(snapshot_every=-1),
    ):
        with pytest.raises(BadConfigException):
            OptimConfig(**bad)
    assert OptimConfig(min_angle_deg=5.0).min_angle == pytest.approx(math.radians(5.0))
    assert set(OptimConfig().to_summary_dict()) >= {"target_volume", "rho", "window", "delta_j", "penalty"}


def test_volume_gradient_of_normal_field_is_perimeter(unit_disk):
    frame = unit_disk.frame
    values = np.zeros((unit_disk.n_vertices, 2))
    values[frame.nodes] = frame.normals
    functional = volume_constraint_gradient(unit_disk)
    assert functional(VectorField.on(unit_disk, values)) == pytest.approx(frame.perimeter, rel=1e-12)


def test_volume_gradient_matches_area_difference_quotient(coarse_ellipse):
    frame = coarse_ellipse.frame
    values = np.zeros((coarse_ellipse.n_vertices, 2))
    values[frame.nodes] = frame.normals
    values[coarse_ellipse.dirichlet_nodes] = 0.0
    theta = VectorField.on(coarse_ellipse, values)
    t = 1e-3
    quotient = (area(deform(coarse_ellipse, theta, t)) - area(coarse_ellipse)) / t
    assert volume_constraint_gradient(coarse_ellipse)(theta) == pytest.approx(quotient, rel=1e-2)


def test_zero_load_at_target_volume_stops_immediately(coarse_ellipse, reference_config):
    problem = reference_config.with_overrides(f_x="0", f_y="0").problem_data()
    cfg = OptimConfig(target_volume=area(coarse_ellipse), max_iters=5)
    hook = RecordingHook()
    mesh, history = run_optimization(coarse_ellipse, problem, cfg, hook=hook)
    assert mesh is coarse_ellipse
    assert len(history) == 1
    assert history[0].J == 0.0
    assert history[0].step == 0.0
    assert hook.events == [("start", 5), ("iteration", 0), ("finish", 1)]


def test_short_run_multiplier_recursion(coarse_ellipse, reference_problem):
    cfg = OptimConfig(target_volume=math.pi, rho=1.0, max_iters=4, snapshot_every=2)
    hook = RecordingHook()
    mesh, history = run_optimization(coarse_ellipse, reference_problem, cfg, hook=hook)
    assert len(history) == 4
    assert mesh.n_vertices == coarse_ellipse.n_vertices
    np.testing.assert_array_equal(mesh.vertices[mesh.dirichlet_nodes], coarse_ellipse.vertices[coarse_ellipse.dirichlet_nodes])

    assert history[0].iter == 0
    assert history[0].step == 0.0
    assert history[0].multiplier == cfg.ell0
    assert history[0].volume == area(coarse_ellipse)
    floor = min(cfg.min_angle_deg, history[0].min_angle)
    for prev, cur in zip(history.records, history.records[1:]):
        assert cur.iter == prev.iter + 1
        assert cur.step > 0.0
        assert cur.multiplier == prev.multiplier + cfg.rho * (cur.volume - cfg.target_volume)
        assert cur.min_angle >= floor - 1e-9

    assert [e for e in hook.events if e[0] == "snapshot"] == [("snapshot", 0), ("snapshot", 2)]
    assert hook.events[-1] == ("finish", 4)
    assert list(history.to_frame().columns) == HISTORY_CSV_COLUMNS
    np.testing.assert_array_equal(history.energies, [r.J for r in history.records])


def test_runs_are_deterministic(coarse_ellipse, reference_problem):
    cfg = OptimConfig(max_iters=3)
    _, first = run_optimization(coarse_ellipse, reference_problem, cfg)
    _, second = run_optimization(coarse_ellipse, reference_problem, cfg)
    assert first.records == second.records


def test_boundary_form_run(coarse_ellipse, reference_problem):
    cfg = OptimConfig(max_iters=2, gradient_form="boundary")
    mesh, history = run_optimization(coarse_ellipse, reference_problem, cfg)
    assert len(history) == 2
    assert not np.array_equal(mesh.vertices, coarse_ellipse.vertices)


def test_stall_reports_partial_history(coarse_ellipse, reference_problem):
    cfg = OptimConfig(max_iters=3, step0=50.0, max_shrinks=0)
    hook = RecordingHook()
    with pytest.raises(DeformationStallException) as e:
        run_optimization(coarse_ellipse, reference_problem, cfg, hook=hook)
    assert e.value.exit_code == 4
    assert len(e.value.history) == 1
    assert hook.events[-1] == ("finish", 1)


@pytest.mark.parametrize("relax_angle_deg", [20.0, 59.0])
def test_pure_lagrangian_run_keeps_mesh_valid(coarse_ellipse, reference_problem, relax_angle_deg):
    cfg = OptimConfig(penalty=0.0, rho=1.0, max_iters=25, window=5, relax_angle_deg=relax_angle_deg)
    mesh, history = run_optimization(coarse_ellipse, reference_problem, cfg)
    assert 1 <= len(history) <= cfg.max_iters
    assert [r.iter for r in history.records] == list(range(len(history)))
    floor = min(cfg.min_angle_deg, history[0].min_angle)
    assert all(r.min_angle >= floor - 1e-9 for r in history.records)
    np.testing.assert_array_equal(mesh.vertices[mesh.dirichlet_nodes], coarse_ellipse.vertices[coarse_ellipse.dirichlet_nodes])
