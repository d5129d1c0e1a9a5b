import json
import math

import numpy as np
import pandas as pd
import pytest

from trescashape.contact.problem import ProblemData
from trescashape.contact.switching import solve_tresca
from trescashape.exceptions import TrescaShapeException
from trescashape.fem.fields import VectorField
from trescashape.fem.sources import constant_scalar, constant_vector
from trescashape.io.tables import (
    CURVATURE_CSV_COLUMNS,
    curvature_table,
    ellipse_curvature,
    frame_to_csv_text,
    write_contact_csv,
    write_history_csv,
    write_json,
    write_run_info,
)
from trescashape.io.vtk import VTK_HEADER, contact_point_fields, vtk_text, write_boundary_vtk, write_vtk
from trescashape.mesh.frame import mean_curvature
from trescashape.optimizer.uzawa import IterationRecord, OptimHistory
from trescashape.utils.fn import atomic_write_text


def section(lines, keyword, count):
    start = next(i for i, line in enumerate(lines) if line.startswith(keyword))
    return lines[start + 1 : start + 1 + count]


def test_mesh_only_vtk(unit_square):
    text = vtk_text(unit_square)
    lines = text.split("\n")
    assert lines[:5] == [VTK_HEADER, "trescashape", "ASCII", "DATASET UNSTRUCTURED_GRID", "POINTS 25 double"]
    assert lines[5] == "0 0 0"
    assert f"CELLS 32 {4 * 32}" in lines
    assert section(lines, "CELL_TYPES", 32) == ["5"] * 32
    assert "POINT_DATA" not in text
    assert text.endswith("\n") and "\r" not in text


def test_vtk_title_records_mesh_size(unit_square):
    lines = vtk_text(unit_square, title="run\nwith newline", h=0.05).split("\n")
    assert lines[1] == "run with newline h=0.050000000000000003"


def test_zero_solve_writes_zero_displacement(unit_square, tmp_path):
    problem = ProblemData(f=constant_vector(0.0, 0.0), g=constant_scalar(0.3), mu=1.0, lam=1.0)
    u, state = solve_tresca(unit_square, problem)
    fields = contact_point_fields(unit_square, problem, u, state)
    path = write_vtk(unit_square, fields, tmp_path / "solution.vtk")
    lines = path.read_text().split("\n")

    assert "POINT_DATA 25" in lines
    assert "VECTORS displacement double" in lines
    assert section(lines, "VECTORS displacement", 25) == ["0 0 0"] * 25
    assert "SCALARS mode int 1" in lines
    mode = [int(v) for v in section(lines, "SCALARS mode", 26)[1:]]
    tresca = set(unit_square.tresca_nodes.tolist())
    assert all((m == 0) if i in tresca else (m == -1) for i, m in enumerate(mode))
    assert section(lines, "SCALARS g double", 26)[1] == "0.29999999999999999"


def test_vtk_is_byte_reproducible(coarse_ellipse, reference_problem, tmp_path):
    u, state = solve_tresca(coarse_ellipse, reference_problem)
    fields = contact_point_fields(coarse_ellipse, reference_problem, u, state)
    first = write_vtk(coarse_ellipse, fields, tmp_path / "a.vtk", h=0.15).read_bytes()
    second = write_vtk(coarse_ellipse, fields, tmp_path / "b.vtk", h=0.15).read_bytes()
    assert first == second


def test_vtk_rejects_bad_fields(unit_square):
    with pytest.raises(TrescaShapeException):
        vtk_text(unit_square, {"short": np.zeros(3)})
    with pytest.raises(TrescaShapeException):
        vtk_text(unit_square, {"tensor": np.zeros((25, 2, 2))})


def test_boundary_vtk(unit_disk, tmp_path):
    nb = len(unit_disk.boundary_nodes)
    lines = write_boundary_vtk(unit_disk, tmp_path / "boundary.vtk").read_text().split("\n")
    assert lines[3] == "DATASET POLYDATA"
    assert lines[4] == f"POINTS {nb} double"
    assert section(lines, "LINES", nb)[-1] == f"2 {nb - 1} 0"
    assert "SCALARS curvature double 1" in lines
    assert "VECTORS normal double" in lines


def test_csv_text_formatting():
    df = pd.DataFrame({"node": np.array([0, 1], dtype=np.int64), "value": [0.1, -0.0]})
    assert frame_to_csv_text(df) == "node,value\n0,0.10000000000000001\n1,0\n"


def test_contact_csv(coarse_ellipse, reference_problem, tmp_path):
    u, state = solve_tresca(coarse_ellipse, reference_problem)
    path = write_contact_csv(tmp_path / "contact.csv", coarse_ellipse, state)
    lines = path.read_text().split("\n")
    assert lines[0] == "node,x,y,mode,sigma_n,s_tau,g,u_tau"
    assert len(lines) == len(coarse_ellipse.tresca_nodes) + 2
    assert lines[-1] == ""
    table = pd.read_csv(path)
    np.testing.assert_array_equal(table.node.to_numpy(), coarse_ellipse.tresca_nodes)
    np.testing.assert_array_equal(table["mode"].to_numpy(), state.modes)


def test_history_csv(tmp_path):
    history = OptimHistory([IterationRecord(1, -0.5, math.pi, 0.0, 0.0, 2, 31.5), IterationRecord(2, -0.75, 3.0, -0.25, 0.01, 0, 30.0)])
    lines = write_history_csv(tmp_path / "history.csv", history).read_text().split("\n")
    assert lines[0] == "iter,J,volume,multiplier,step,switch_iters,min_angle"
    assert lines[1] == "1,-0.5,3.1415926535897931,0,0,2,31.5"
    assert lines[2] == "2,-0.75,3,-0.25,0.01,0,30"


def test_write_json_with_numpy_values(tmp_path):
    path = write_json(tmp_path / "nested" / "out.json", {"n": np.int64(3), "x": np.float64(0.5), "v": np.arange(2), "p": tmp_path})
    assert json.loads(path.read_text()) == {"n": 3, "x": 0.5, "v": [0, 1], "p": str(tmp_path)}
    with pytest.raises(TypeError):
        write_json(tmp_path / "bad.json", {"s": {1, 2}})


def test_run_info(coarse_ellipse, reference_config, tmp_path):
    path = write_run_info(tmp_path / "run_info.json", "solve", reference_config.to_summary_dict(), coarse_ellipse, h=0.15, energy=-1.0)
    info = json.loads(path.read_text())
    assert info["command"] == "solve"
    assert info["energy"] == -1.0
    assert info["mesh"]["h"] == 0.15
    assert info["mesh"]["n_vertices"] == coarse_ellipse.n_vertices
    assert info["mesh"]["n_dirichlet_nodes"] == len(coarse_ellipse.dirichlet_nodes)
    assert set(info["config"]) == set(reference_config.to_summary_dict())
    assert info["config"]["lambda"] == reference_config.lam


def test_ellipse_curvature_at_vertices():
    a, b = 1.1, 1 / 1.1
    points = np.array([[a, 0.0], [0.0, b], [-a, 0.0]])
    np.testing.assert_allclose(ellipse_curvature(a, b, points), [a / b**2, b / a**2, a / b**2])


def test_curvature_table(coarse_ellipse, reference_config):
    table = curvature_table(coarse_ellipse, reference_config.a, reference_config.b)
    assert list(table.columns) == CURVATURE_CSV_COLUMNS
    assert len(table) == len(coarse_ellipse.boundary_nodes)
    np.testing.assert_array_equal(table.H.to_numpy(), mean_curvature(coarse_ellipse))
    assert np.all(table.H_exact > 0)
    assert np.all(table.rel_error >= 0)


def test_atomic_write_text(tmp_path):
    path = atomic_write_text(tmp_path / "a" / "b.txt", "one\ntwo\n")
    assert path.read_bytes() == b"one\ntwo\n"
    atomic_write_text(path, "three\n")
    assert path.read_text() == "three\n"
    assert sorted(p.name for p in path.parent.iterdir()) == ["b.txt"]


def test_displacement_field_must_match_mesh(unit_square, unit_disk):
    with pytest.raises(TrescaShapeException):
        vtk_text(unit_square, {"displacement": VectorField.zeros(unit_disk)})
