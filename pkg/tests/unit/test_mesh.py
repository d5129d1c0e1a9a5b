import math

import numpy as np
import pytest

from trescashape.exceptions import BadConfigException, DeformationException, MeshException
from trescashape.fem.fields import VectorField
from trescashape.mesh.generators import generate_ellipse_mesh, generate_rectangle_mesh
from trescashape.mesh.mesh import BoundaryTag, Mesh, area, deform, mesh_quality, relax_interior

REFERENCE_ARCS = [(2 * math.pi / 3, 4 * math.pi / 3), (5 * math.pi / 3, 7 * math.pi / 3)]


def single_triangle(p2=(0.0, 1.0)):
    return Mesh.from_arrays([[0.0, 0.0], [1.0, 0.0], list(p2)], [[0, 1, 2]], [[0, 1], [1, 2], [2, 0]], [BoundaryTag.TRESCA] * 3)


def test_triangle_area():
    assert area(single_triangle()) == 0.5


def test_reference_ellipse_area():
    mesh = generate_ellipse_mesh(1.1, 1.0 / 1.1, 0.05, REFERENCE_ARCS)
    assert area(mesh) == pytest.approx(math.pi, rel=1e-2)
    assert area(mesh) < math.pi  # inscribed polygon


def test_unit_disk_area():
    mesh = generate_ellipse_mesh(1.0, 1.0, 0.1, [], require_dirichlet=False)
    assert area(mesh) == pytest.approx(math.pi, rel=2e-2)


def test_area_converges_under_refinement():
    errors = [abs(area(generate_ellipse_mesh(1.1, 1.0 / 1.1, h, [], require_dirichlet=False)) - math.pi) for h in (0.2, 0.1, 0.05)]
    assert errors[0] > errors[1] > errors[2]


def test_boundary_nodes_on_ellipse():
    mesh = generate_ellipse_mesh(1.1, 1.0 / 1.1, 0.1, REFERENCE_ARCS)
    x = mesh.vertices[mesh.boundary_nodes]
    np.testing.assert_allclose((x[:, 0] / 1.1) ** 2 + (x[:, 1] * 1.1) ** 2, 1.0, atol=1e-12)
    assert mesh.n_triangles > 0 and np.all(mesh.triangle_areas > 0)


def test_dirichlet_arcs_tag_nodes():
    mesh = generate_ellipse_mesh(1.1, 1.0 / 1.1, 0.1, REFERENCE_ARCS)
    x = mesh.vertices
    gamma = lambda nodes: np.mod(np.arctan2(x[nodes, 1] * 1.1, x[nodes, 0] / 1.1), 2 * math.pi)

    g_t = gamma(mesh.tresca_nodes)
    assert np.all(((g_t > math.pi / 3) & (g_t < 2 * math.pi / 3)) | ((g_t > 4 * math.pi / 3) & (g_t < 5 * math.pi / 3)))

    g_d = gamma(mesh.dirichlet_nodes)
    in_first = (g_d >= 2 * math.pi / 3 - 1e-9) & (g_d <= 4 * math.pi / 3 + 1e-9)
    in_second = (g_d >= 5 * math.pi / 3 - 1e-9) | (g_d <= math.pi / 3 + 1e-9)
    assert np.all(in_first | in_second)
    assert len(mesh.tresca_nodes) + len(mesh.dirichlet_nodes) == len(mesh.boundary_nodes)


def test_junction_nodes_are_dirichlet(unit_square):
    # corners (0, 0) and (0, 1) touch one clamped and one friction edge
    corners = [0, 4 * 5]
    assert np.all(unit_square.dirichlet_mask[corners])
    assert not np.any(np.isin(corners, unit_square.tresca_nodes))
    assert len(unit_square.dirichlet_nodes) == 5


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(a=0.0, b=1.0, h=0.1, dirichlet_arcs=REFERENCE_ARCS),
        dict(a=1.0, b=1.0, h=1.5, dirichlet_arcs=REFERENCE_ARCS),
        dict(a=1.0, b=1.0, h=0.2, dirichlet_arcs=[(0.0, 2 * math.pi)]),
        dict(a=1.0, b=1.0, h=0.2, dirichlet_arcs=[]),
        dict(a=1.0, b=1.0, h=0.2, dirichlet_arcs=[(1.0, 0.5)]),
    ],
)
def test_bad_ellipse_parameters(kwargs):
    with pytest.raises(BadConfigException):
        generate_ellipse_mesh(**kwargs)


def test_bad_rectangle_parameters():
    with pytest.raises(BadConfigException):
        generate_rectangle_mesh(1.0, 1.0, 2, 2, dirichlet_sides=("front",))
    with pytest.raises(BadConfigException):
        generate_rectangle_mesh(1.0, 1.0, 2, 2, dirichlet_sides=())


def test_invalid_meshes():
    with pytest.raises(MeshException):
        # clockwise triangle
        Mesh.from_arrays([[0.0, 0.0], [0.0, 1.0], [1.0, 0.0]], [[0, 1, 2]], [[0, 1], [1, 2], [2, 0]], [1, 1, 1])
    with pytest.raises(MeshException):
        # loop traversed clockwise
        Mesh.from_arrays([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]], [[0, 2], [2, 1], [1, 0]], [1, 1, 1])
    with pytest.raises(MeshException):
        # open loop
        Mesh.from_arrays([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]], [[0, 1, 2]], [[0, 1], [1, 2], [0, 1]], [1, 1, 1])


def test_deform_zero_step_is_identity(unit_square):
    theta = VectorField.on(unit_square, np.where(unit_square.dirichlet_mask[:, None], 0.0, 1.0) * np.ones((unit_square.n_vertices, 2)))
    moved = deform(unit_square, theta, 0.0)
    np.testing.assert_array_equal(moved.vertices, unit_square.vertices)
    assert moved.token != unit_square.token


def test_deform_scaling_and_translation(unit_disk):
    scaled = deform(unit_disk, VectorField.on(unit_disk, unit_disk.vertices), 0.1)
    assert area(scaled) == pytest.approx(1.21 * area(unit_disk), rel=1e-12)

    shift = VectorField.on(unit_disk, np.tile([0.3, -0.2], (unit_disk.n_vertices, 1)))
    assert area(deform(unit_disk, shift, 1.0)) == pytest.approx(area(unit_disk), rel=1e-12)


def test_deform_rejects_motion_of_clamped_nodes(unit_square):
    with pytest.raises(MeshException):
        deform(unit_square, VectorField.on(unit_square, np.ones((unit_square.n_vertices, 2))), 0.1)


def test_deform_inversion_reports_max_step():
    mesh = single_triangle()
    theta = VectorField.on(mesh, [[0.0, 0.0], [0.0, 0.0], [0.0, -1.0]])
    with pytest.raises(DeformationException) as e:
        deform(mesh, theta, 2.0)
    assert e.value.triangle_index == 0
    assert e.value.max_step == pytest.approx(1.0, abs=1e-9)
    assert e.value.max_step < 1.0
    assert area(deform(mesh, theta, 0.5)) == pytest.approx(0.25)


def test_mesh_quality():
    equilateral = single_triangle((0.5, math.sqrt(3.0) / 2.0))
    quality = mesh_quality(equilateral)
    assert quality.min_angle == pytest.approx(math.pi / 3, rel=1e-12)
    assert quality.max_aspect_ratio == pytest.approx(1.0, rel=1e-12)

    assert mesh_quality(single_triangle()).min_angle == pytest.approx(math.pi / 4, rel=1e-12)

    sliver = single_triangle((0.5, 1e-14))
    assert mesh_quality(sliver).min_angle < 1e-6


def test_rectangle_mesh(unit_square):
    assert unit_square.n_vertices == 25
    assert unit_square.n_triangles == 32
    assert area(unit_square) == pytest.approx(1.0, rel=1e-14)
    assert unit_square.h_mean == pytest.approx(0.25)


def test_deform_round_trip(coarse_ellipse):
    rng = np.random.default_rng(5)
    values = np.where(coarse_ellipse.dirichlet_mask[:, None], 0.0, rng.uniform(-1.0, 1.0, (coarse_ellipse.n_vertices, 2)))
    t = 0.05 * coarse_ellipse.h_mean
    moved = deform(coarse_ellipse, VectorField.on(coarse_ellipse, values), t)
    back = deform(moved, VectorField.on(moved, -values), t)
    np.testing.assert_allclose(back.vertices, coarse_ellipse.vertices, rtol=0, atol=1e-12)
    assert area(back) == pytest.approx(area(coarse_ellipse), rel=1e-12)


def test_relax_interior_restores_structured_grid(unit_square):
    rng = np.random.default_rng(2)
    interior = ~unit_square.boundary_mask
    shaken = unit_square.vertices.copy()
    shaken[interior] += rng.uniform(-0.05, 0.05, (int(interior.sum()), 2))
    perturbed = unit_square.with_vertices(shaken)

    relaxed = relax_interior(perturbed)
    # every interior node of the split grid sits at the mean of its six neighbors
    np.testing.assert_allclose(relaxed.vertices, unit_square.vertices, atol=1e-12)
    assert mesh_quality(relaxed).min_angle > mesh_quality(perturbed).min_angle
    assert area(relaxed) == pytest.approx(area(perturbed), rel=1e-12)


def test_relax_interior_never_lowers_quality(coarse_ellipse):
    relaxed = relax_interior(coarse_ellipse)
    np.testing.assert_array_equal(relaxed.vertices[coarse_ellipse.boundary_nodes], coarse_ellipse.vertices[coarse_ellipse.boundary_nodes])
    assert mesh_quality(relaxed).min_angle >= mesh_quality(coarse_ellipse).min_angle
