import pytest

from trescashape.config import RunConfig
from trescashape.contact.problem import ProblemData
from trescashape.fem.sources import constant_scalar, constant_vector
from trescashape.mesh.generators import generate_ellipse_mesh, generate_rectangle_mesh


@pytest.fixture
def unit_square():
    """4 x 4 cells on [0, 1]^2, clamped on the left side."""
    return generate_rectangle_mesh(1.0, 1.0, 4, 4, dirichlet_sides=("left",))


@pytest.fixture
def unit_disk():
    return generate_ellipse_mesh(1.0, 1.0, 0.2, [], require_dirichlet=False)


@pytest.fixture(scope="session")
def reference_config():
    return RunConfig()


@pytest.fixture
def coarse_ellipse(reference_config):
    return generate_ellipse_mesh(reference_config.a, reference_config.b, 0.15, reference_config.dirichlet_arcs)


@pytest.fixture
def reference_problem(reference_config):
    return reference_config.problem_data()


@pytest.fixture
def square_problem():
    return ProblemData(f=constant_vector(0.0, -1.0), g=constant_scalar(0.3), mu=1.0, lam=1.0)
