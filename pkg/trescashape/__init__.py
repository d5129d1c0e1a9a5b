from pathlib import Path

from trescashape import exceptions
from trescashape.config import RunConfig, load_config
from trescashape.contact import ContactState, ProblemData, energy, solve_tresca
from trescashape.mesh import Mesh, area, deform, generate_ellipse_mesh, generate_rectangle_mesh
from trescashape.optimizer import OptimConfig, OptimizationHook, run_optimization
from trescashape.shape import descent_direction, shape_gradient_boundary, shape_gradient_volume, solve_material_derivative

__version__ = "0.1.0"
__root__ = Path(__file__).parent.parent
__all__ = [
    "__version__",
    "__root__",
    # modules
    "exceptions",
    # API
    "ContactState",
    "Mesh",
    "OptimConfig",
    "OptimizationHook",
    "ProblemData",
    "RunConfig",
    "area",
    "deform",
    "descent_direction",
    "energy",
    "generate_ellipse_mesh",
    "generate_rectangle_mesh",
    "load_config",
    "run_optimization",
    "shape_gradient_boundary",
    "shape_gradient_volume",
    "solve_material_derivative",
    "solve_tresca",
]
