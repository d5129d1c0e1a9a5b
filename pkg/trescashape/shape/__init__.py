from trescashape.shape.derivative_data import DerivativeData, derivative_data, p_theta, xi_m
from trescashape.shape.descent import descent_direction, h1_norm
from trescashape.shape.fd_check import fd_gradient_check, material_derivative_fd_errors, random_direction
from trescashape.shape.gradient import (
    LinearShapeFunctional,
    ShapeGradientReport,
    boundary_form_functional,
    shape_gradient_boundary,
    shape_gradient_report,
    shape_gradient_volume,
    volume_form_functional,
)
from trescashape.shape.material import ShapeDerivative, shape_derivative, solve_material_derivative

__all__ = [
    "DerivativeData",
    "LinearShapeFunctional",
    "ShapeDerivative",
    "ShapeGradientReport",
    "boundary_form_functional",
    "derivative_data",
    "descent_direction",
    "fd_gradient_check",
    "h1_norm",
    "material_derivative_fd_errors",
    "p_theta",
    "random_direction",
    "shape_derivative",
    "shape_gradient_boundary",
    "shape_gradient_report",
    "shape_gradient_volume",
    "solve_material_derivative",
    "volume_form_functional",
    "xi_m",
]
