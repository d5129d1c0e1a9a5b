from trescashape.fem.assembly import assemble_elasticity, assemble_h1_metric, assemble_load, write_matrix_market
from trescashape.fem.calculus import BoundaryCalculus, boundary_field_calculus, nodal_gradients
from trescashape.fem.fields import TractionField, VectorField
from trescashape.fem.sources import constant_scalar, constant_vector
from trescashape.fem.system import SparseSystem, solve_constrained
from trescashape.fem.traction import boundary_traction, nodal_residual

__all__ = [
    "BoundaryCalculus",
    "SparseSystem",
    "TractionField",
    "VectorField",
    "assemble_elasticity",
    "assemble_h1_metric",
    "assemble_load",
    "boundary_field_calculus",
    "boundary_traction",
    "constant_scalar",
    "constant_vector",
    "nodal_gradients",
    "nodal_residual",
    "solve_constrained",
    "write_matrix_market",
]
