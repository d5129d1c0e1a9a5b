from trescashape.mesh.mesh import BoundaryTag, Mesh, MeshQuality, area, deform, mesh_quality
from trescashape.mesh.frame import BoundaryFrame, boundary_frame, mean_curvature
from trescashape.mesh.generators import generate_ellipse_mesh, generate_rectangle_mesh

__all__ = [
    "BoundaryTag",
    "Mesh",
    "MeshQuality",
    "area",
    "deform",
    "mesh_quality",
    "BoundaryFrame",
    "boundary_frame",
    "mean_curvature",
    "generate_ellipse_mesh",
    "generate_rectangle_mesh",
]
