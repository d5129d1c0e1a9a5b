"""Legacy ASCII VTK output. Floats use 17 significant digits and -0.0 is written as 0."""
import numpy as np
from pathlib import Path
from typing import TYPE_CHECKING, Dict, List, Mapping, Optional, Union

from trescashape.exceptions import TrescaShapeException
from trescashape.fem.fields import VectorField
from trescashape.fem.sources import evaluate_scalar
from trescashape.mesh.frame import boundary_frame
from trescashape.mesh.mesh import Mesh
from trescashape.utils.definitions import FLOAT_FMT
from trescashape.utils.fn import PathLike, atomic_write_text

if TYPE_CHECKING:
    from trescashape.contact.problem import ProblemData
    from trescashape.contact.state import ContactState

VTK_HEADER = "# vtk DataFile Version 3.0"
VTK_CELL_TRIANGLE = 5
VTK_CELL_LINE = 3
OFF_CONTACT_MODE = -1

PointField = Union[VectorField, np.ndarray]


def _float_rows(values: np.ndarray) -> List[str]:
    values = np.asarray(values, dtype=float) + 0.0
    if values.ndim == 1:
        return [FLOAT_FMT % v for v in values]
    return [" ".join(FLOAT_FMT % v for v in row) for row in values]


def _pad_z(xy: np.ndarray) -> np.ndarray:
    return np.hstack([xy, np.zeros((len(xy), 1))])


def _title(title: str, h: Optional[float]) -> str:
    line = title if h is None else f"{title} h={FLOAT_FMT % h}"
    return line.replace("\n", " ")[:255]


def _point_data(n_points: int, fields: Mapping[str, PointField]) -> List[str]:
    if not fields:
        return []
    lines = [f"POINT_DATA {n_points}"]
    for name, field in fields.items():
        values = field.values if isinstance(field, VectorField) else np.asarray(field)
        if len(values) != n_points:
            raise TrescaShapeException(f"field {name!r} has {len(values)} values, expected {n_points}")
        if values.ndim == 2 and values.shape[1] == 2:
            lines.append(f"VECTORS {name} double")
            lines.extend(_float_rows(_pad_z(values)))
        elif values.ndim == 1 and np.issubdtype(values.dtype, np.integer):
            lines.append(f"SCALARS {name} int 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(str(int(v)) for v in values)
        elif values.ndim == 1:
            lines.append(f"SCALARS {name} double 1")
            lines.append("LOOKUP_TABLE default")
            lines.extend(_float_rows(values))
        else:
            raise TrescaShapeException(f"field {name!r} must be nodal scalars (n,) or vectors (n, 2), got shape {values.shape}")
    return lines


def vtk_text(mesh: Mesh, fields: Optional[Mapping[str, PointField]] = None, title: str = "trescashape", h: Optional[float] = None) -> str:
    n, m = mesh.n_vertices, mesh.n_triangles
    lines = [VTK_HEADER, _title(title, h), "ASCII", "DATASET UNSTRUCTURED_GRID", f"POINTS {n} double"]
    lines.extend(_float_rows(_pad_z(mesh.vertices)))
    lines.append(f"CELLS {m} {4 * m}")
    lines.extend(f"3 {i} {j} {k}" for i, j, k in mesh.triangles)
    lines.append(f"CELL_TYPES {m}")
    lines.extend([str(VTK_CELL_TRIANGLE)] * m)
    lines.extend(_point_data(n, fields or {}))
    return "\n".join(lines) + "\n"


def write_vtk(
    mesh: Mesh, fields: Optional[Mapping[str, PointField]], path: PathLike, title: str = "trescashape", h: Optional[float] = None
) -> Path:
    """Triangles as an UNSTRUCTURED_GRID; (n, 2) fields become VECTORS with z = 0, (n,) fields SCALARS."""
    return atomic_write_text(path, vtk_text(mesh, fields, title=title, h=h))


def write_boundary_vtk(mesh: Mesh, path: PathLike, title: str = "trescashape boundary", h: Optional[float] = None) -> Path:
    """The boundary loop as POLYDATA lines with edge-loop order, node tags, normals and curvature."""
    frame = boundary_frame(mesh)
    nb = len(frame.nodes)
    lines = [VTK_HEADER, _title(title, h), "ASCII", "DATASET POLYDATA", f"POINTS {nb} double"]
    lines.extend(_float_rows(_pad_z(mesh.vertices[frame.nodes])))
    lines.append(f"LINES {nb} {3 * nb}")
    lines.extend(f"2 {k} {(k + 1) % nb}" for k in range(nb))
    fields = {
        "node": frame.nodes.astype(np.int64),
        "tag": mesh.boundary_node_tags.astype(np.int64),
        "curvature": frame.curvature,
        "normal": frame.normals,
        "tangent": frame.tangents,
    }
    lines.extend(_point_data(nb, fields))
    return atomic_write_text(path, "\n".join(lines) + "\n")


def contact_point_fields(mesh: Mesh, problem: "ProblemData", u: VectorField, state: "ContactState") -> Dict[str, PointField]:
    """displacement, g, sigma_n, s_tau and mode per vertex; traction scalars are 0 and mode is -1 off the Tresca boundary."""
    sigma_n = np.zeros(mesh.n_vertices)
    s_tau = np.zeros(mesh.n_vertices)
    mode = np.full(mesh.n_vertices, OFF_CONTACT_MODE, dtype=np.int64)
    sigma_n[state.nodes] = state.sigma_n
    s_tau[state.nodes] = state.s_tau
    mode[state.nodes] = state.modes
    return {
        "displacement": u,
        "g": evaluate_scalar(problem.g, mesh.vertices),
        "sigma_n": sigma_n,
        "s_tau": s_tau,
        "mode": mode,
    }
