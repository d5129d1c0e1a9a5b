import io
import json
from datetime import datetime
from pathlib import Path

import numpy as np
import pandas as pd
from typing import Any, Dict, Optional

from trescashape.contact.state import CONTACT_CSV_COLUMNS, ContactState
from trescashape.mesh.frame import mean_curvature
from trescashape.mesh.mesh import Mesh, area, mesh_quality
from trescashape.optimizer.uzawa import HISTORY_CSV_COLUMNS, OptimHistory
from trescashape.shape.fd_check import GRAD_CHECK_COLUMNS
from trescashape.shape.gradient import ShapeGradientReport
from trescashape.utils.definitions import FLOAT_FMT
from trescashape.utils.fn import PathLike, atomic_write_text

CURVATURE_CSV_COLUMNS = ["node", "x", "y", "H", "H_exact", "rel_error"]


def frame_to_csv_text(df: pd.DataFrame) -> str:
    """Header row, then rows with LF endings and 17 significant digits; -0.0 prints as 0."""
    df = df.copy()
    for column in df.columns:
        if pd.api.types.is_float_dtype(df[column]):
            df[column] = df[column] + 0.0
    buf = io.StringIO()
    df.to_csv(buf, index=False, float_format=FLOAT_FMT, lineterminator="\n")
    return buf.getvalue()


def write_csv(df: pd.DataFrame, path: PathLike) -> Path:
    return atomic_write_text(path, frame_to_csv_text(df))


def write_contact_csv(path: PathLike, mesh: Mesh, state: ContactState) -> Path:
    return write_csv(state.to_frame(mesh)[CONTACT_CSV_COLUMNS], path)


def write_history_csv(path: PathLike, history: OptimHistory) -> Path:
    return write_csv(history.to_frame()[HISTORY_CSV_COLUMNS], path)


def write_grad_check_csv(path: PathLike, table: pd.DataFrame) -> Path:
    return write_csv(table[GRAD_CHECK_COLUMNS], path)


def ellipse_curvature(a: float, b: float, points: np.ndarray) -> np.ndarray:
    """Exact curvature of (a cos γ, b sin γ) at points on it: ab / (a² sin² γ + b² cos² γ)^(3/2)."""
    gamma = np.arctan2(points[:, 1] / b, points[:, 0] / a)
    return a * b / (a**2 * np.sin(gamma) ** 2 + b**2 * np.cos(gamma) ** 2) ** 1.5


def curvature_table(mesh: Mesh, a: float, b: float) -> pd.DataFrame:
    """Discrete boundary curvature against the exact ellipse curvature at every boundary node."""
    nodes = mesh.boundary_nodes
    points = mesh.vertices[nodes]
    H = mean_curvature(mesh)
    H_exact = ellipse_curvature(a, b, points)
    return pd.DataFrame(
        {
            "node": nodes.astype(np.int64),
            "x": points[:, 0],
            "y": points[:, 1],
            "H": H,
            "H_exact": H_exact,
            "rel_error": np.abs(H - H_exact) / np.abs(H_exact),
        },
        columns=CURVATURE_CSV_COLUMNS,
    )


def write_curvature_csv(path: PathLike, table: pd.DataFrame) -> Path:
    return write_csv(table[CURVATURE_CSV_COLUMNS], path)


def _json_default(value: Any):
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


def write_json(path: PathLike, payload: Dict[str, Any]) -> Path:
    return atomic_write_text(path, json.dumps(payload, indent=2, default=_json_default) + "\n")


def write_report_json(path: PathLike, report: ShapeGradientReport) -> Path:
    return atomic_write_text(path, report.to_json())


def mesh_summary(mesh: Mesh, h: Optional[float] = None) -> Dict[str, Any]:
    return {
        "h": h,
        "h_mean": mesh.h_mean,
        "n_vertices": mesh.n_vertices,
        "n_triangles": mesh.n_triangles,
        "n_tresca_nodes": int(len(mesh.tresca_nodes)),
        "n_dirichlet_nodes": int(len(mesh.dirichlet_nodes)),
        "area": area(mesh),
        "min_angle_deg": float(np.degrees(mesh_quality(mesh).min_angle)),
    }


def write_run_info(path: PathLike, command: str, config: Dict[str, Any], mesh: Mesh, h: Optional[float] = None, **extra) -> Path:
    """Provenance record of one CLI run: command, configuration and the mesh it ran on."""
    from trescashape import __version__

    payload = {
        "command": command,
        "version": __version__,
        "created": datetime.now().isoformat(timespec="seconds"),
        "mesh": mesh_summary(mesh, h),
        "config": config,
    }
    payload.update(extra)
    return write_json(path, payload)
