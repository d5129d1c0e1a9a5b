from trescashape.io.tables import (
    CURVATURE_CSV_COLUMNS,
    curvature_table,
    frame_to_csv_text,
    write_contact_csv,
    write_curvature_csv,
    write_grad_check_csv,
    write_history_csv,
    write_json,
    write_report_json,
    write_run_info,
)
from trescashape.io.vtk import contact_point_fields, vtk_text, write_boundary_vtk, write_vtk

__all__ = [
    "CURVATURE_CSV_COLUMNS",
    "contact_point_fields",
    "curvature_table",
    "frame_to_csv_text",
    "vtk_text",
    "write_boundary_vtk",
    "write_contact_csv",
    "write_curvature_csv",
    "write_grad_check_csv",
    "write_history_csv",
    "write_json",
    "write_report_json",
    "write_run_info",
    "write_vtk",
]
