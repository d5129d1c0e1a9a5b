import os
from pathlib import Path

# every float written to CSV, VTK or config text uses 17 significant digits
FLOAT_FMT = "%.17g"

is_debug_env = os.environ.get("TRESCASHAPE_DEBUG", None) == "1"

tmp_log_dir = Path("/tmp/trescashape")
log_file_path = Path(os.environ.get("TRESCASHAPE_LOG_FILE", str(tmp_log_dir / "run.log")))


def format_float(value: float) -> str:
    return FLOAT_FMT % value
