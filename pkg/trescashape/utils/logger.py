import atexit
import sys
from datetime import datetime
from functools import partial
from pathlib import Path
from types import SimpleNamespace
from typing import Optional, TextIO

from rich import print as rprint
from rich.markup import escape

from trescashape.utils.definitions import is_debug_env, log_file_path

log_file: Optional[TextIO] = None
log_path: Optional[Path] = None

LEVEL_COLORS = {"DEBUG": "cyan", "INFO": "white", "WARN": "yellow", "ERROR": "red"}


def close_log_file():
    global log_file, log_path
    if log_file is not None and not log_file.closed:
        log_file.close()
    log_file, log_path = None, None


def open_log_file(filename=None, session: str = "") -> Path:
    """Append to the run log (TRESCASHAPE_LOG_FILE by default), marking the start of a session."""
    global log_file, log_path
    path = Path(filename) if filename is not None else log_file_path
    if log_file is not None and log_path == path:
        return path
    close_log_file()
    path.parent.mkdir(parents=True, exist_ok=True)
    log_file, log_path = open(path, "a", encoding="utf-8"), path
    log_file.write(f"--- {datetime.now().isoformat(timespec='seconds')} trescashape {session}".rstrip() + "\n")
    log_file.flush()
    return path


atexit.register(close_log_file)


def log(msg, LEVEL="INFO", write_to_file=True, write_to_stderr=True, *args, **kwargs):
    if args or kwargs:
        msg = msg.format(*args, **kwargs)
    level = LEVEL.upper()
    prefix = f"[{level}]".ljust(7)
    stamp = datetime.now().strftime("%H:%M:%S.%f")[:-3]
    if write_to_file and log_file is not None:
        log_file.write(f"{stamp} {prefix} {msg}\n")
        log_file.flush()
    if write_to_stderr:
        color = LEVEL_COLORS.get(level, "white")
        rprint(f"[bright_black]{stamp}[/] [{color}]{escape(prefix)} {escape(str(msg))}[/]", file=sys.stderr)


def exception(msg, print_traceback=True, write_to_file=False, write_to_stderr=True):
    log(f"Exception: {msg}", LEVEL="ERROR", write_to_file=write_to_file, write_to_stderr=write_to_stderr)
    if print_traceback:
        import traceback

        if write_to_file and log_file is not None:
            traceback.print_exc(file=log_file)
            log_file.flush()
        if write_to_stderr:
            traceback.print_exc()


debug = partial(log, LEVEL="DEBUG")
info = partial(log, LEVEL="INFO")
warning = partial(log, LEVEL="WARN")
error = partial(log, LEVEL="ERROR")


def _file_channel(echo: bool) -> SimpleNamespace:
    return SimpleNamespace(
        debug=partial(log, LEVEL="DEBUG", write_to_stderr=echo),
        info=partial(log, LEVEL="INFO", write_to_stderr=echo),
        warning=partial(log, LEVEL="WARN", write_to_stderr=echo),
        error=partial(log, LEVEL="ERROR", write_to_stderr=echo),
        exception=partial(exception, write_to_file=True, write_to_stderr=echo),
    )


# solver internals: log file only, echoed to stderr with TRESCASHAPE_DEBUG=1
fs = _file_channel(is_debug_env)
