import time
from typing import Optional

from trescashape.utils import logger


class Timer:
    """Wall-clock span; with a description, the elapsed time goes to the run log on exit."""

    def __init__(self, desc: Optional[str] = None):
        self.desc = desc
        self.start = time.perf_counter()
        self.end: Optional[float] = None

    def __enter__(self) -> "Timer":
        self.start = time.perf_counter()
        return self

    def __exit__(self, exc_typ, exc_val, exc_tb):
        self.end = time.perf_counter()
        if self.desc:
            status = "failed after" if exc_typ is not None else "took"
            logger.fs.debug(f"[timer] {self.desc} {status} {self.elapsed:.3f}s")

    @property
    def elapsed(self) -> float:
        return (self.end if self.end is not None else time.perf_counter()) - self.start
