import os
import tempfile
from concurrent.futures import ThreadPoolExecutor, as_completed
from pathlib import Path

from rich.progress import BarColumn, MofNCompleteColumn, Progress, SpinnerColumn, TextColumn, TimeElapsedColumn
from typing import Callable, Iterable, List, Optional, Tuple, Union, TypeVar

from trescashape.utils import logger

PathLike = Union[str, Path]
T = TypeVar("T")
R = TypeVar("R")


def do_parallel(
    func: Callable[[T], R], args_list: Iterable[T], n: int = -1, desc: Optional[str] = None, return_args: bool = True
) -> List[Union[Tuple[T, R], R]]:
    """Map func over args_list on a thread pool; results are in input order. A description shows a transient bar."""
    args_list = list(args_list)
    if not args_list:
        return []
    n_workers = len(args_list) if n == -1 else max(1, n)
    results: List[Optional[R]] = [None] * len(args_list)

    with Progress(
        SpinnerColumn(), TextColumn(desc or ""), BarColumn(), MofNCompleteColumn(), TimeElapsedColumn(), disable=desc is None, transient=True
    ) as progress:
        task = progress.add_task("", total=len(args_list))
        with ThreadPoolExecutor(max_workers=n_workers) as executor:
            futures = {executor.submit(func, args): i for i, args in enumerate(args_list)}
            for future in as_completed(futures):
                i = futures[future]
                try:
                    results[i] = future.result()
                except Exception as e:
                    logger.fs.error(f"[do_parallel] {getattr(func, '__name__', func)}({args_list[i]!r}) failed: {e}")
                    raise
                progress.update(task, advance=1)
    return list(zip(args_list, results)) if return_args else results


def atomic_write_text(path: PathLike, text: str) -> Path:
    """Write text with LF endings to a temp file next to path, then rename over it."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=str(path.parent))
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        if os.path.exists(tmp_name):
            os.unlink(tmp_name)
        raise
    return path
