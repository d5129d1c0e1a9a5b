from contextlib import contextmanager
from pathlib import Path
from typing import Optional

import typer
from rich.console import Console

from trescashape.config import RunConfig, load_config
from trescashape.exceptions import EXIT_CONFIG, TrescaShapeException
from trescashape.utils import logger

console = Console()


def print_header():
    header = r"""  _                            _
 | |_ _ _ ___ ___ __ __ _   __| |_  __ _ _ __  ___
 |  _| '_/ -_|_-</ _/ _` | (_-< ' \/ _` | '_ \/ -_)
  \__|_| \___/__/\__\__,_| /__/_||_\__,_| .__/\___|
                                        |_|"""
    console.print(f"[bright_black]{header}[/bright_black]\n")


def print_stats_completed(what: str, runtime_s: float, out_dir: Optional[Path] = None):
    console.print(f"\n:white_check_mark: [bold green]{what} completed successfully[/bold green]")
    line = f"[white]Runtime:[/white] [bright_black]{runtime_s:.2f}s[/bright_black]"
    if out_dir is not None:
        line += f", [white]outputs in[/white] [bright_black]{out_dir}[/bright_black]"
    console.print(line)


def load_run_config(
    config_path: Optional[Path],
    out: Optional[Path] = None,
    seed: Optional[int] = None,
    h: Optional[float] = None,
    max_iters: Optional[int] = None,
) -> RunConfig:
    """Config file (or the built-in defaults) with command-line overrides applied."""
    cfg = load_config(config_path) if config_path is not None else RunConfig()
    cfg = cfg.with_overrides(out=str(out) if out is not None else None, seed=seed, h=h, max_iters=max_iters)
    logger.fs.info(f"[load_run_config] {cfg.to_summary_dict()}")
    return cfg


def one_line(e: BaseException) -> str:
    return f"{type(e).__name__}: {' '.join(str(e).split())}"


@contextmanager
def exit_on_error(command: str):
    """Map package errors to their exit code with a single diagnostic line on stderr."""
    try:
        yield
    except TrescaShapeException as e:
        logger.fs.exception(f"{command} failed: {e}")
        typer.secho(one_line(e), fg="red", err=True)
        raise typer.Exit(e.exit_code)
    except OSError as e:
        logger.fs.exception(f"{command} failed: {e}")
        typer.secho(one_line(e), fg="red", err=True)
        raise typer.Exit(EXIT_CONFIG)


def out_dir(cfg: RunConfig) -> Path:
    path = Path(cfg.out)
    path.mkdir(parents=True, exist_ok=True)
    return path
