from typing import Optional, Sequence

import click
import typer

from trescashape.cli.cli_check import curvature_check, grad_check, oracle_check
from trescashape.cli.cli_optimize import optimize
from trescashape.cli.cli_solve import solve
from trescashape.exceptions import EXIT_CONFIG, EXIT_OK
from trescashape.utils import logger

app = typer.Typer(name="trescashape", add_completion=False)
app.command(
    name="solve",
    help="Solve the Tresca friction problem once and write VTK and contact CSV",
)(solve)
app.command(
    name="optimize",
    help="Run the volume-constrained shape optimization",
)(optimize)
app.command(
    name="grad-check",
    help="Finite-difference validation of the shape gradient",
)(grad_check)
app.command(
    name="curvature-check",
    help="Discrete against exact boundary curvature of the ellipse",
)(curvature_check)
app.command(
    name="oracle-check",
    help="Switching solver against projected gradient on a coarse square",
)(oracle_check)


@app.callback()
def main(ctx: typer.Context):
    """Shape optimization of an elastic body with Tresca friction."""
    logger.open_log_file(session=ctx.invoked_subcommand or "")


# typer may run on a vendored click; its ClickException is the one its commands raise
TYPER_CLICK_EXCEPTION = next(c for c in typer.BadParameter.__mro__ if c.__name__ == "ClickException")
CLICK_EXCEPTIONS = tuple({TYPER_CLICK_EXCEPTION, click.ClickException})
EXIT_EXCEPTIONS = tuple({typer.Exit, click.exceptions.Exit})
ABORT_EXCEPTIONS = tuple({typer.Abort, click.exceptions.Abort})


def run_cli(argv: Optional[Sequence[str]] = None) -> int:
    """Run a subcommand in-process and return its exit code."""
    command = typer.main.get_command(app)
    try:
        result = command.main(args=list(argv) if argv is not None else None, prog_name="trescashape", standalone_mode=False)
    except EXIT_EXCEPTIONS as e:
        return e.exit_code
    except CLICK_EXCEPTIONS as e:
        e.show()
        return EXIT_CONFIG
    except ABORT_EXCEPTIONS:
        return EXIT_CONFIG
    return EXIT_OK if result is None else int(result)


typer_click_object = typer.main.get_command(app)

if __name__ == "__main__":
    app()
