from typing import Any, Dict, FrozenSet, List, Optional, Sequence

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NONCONVERGENCE = 3
EXIT_STALL = 4


class TrescaShapeException(Exception):
    exit_code = EXIT_CONFIG

    def pretty_print_str(self):
        err = f"[bold][red]{type(self).__name__}: {str(self)}[/red][/bold]"
        return err


class BadConfigException(TrescaShapeException):
    pass


class ExpressionSyntaxException(BadConfigException):
    def __init__(self, message: str, offset: int, expected: FrozenSet[str], text: str = ""):
        super().__init__(f"{message} at byte {offset} (expected one of: {', '.join(sorted(expected))})")
        self.offset = offset
        self.expected = frozenset(expected)
        self.text = text

    def pretty_print_str(self):
        err = f"[red][bold]:x: ExpressionSyntaxException:[/bold] {str(self)}[/red]"
        if self.text:
            err += f"\n[bright_black]{self.text}\n{' ' * len(self.text.encode('utf-8')[: self.offset].decode('utf-8', 'ignore'))}^[/bright_black]"
        return err


class DataEvaluationException(TrescaShapeException):
    """Raised when f, g or a parsed expression cannot be evaluated (division by zero, sqrt of a negative, g <= 0)."""


class MeshException(TrescaShapeException):
    pass


class DeformationException(MeshException):
    def __init__(self, message: str, triangle_index: int, max_step: float):
        super().__init__(message)
        self.triangle_index = triangle_index
        self.max_step = max_step

    def pretty_print_str(self):
        err = f"[red][bold]:x: DeformationException:[/bold] {str(self)}[/red]"
        err += f"\n[bold][red]Triangle {self.triangle_index} inverts; largest admissible step is {self.max_step:.6g}.[/red][/bold]"
        return err


class AssemblyException(TrescaShapeException):
    pass


class ConstraintException(TrescaShapeException):
    pass


class LinearSolverException(TrescaShapeException):
    exit_code = EXIT_NONCONVERGENCE

    def __init__(self, message: str, residual: float):
        super().__init__(message)
        self.residual = residual


class SwitchingNonConvergenceException(TrescaShapeException):
    exit_code = EXIT_NONCONVERGENCE

    def __init__(self, message: str, partition_history: Sequence[Any]):
        super().__init__(message)
        self.partition_history = list(partition_history)

    def pretty_print_str(self):
        err = f"[red][bold]:x: SwitchingNonConvergenceException:[/bold] {str(self)}[/red]"
        err += f"\n[bold][red]Last partitions visited: {len(self.partition_history)} (see log file for the full trace).[/red][/bold]"
        return err


class ActiveSetNonConvergenceException(TrescaShapeException):
    exit_code = EXIT_NONCONVERGENCE

    def __init__(self, message: str, trace: List[Dict[str, Any]]):
        super().__init__(message)
        self.trace = trace


class DeformationStallException(TrescaShapeException):
    exit_code = EXIT_STALL

    def __init__(self, message: str, history: Optional[Any] = None):
        super().__init__(message)
        self.history = history

    def pretty_print_str(self):
        err = f"[red][bold]:x: DeformationStallException:[/bold] {str(self)}[/red]"
        if self.history is not None:
            err += f"\n[bold][red]Optimization stalled after {len(self.history)} iterations.[/red][/bold]"
        return err
