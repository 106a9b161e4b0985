from typing import Optional

from .defaults import EXIT_CODES


class ToolkitError(Exception):
    """Base exception class for all toolkit errors.

    Every specialized error carries the operation that failed so CLI output
    and logs point at the step, not just the symptom.

    Attributes:
        message (str): The error message
        operation (str): The toolkit operation that failed
        details (str): Extra diagnostic text (optional)
        duration (float): Time taken before the error occurred (optional)
    """

    exit_code: int = EXIT_CODES["runtime"]

    def __init__(
        self,
        message: str,
        operation: str,
        details: Optional[str] = None,
        duration: Optional[float] = None,
    ):
        self.message = message
        self.operation = operation
        self.details = details
        self.duration = duration
        super().__init__(self.format_message())

    def format_message(self) -> str:
        full_message = self.message + f"\nOperation: {self.operation}"
        if self.duration is not None:
            full_message += f"\nDuration: {self.duration:.4f}s"
        if self.details:
            full_message += f"\nDetails:\n{self.details}"
        return full_message


class ParameterError(ToolkitError, ValueError):
    """Sequence, requirement or scenario parameters violate their invariants."""

    exit_code = EXIT_CODES["config"]


class AssumptionError(ToolkitError, ValueError):
    """The standing assumption |v|·N < 1 does not hold for the request."""

    exit_code = EXIT_CODES["config"]


class ConfigError(ToolkitError):
    exit_code = EXIT_CODES["config"]


class InfeasibleDesignError(ToolkitError):
    """No parameter satisfies the design requirements."""

    exit_code = EXIT_CODES["infeasible"]


class FormatError(ToolkitError):
    """Malformed CSV or binary input."""

    exit_code = EXIT_CODES["runtime"]
