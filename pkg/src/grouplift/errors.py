"""Exception hierarchy shared by every module.

The CLI maps these onto exit codes: argument/config problems exit 1, data
problems exit 2, numerical failures exit 3.
"""


class GroupliftError(Exception):
    """Base class for all package errors."""


class ArgumentError(GroupliftError, ValueError):
    """A caller-supplied argument is out of range or inconsistent."""


class ShapeError(GroupliftError, ValueError):
    """Array dimensions do not line up."""


class DataError(GroupliftError, ValueError):
    """Input data is malformed or degenerate."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class DegenerateDataError(DataError):
    """Data admits no meaningful statistic (constant column, coincident points)."""


class GenerationError(DataError):
    """A synthetic dataset spec cannot be realised."""


class NumericError(GroupliftError, ArithmeticError):
    """Non-finite input where finite values are required."""


class TrainingError(GroupliftError, RuntimeError):
    """Training diverged or produced non-finite quantities."""
