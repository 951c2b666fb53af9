"""
Exception hierarchy shared by the noise-model packages
"""

from typing import Optional


class TclQemError(Exception):
    """Base class for all errors raised by the library"""


class DomainError(TclQemError, ValueError):
    """An argument lies outside the domain of the operation"""


class BasisValidationError(TclQemError, ValueError):
    """A two-qubit state or multiplet basis violates normalization or orthonormality"""


class ConsistencyError(TclQemError, RuntimeError):
    """An internal identity that must hold to tolerance did not"""


class ConvergenceError(TclQemError, ArithmeticError):
    """Adaptive quadrature ran out of subdivisions before meeting its tolerance"""

    def __init__(self, message: str, estimate: float, error_bound: float):
        super().__init__(message)
        self.estimate = estimate
        self.error_bound = error_bound


class InversionError(TclQemError, ArithmeticError):
    """A population matrix is singular or too ill-conditioned to invert"""

    def __init__(self, message: str, smallest_singular_value: float, condition_number: float):
        super().__init__(message)
        self.smallest_singular_value = smallest_singular_value
        self.condition_number = condition_number


class CountsParseError(TclQemError, ValueError):
    """A counts file does not follow the record schema"""

    def __init__(self, message: str, line: Optional[int] = None, field: Optional[str] = None):
        location = []
        if line is not None:
            location.append(f"line {line}")
        if field is not None:
            location.append(f"field '{field}'")
        if location:
            message = f"{message} ({', '.join(location)})"
        super().__init__(message)
        self.line = line
        self.field = field


class UsageError(TclQemError, ValueError):
    """Command-line arguments or configuration values are invalid"""
