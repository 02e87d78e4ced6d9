"""Exception types raised across the package."""


class GreedyError(Exception):
    """Base class for all package errors."""


class DomainError(GreedyError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateAtomError(GreedyError):
    """A selected atom has zero norm, so the step size is undefined."""


class GapSignError(GreedyError):
    """The exact oracle value is nonnegative, so a multiplicative quality is undefined."""


class UnsupportedError(GreedyError):
    """The requested computation is not implemented for this input."""


class ConvergenceError(GreedyError):
    """An inner solver hit its iteration cap.

    The best residual seen is kept on the exception so callers can decide
    whether the answer is still usable.
    """

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class SchemaError(GreedyError, ValueError):
    """A JSON document does not match the expected layout."""
