"""Exception types raised across the package."""


class JCPacketsError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(JCPacketsError, ValueError):
    pass


class TruncationError(InvalidArgumentError):
    """Photon-number truncation leaves too much probability mass behind."""


class AliasingError(InvalidArgumentError):
    """A sampling grid is too coarse for the content it must represent."""


class InconsistentInputError(InvalidArgumentError):
    pass


class CoverageError(InvalidArgumentError):
    """A requested frequency lies outside the band of a spectrum."""


class NumericalError(JCPacketsError, ArithmeticError):
    """Base class for failures of a numerical procedure (CLI exit code 3)."""


class AccuracyNotReachedError(NumericalError):
    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class SolverError(NumericalError):
    def __init__(self, message, condition=None, residual=None):
        super().__init__(message)
        self.condition = condition
        self.residual = residual


class ConfigError(JCPacketsError):
    """Invalid run configuration; ``path`` names the offending field."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path
