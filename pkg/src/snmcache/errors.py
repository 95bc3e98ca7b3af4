"""Exception hierarchy shared by the analytics, simulator and CLI."""


class SnmError(Exception):
    """Base class for all package errors."""


class ModelError(SnmError, ValueError):
    """Invalid or degenerate traffic model."""


class DegenerateInputError(SnmError, ValueError):
    """Input that leaves nothing to measure (e.g. an empty post-warmup trace)."""


class NumericsError(SnmError, ArithmeticError):
    """A quadrature or root search did not reach the requested accuracy.

    ``partial`` carries the best estimate available when the failure happened.
    """

    def __init__(self, message, partial=None, abserr=None):
        super().__init__(message)
        self.partial = partial
        self.abserr = abserr


class ConfigError(SnmError, ValueError):
    """Config parse/validation failure; ``path`` is the dotted field path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
