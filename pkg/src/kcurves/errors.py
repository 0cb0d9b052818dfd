"""Exception types raised across the package."""


class NumericalError(RuntimeError):
    """A factorization or eigensolve failed even after jitter escalation."""

    def __init__(self, message, jitter=None):
        super().__init__(message)
        self.jitter = jitter


class PrecisionError(RuntimeError):
    """An adaptive sum could not reach its requested relative tolerance."""


class ConvergenceError(RuntimeError):
    """An iterative solver hit its iteration cap."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class FitError(ValueError):
    """A fit window holds too few usable points."""


class ParseError(ValueError):
    """Malformed dataset file."""


class ConfigError(ValueError):
    """Invalid experiment configuration."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class BreakdownError(ArithmeticError):
    """A closed-form approximation left its domain of validity."""
