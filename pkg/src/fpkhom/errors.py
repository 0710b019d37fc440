"""Exception hierarchy shared by the solvers and the CLI."""


class FpkError(Exception):
    """Base class for all package errors."""


class ConfigurationError(FpkError, ValueError):
    """Invalid user input: unknown problem name, bad mesh size, missing data."""


class EvaluationError(FpkError, ArithmeticError):
    """A pointwise coefficient evaluation is undefined."""


class InvalidCoefficientError(EvaluationError):
    """Coefficients violate a structural assumption (e.g. non-positive trace)."""


class SolveError(FpkError, RuntimeError):
    """A linear solve failed or did not reach the requested residual."""

    def __init__(self, message, residual=float("nan")):
        super().__init__(message)
        self.residual = residual


class InvalidInvariantError(FpkError, RuntimeError):
    """A computed invariant measure cannot be normalized."""
