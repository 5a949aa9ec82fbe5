"""Exception types raised by the solvers."""


class ProxpenError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(ProxpenError, ValueError):
    """A point lies outside the effective domain of the convex part."""


class NumericalError(ProxpenError, ArithmeticError):
    """Non-finite values or a certificate inconsistent beyond rounding."""


class ConvergenceError(ProxpenError):
    """An iteration cap was reached before the stopping rule held."""


class DivergenceError(ProxpenError):
    """The objective dropped below the configured floor (unbounded below)."""


class CalibrationError(ProxpenError, ValueError):
    """The requested curvature pair cannot be produced from the drawn data."""
