"""Exception hierarchy. CLI exit codes are keyed off these classes."""


class CasimirError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(CasimirError, ValueError):
    """Invalid configuration or argument outside its validated range."""


class ConvergenceError(CasimirError):
    """A quadrature or Matsubara summation did not reach its tolerance."""


class CancellationError(ConvergenceError):
    """Thermal correction smaller than its own error estimate."""


class RegimeError(CasimirError, ValueError):
    """Temperatures requested outside the regime where a fit is valid."""


class FitError(CasimirError):
    """Least-squares fit rejected (too few points, poor linearity, bad signs)."""
