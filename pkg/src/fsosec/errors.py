"""Exception types shared across the package."""


class FsosecError(Exception):
    """Base class for all package-specific errors."""


class ConfigurationError(FsosecError, ValueError):
    """A required ingredient or setting is missing or inconsistent."""


class ScenarioError(ConfigurationError):
    """A scenario document failed to parse or validate.

    Attributes
    ----------
    line : int or None
        1-based line number of the offending construct, when known.
    """

    def __init__(self, message, line=None):
        super().__init__(message)
        self.line = line


class NumericalError(FsosecError, RuntimeError):
    """A numerical procedure failed to reach its accuracy target."""


class SeriesConvergenceError(NumericalError):
    """A series summation hit its term limit before the tail rule fired."""

    def __init__(self, message, best_estimate=None, terms_used=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.terms_used = terms_used


class QuadratureError(NumericalError):
    """Adaptive quadrature exhausted its subdivision budget.

    Carries the best available estimate and its error bound.
    """

    def __init__(self, message, best_estimate=None, err_est=None):
        super().__init__(message)
        self.best_estimate = best_estimate
        self.err_est = err_est
