"""Exception types raised across the package."""


class NormsolError(Exception):
    """Base class for all package errors."""


class ParameterError(NormsolError, ValueError):
    """Problem data outside the admissible range."""


class InvalidResolution(NormsolError, ValueError):
    pass


class GridMismatch(NormsolError, ValueError):
    pass


class DomainError(NormsolError, ValueError):
    """A field takes values outside the domain of a nonlinearity."""


class SingularityError(DomainError):
    """The unregularized singular term is evaluated at a vanishing node."""


class RegimeError(NormsolError, ValueError):
    """Exponents do not satisfy a * p > 2, so the geometry constants do not exist."""


class CannotNormalize(NormsolError, ValueError):
    pass


class WitnessFailure(NormsolError):
    pass


class ConvergenceError(NormsolError, RuntimeError):
    pass


class LineSearchStall(NormsolError, RuntimeError):
    """Armijo backtracking underflowed; ``result`` holds the best iterate."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result


class GeometryInadmissible(NormsolError):
    """g(t0) <= 0 at the requested mass; no solve is attempted."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class ConfigError(NormsolError, ValueError):
    pass
