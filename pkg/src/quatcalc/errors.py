"""Exception types shared across the package."""


class CalcError(Exception):
    """Base class for all computational errors raised by this package."""


class DomainError(CalcError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class SingularityError(DomainError):
    """Evaluation was requested on, or too near, a singular sphere."""


class SpectralProximityError(DomainError):
    """A spectral parameter is too close to the S-spectrum.

    Carries the measured distance so callers can report an actionable margin.
    """

    def __init__(self, message, distance=None):
        super().__init__(message)
        self.distance = distance


class AdmissibilityError(DomainError):
    """A measure fails the exponential-moment admissibility test."""


class SlowConvergenceError(DomainError):
    """A convergence margin is too small for certified truncation."""


class UnsupportedMeasureError(CalcError, ValueError):
    """A measure combination has no exact representation in the catalog."""


class QuadratureError(CalcError, RuntimeError):
    """Numerical integration could not reach the requested tolerance.

    ``estimate`` holds the best error estimate available at failure time.
    """

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class RangeError(CalcError, OverflowError):
    """An argument exceeds a configured overflow guard."""
