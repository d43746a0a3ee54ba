"""Exception hierarchy.

Numerical failures that mean "this instance is degenerate, we refuse to
guess" derive from :class:`InstabilityError`; the CLI maps them to exit
code 3.
"""


class FloquetLRRError(Exception):
    """Base class for all package errors."""


class ConfigError(FloquetLRRError, ValueError):
    """Malformed operator/divisor file or invalid parameters."""


class InstabilityError(FloquetLRRError):
    """A numerical decision could not be made reliably."""


class RankUnstableError(InstabilityError):
    def __init__(self, message, singular_values=None):
        super().__init__(message)
        self.singular_values = singular_values


class FermiSurfaceNotFiniteError(InstabilityError):
    """Refined zeros of A(k) do not form a finite set."""


class EigenvalueOnContourError(InstabilityError):
    pass


class BasisDegenerationError(InstabilityError):
    """Projected basis vectors became (nearly) dependent: shrink the neighborhood."""


class UndeterminedOrderError(InstabilityError):
    """Every Taylor layer up to the requested order vanished."""


class WindowOverflowError(FloquetLRRError):
    """Reconstruction requested outside the exactness window of the grid."""


class SearchExhaustedError(InstabilityError):
    pass


class SpectralMarginError(FloquetLRRError):
    """Zero is not separated from the spectrum by the required margin."""


class PerronError(FloquetLRRError):
    """Operator is outside the class where a positive Bloch solution exists."""


class SingularSystemError(InstabilityError):
    pass
