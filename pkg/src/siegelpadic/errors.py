"""Exception types raised across the package."""


class SiegelPadicError(Exception):
    """Base class for every error raised by this package."""


class UnsupportedDegree(SiegelPadicError):
    pass


class NonPositiveDefinite(SiegelPadicError):
    pass


class BoundTooSmall(SiegelPadicError):
    pass


class ConductorNotDividing(SiegelPadicError):
    pass


class BudgetExceeded(SiegelPadicError):
    pass


class ParityMismatch(SiegelPadicError):
    pass


class InsufficientTruncation(SiegelPadicError):
    pass


class DegreeMismatch(SiegelPadicError):
    pass


class IrrationalExponent(SiegelPadicError):
    pass


class FactorisationFailed(SiegelPadicError):
    pass


class NotPLocal(SiegelPadicError):
    pass


class PDividesLevel(SiegelPadicError):
    pass


class ZeroSatakeParam(SiegelPadicError):
    pass


class MissingPlugin(SiegelPadicError):
    pass


class NotSpecialValue(SiegelPadicError):
    pass


class ZeroDenominator(SiegelPadicError):
    pass


class NotAUnit(SiegelPadicError):
    pass


class WildPartUnsupported(SiegelPadicError):
    pass


class PrecisionTooLow(SiegelPadicError):
    pass


class IncompatibleSystem(SiegelPadicError):
    """Raised with the first violating ``(i, j, y)`` triple as ``witness``."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConstantTermPresent(SiegelPadicError):
    pass


class BadPrime(SiegelPadicError):
    pass


class ConductorNotCoprime(SiegelPadicError):
    pass


class NotBounded(SiegelPadicError):
    pass


class TruncationGap(SiegelPadicError):
    pass


class ExcludedSpecialValue(SiegelPadicError):
    pass


class NotOrdinary(SiegelPadicError):
    pass


class LoadError(SiegelPadicError):
    """Malformed or inconsistent input file."""


class NonOrdinaryWarning(UserWarning):
    """lambda_0 is not a p-adic unit; the stabilisation is still computed."""


class VanishingTruncationWarning(UserWarning):
    """Every computed coefficient of a stabilised form is zero."""


class ProjectionContractViolation(SiegelPadicError):
    """A projection polynomial does not reduce to |sigma|^beta at sigma' = 0."""
