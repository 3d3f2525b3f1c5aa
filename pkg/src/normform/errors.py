"""Exception taxonomy shared across the package."""


class NormformError(Exception):
    """Base class for all package errors."""


class PrecisionExhausted(NormformError):
    """Interval arithmetic could not certify the requested radius."""


class ZeroElement(NormformError):
    """Operation undefined for the zero element."""


class NotGalois(NormformError):
    """A root of the defining polynomial is not expressible in the field."""


class NotTotallyComplex(NormformError):
    """The defining polynomial has a real root."""


class NotAUnit(NormformError):
    """Element does not have norm +-1."""


class NotInSpan(NormformError):
    """Unit is not in the span of the supplied generators."""


class RankDefect(NormformError):
    """A matrix fails a required rank condition."""


class RankConditionFailed(NormformError):
    """The column-subset rank hypothesis fails; carries a witness subset."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class DegenerateCoefficient(NormformError):
    """A coefficient that must be nonzero is zero."""


class MatchingUnavailable(NormformError):
    """The structural hypothesis for pair matching fails."""


class MissingNormalClosure(NormformError):
    """Non-Galois base field supplied without a normal-closure bundle."""


class CapExceeded(NormformError):
    """An enumeration exceeded its configured point cap."""


class BudgetExceeded(NormformError):
    """A search exceeded its configured budget."""


class InvalidInput(NormformError):
    """Preconditions of an operation are violated."""


class UnsupportedProblem(NormformError):
    """No pipeline covers the requested problem shape."""


class ParseError(NormformError):
    """Malformed bundle or problem document; message names the path."""


class ValidationError(NormformError):
    """A named validation check failed; carries a witness."""

    def __init__(self, message, failures=None):
        super().__init__(message)
        self.failures = failures or []
