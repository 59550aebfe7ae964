"""Exception types shared across the library."""


class MahlerError(Exception):
    """Base class for all library errors."""


class PolyParseError(MahlerError):
    """Malformed polynomial expression."""


class ExprParseError(MahlerError):
    """Malformed number/surd expression."""


class ZeroPolynomialError(MahlerError):
    """Operation requires a nonzero polynomial."""


class UnsupportedDegreeError(MahlerError):
    """A field degree exceeds the configured cap; callers may fall back to
    bounds-only results."""


class NonGaloisFieldError(MahlerError):
    """Operation requires the base field to be Galois over Q."""


class BranchSearchError(MahlerError):
    """No root-of-unity branch satisfied the required product identity."""


class UndecidedComparisonError(MahlerError):
    """Enclosure comparison still undecided at the iteration cap."""


class RadMembershipError(MahlerError):
    """A factor is not in rad(K) for the relevant field K."""


class IsolationError(MahlerError):
    """Certified root isolation failed (precision ladder exhausted)."""
