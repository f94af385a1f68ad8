"""Semantic exception hierarchy shared across the package."""


class HdcltError(Exception):
    """Base class for all package-specific errors."""


class NotPositiveDefinite(HdcltError):
    """A Cholesky pivot fell below tolerance."""


class DimensionMismatch(HdcltError):
    """Operands have incompatible dimensions."""


class DegenerateRectangle(HdcltError):
    """A negative enlargement crossed lower past upper."""


class DegenerateSigma(HdcltError):
    """A formula dividing by sigma_* received sigma_* <= 0."""


class BadMomentOrder(HdcltError):
    """Moment order q outside the supported range (q >= 4)."""


class ZeroVariance(HdcltError):
    """A coordinate variance needed for standardization is zero."""


class BadDiagonal(HdcltError):
    """Anti-concentration probe requires all variances >= 1."""


class NonDiagonalSigma(HdcltError):
    """Analytic smoothing path requires a diagonal covariance."""


class OrderTooHigh(HdcltError):
    """Requested mixed-derivative order exceeds the supported cap."""


class BudgetExceeded(HdcltError):
    """The d**v index-tuple budget for a derivative sum is infeasible."""


class ConfigInvalid(HdcltError):
    """Experiment configuration failed validation."""


class IoFailure(HdcltError):
    """A result file could not be written."""
