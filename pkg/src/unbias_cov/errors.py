"""Exception hierarchy shared by all estimators."""

from __future__ import annotations


class UnbiasCovError(ValueError):
    """Base class for every error raised by this package."""


class InvalidSeries(UnbiasCovError):
    """Sample values or weights violate the series invariants."""


class AllWeightsZero(InvalidSeries):
    pass


class DegenerateWeights(UnbiasCovError):
    """Effective sample size is at most one; (sum w)^2 <= sum w^2."""


class LengthMismatch(UnbiasCovError):
    pass


class NumericalResidue(UnbiasCovError):
    """An inverse FFT left an imaginary part above tolerance."""


class LagOutOfRange(UnbiasCovError):
    pass


class InvalidRange(UnbiasCovError):
    pass


class RangeMismatch(UnbiasCovError):
    pass


class EmptyOverlap(UnbiasCovError):
    """No positive weight product exists at a requested lag."""

    def __init__(self, lag: int):
        super().__init__(f"no overlapping positive weights at lag {lag}")
        self.lag = lag


class SingularMatrix(UnbiasCovError):
    def __init__(self, message: str, rcond: float | None = None):
        super().__init__(message)
        self.rcond = rcond


class IllConditioned(SingularMatrix):
    pass


class InvalidConfig(UnbiasCovError):
    pass
