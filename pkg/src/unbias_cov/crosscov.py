"""Cross-covariance of two weighted series, raw and bias-corrected.

Lag ``k`` pairs sample ``i`` of the first series with sample ``i + k`` of the
second; a positive lag therefore means the second series lags behind. Each
series is demeaned with its own weights.
"""

from __future__ import annotations

from dataclasses import dataclass

from .autocov import BiasMatrix, correct, cross_bias_entries, expected_estimate, raw_from_sums
from .errors import InvalidSeries
from .series_stats import MeanFreeSeries, WeightedSeries, demean
from .spectral import correlation_sums_direct, correlation_sums_fft
from .structures import CovarianceFunction, LagRange


@dataclass(frozen=True)
class SeriesPair:
    s1: WeightedSeries
    s2: WeightedSeries

    def __post_init__(self):
        if self.s1.dt != self.s2.dt:
            raise InvalidSeries(f"sampling intervals differ: {self.s1.dt} vs {self.s2.dt}")

    @property
    def dt(self) -> float:
        return self.s1.dt

    def demeaned(self) -> tuple[MeanFreeSeries, MeanFreeSeries]:
        return demean(self.s1), demean(self.s2)


def estimate_raw_cross(
    mf1: MeanFreeSeries, mf2: MeanFreeSeries, lag_range: LagRange, method: str = "fft"
) -> CovarianceFunction:
    """``c_k = X_k / Y_k`` for the pair on ``lag_range`` (within ``[-(N1-1), N2-1]``)."""
    lag_range.check(len(mf1), len(mf2), strict=False)
    sums = correlation_sums_fft if method == "fft" else correlation_sums_direct
    x, y = sums(mf1, mf2)
    return raw_from_sums(x, y, lag_range, mf1.weights, mf2.weights, mf1.dt)


def bias_matrix_cross(weights1, weights2, lag_range: LagRange, method: str = "fft") -> BiasMatrix:
    """``a_kj = delta_kj + Y_j/(W1 W2) - G_kj/(Y_k W2) - H_kj/(Y_k W1)``."""
    return BiasMatrix(lag_range, cross_bias_entries(weights1, weights2, lag_range, method))


def correct_cross(c: CovarianceFunction, a: BiasMatrix, refine: bool = False) -> CovarianceFunction:
    return correct(c, a, refine)


expected_estimate_cross = expected_estimate


def bias_epsilon_cross(c_true: CovarianceFunction, weights1, weights2, lag_range: LagRange):
    a = bias_matrix_cross(weights1, weights2, lag_range)
    c_true = c_true.restrict(lag_range)
    expected = expected_estimate(c_true, a)
    return CovarianceFunction(
        lag_range.k1, lag_range.k2, expected.values - c_true.values, c_true.dt
    )


@dataclass(frozen=True)
class CrosscovEstimate:
    raw: CovarianceFunction
    matrix: BiasMatrix | None
    corrected: CovarianceFunction | None


def analyze_cross(pair: SeriesPair, lag_range: LagRange, correct_bias: bool = True) -> CrosscovEstimate:
    lag_range.check(len(pair.s1), len(pair.s2), strict=correct_bias)
    mf1, mf2 = pair.demeaned()
    raw = estimate_raw_cross(mf1, mf2, lag_range)
    if not correct_bias:
        return CrosscovEstimate(raw, None, None)
    a = bias_matrix_cross(pair.s1.weights, pair.s2.weights, lag_range)
    return CrosscovEstimate(raw, a, correct(raw, a))
