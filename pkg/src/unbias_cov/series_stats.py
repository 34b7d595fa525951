"""Weighted scalar statistics of a single equidistantly sampled series.

Weights are per-sample multipliers; a zero weight masks the sample. No
routine here divides by an individual weight, so masked samples are safe.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import AllWeightsZero, DegenerateWeights, InvalidSeries, LengthMismatch
from .structures import CovarianceFunction, _frozen_array


@dataclass(frozen=True)
class WeightedSeries:
    """Sample values ``x_i`` with nonnegative weights ``w_i`` at times ``i * dt``.

    ``weights`` defaults to all ones.
    """

    values: np.ndarray
    weights: np.ndarray | None = None
    dt: float = 1.0

    def __post_init__(self):
        values = _frozen_array(self.values)
        weights = np.ones_like(values) if self.weights is None else self.weights
        weights = _frozen_array(weights)
        if values.ndim != 1 or weights.ndim != 1:
            raise InvalidSeries("values and weights must be one-dimensional")
        if values.shape != weights.shape:
            raise LengthMismatch(
                f"{values.size} values but {weights.size} weights"
            )
        if values.size < 2:
            raise InvalidSeries(f"need at least 2 samples, got {values.size}")
        if not np.all(np.isfinite(values)):
            raise InvalidSeries("values must be finite")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvalidSeries("weights must be finite and nonnegative")
        npos = int(np.count_nonzero(weights > 0))
        if npos == 0:
            raise AllWeightsZero("all weights are zero")
        if npos < 2:
            raise InvalidSeries("at least two weights must be positive")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise InvalidSeries(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class MeanFreeSeries:
    """Values after removal of an estimated mean, with the source weights.

    Instances built by :func:`demean` have zero weighted mean. The constructor
    itself does not enforce that, so hand-built sequences can be fed to the
    correlation sums as they are.
    """

    values: np.ndarray
    weights: np.ndarray
    mean_estimate: float = 0.0
    dt: float = 1.0

    def __post_init__(self):
        values = _frozen_array(self.values)
        weights = _frozen_array(self.weights)
        if values.ndim != 1 or values.shape != weights.shape:
            raise LengthMismatch(
                f"{values.size} values but {weights.size} weights"
            )
        if not np.all(np.isfinite(values)):
            raise InvalidSeries("values must be finite")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise InvalidSeries("weights must be finite and nonnegative")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "mean_estimate", float(self.mean_estimate))
        object.__setattr__(self, "dt", float(self.dt))

    def __len__(self) -> int:
        return self.values.size


def _weight_sum(weights: np.ndarray) -> float:
    total = float(np.sum(weights))
    if total <= 0:
        raise AllWeightsZero("sum of weights is zero")
    return total


def weighted_mean(series: WeightedSeries) -> float:
    """Return ``sum(w x) / sum(w)``."""
    return float(np.sum(series.weights * series.values)) / _weight_sum(series.weights)


def demean(series: WeightedSeries) -> MeanFreeSeries:
    mean = weighted_mean(series)
    return MeanFreeSeries(series.values - mean, series.weights, mean, series.dt)


def naive_variance(mf: MeanFreeSeries) -> float:
    """Weighted mean square of the mean-free values, ``sum(w x~^2) / sum(w)``.

    Biased low by the variance of the mean estimator.
    """
    return float(np.sum(mf.weights * mf.values**2)) / _weight_sum(mf.weights)


def bessel_variance_independent(mf: MeanFreeSeries) -> float:
    """Unbiased variance for independent samples with arbitrary weights.

    ``sum(w) / (sum(w)^2 - sum(w^2)) * sum(w x~^2)``, which for equal weights
    is the familiar ``sum(x~^2) / (N - 1)``.

    Raises
    ------
    DegenerateWeights
        If ``sum(w)^2 <= sum(w^2)``, i.e. fewer than two effective samples.
    """
    w = mf.weights
    sw = _weight_sum(w)
    denom = sw * sw - float(np.sum(w * w))
    if not denom > 0:
        raise DegenerateWeights(
            f"(sum w)^2 - sum w^2 = {denom:.6g}; effective sample size <= 1"
        )
    return sw / denom * float(np.sum(w * mf.values**2))


def weight_overlap(weights: np.ndarray, k: int) -> float:
    """``sum_i w_i w_{i+k}`` over indices inside the series."""
    n = weights.size
    k = abs(int(k))
    if k >= n:
        return 0.0
    return float(np.dot(weights[: n - k], weights[k:]))


def mean_estimator_variance(weights, cov: CovarianceFunction) -> float:
    """Variance of the weighted mean for a series with auto-covariance ``cov``.

    The double sum ``sum_ij w_i w_j C_{j-i} / (sum w)^2`` is evaluated by
    grouping equal lags, ``sum_k Y_k C_k / (sum w)^2``, in O(N K). Lags
    outside the window of ``cov`` contribute nothing.
    """
    w = np.asarray(weights, dtype=float)
    sw = _weight_sum(w)
    n = w.size
    lo = max(cov.k1, -(n - 1))
    hi = min(cov.k2, n - 1)
    if lo > hi:
        return 0.0
    lags = np.arange(lo, hi + 1)
    overlaps = np.array([weight_overlap(w, k) for k in lags])
    return float(np.sum(overlaps * cov.values[lags - cov.k1])) / (sw * sw)


def corrected_variance_correlated(s2: float, sigma_mean2: float) -> float:
    """Add back the power removed together with the estimated mean."""
    return s2 + sigma_mean2
