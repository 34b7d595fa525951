"""Auto-covariance estimation with removal of the mean-estimation bias.

The raw estimator normalises each lag by its own weight overlap,

    c_k = sum_i w_i w_{i+k} x~_i x~_{i+k} / sum_i w_i w_{i+k} = X_k / Y_k,

and is biased because the mean was estimated from the same data. Its
expectation is linear in the true covariance over the lag window,
``E{c} = A C``, so the bias-free estimate solves ``A c_hat = c``.

The bias matrix machinery is shared with the cross-covariance case: the
auto-covariance matrix is the cross-covariance matrix of a series with
itself.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import NamedTuple

import numpy as np

from . import linalg
from .errors import EmptyOverlap
from .series_stats import (
    MeanFreeSeries,
    WeightedSeries,
    _weight_sum,
    corrected_variance_correlated,
    demean,
    mean_estimator_variance,
    naive_variance,
)
from .spectral import (
    PaddedPair,
    _bins,
    circular_xcorr,
    correlation_sums_direct,
    correlation_sums_fft,
    gh_rows,
)
from .structures import CovarianceFunction, LagRange


@dataclass(frozen=True)
class BiasMatrix:
    """``entries[k - k1, j - k1] = a_kj`` for lags ``k, j`` in ``lag_range``."""

    lag_range: LagRange
    entries: np.ndarray

    def __post_init__(self):
        e = np.array(self.entries, dtype=float)
        n = self.lag_range.size
        if e.shape != (n, n):
            raise ValueError(f"bias matrix shape {e.shape} does not match {n} lags")
        if not np.all(np.isfinite(e)):
            raise ValueError("bias matrix has non-finite entries")
        e.setflags(write=False)
        object.__setattr__(self, "entries", e)

    @cached_property
    def factorization(self) -> linalg.Factorization:
        return linalg.factorize(self.entries)

    @property
    def rcond(self) -> float:
        return self.factorization.rcond

    def __matmul__(self, other):
        return self.entries @ other


def _positive_overlap_counts(w1: np.ndarray, w2: np.ndarray) -> np.ndarray:
    # exact integer counts of i with w1_i > 0 and w2_{i+k} > 0, in bin order
    ind = circular_xcorr(PaddedPair.build((w1 > 0).astype(float), (w2 > 0).astype(float)))
    return np.rint(ind).astype(np.int64)


def _require_overlap(w1, w2, lag_range: LagRange) -> None:
    counts = _positive_overlap_counts(w1, w2)[_bins(lag_range.lags, w1.size, w2.size)]
    empty = np.flatnonzero(counts == 0)
    if empty.size:
        raise EmptyOverlap(int(lag_range.k1 + empty[0]))


def raw_from_sums(x, y, lag_range: LagRange, w1, w2, dt: float) -> CovarianceFunction:
    _require_overlap(w1, w2, lag_range)
    xk = x.window(lag_range.k1, lag_range.k2)
    yk = y.window(lag_range.k1, lag_range.k2)
    return CovarianceFunction(lag_range.k1, lag_range.k2, xk / yk, dt)


def estimate_raw(
    mf: MeanFreeSeries, lag_range: LagRange, method: str = "fft"
) -> CovarianceFunction:
    """Overlap-normalised auto-covariance on ``lag_range``.

    Any window inside ``[-(N-1), N-1]`` is accepted; use ``method="direct"``
    for the O(N^2) summation.

    Raises
    ------
    InvalidRange
        If the window extends beyond the data.
    EmptyOverlap
        If some lag has no pair of positively weighted samples.
    """
    n = len(mf)
    lag_range.check(n, strict=False)
    sums = correlation_sums_fft if method == "fft" else correlation_sums_direct
    x, y = sums(mf, mf)
    return raw_from_sums(x, y, lag_range, mf.weights, mf.weights, mf.dt)


def _cross_entries_fft(w1, w2, lag_range: LagRange) -> np.ndarray:
    n1, n2 = w1.size, w2.size
    lags = lag_range.lags
    sw1, sw2 = _weight_sum(w1), _weight_sum(w2)
    y = circular_xcorr(PaddedPair.build(w1, w2))
    cols = _bins(lags, n1, n2)
    yk = y[cols]
    g, h = gh_rows(w1, w2, lags)
    g, h = g[:, cols], h[:, cols]
    a = np.eye(lags.size) + yk[None, :] / (sw1 * sw2)
    a -= g / (yk[:, None] * sw2)
    a -= h / (yk[:, None] * sw1)
    return a


def _cross_entries_direct(w1, w2, lag_range: LagRange) -> np.ndarray:
    n1, n2 = w1.size, w2.size
    sw1, sw2 = _weight_sum(w1), _weight_sum(w2)
    lags = lag_range.lags
    a = np.zeros((lags.size, lags.size))
    for r, k in enumerate(lags):
        lo, hi = max(0, -k), min(n1, n2 - k)
        yk = float(np.dot(w1[lo:hi], w2[lo + k : hi + k]))
        for c, j in enumerate(lags):
            lo_j, hi_j = max(0, -j), min(n1, n2 - j)
            yj = float(np.dot(w1[lo_j:hi_j], w2[lo_j + j : hi_j + j]))
            i = np.arange(max(0, -j, -k), min(n1, n2 - j, n2 - k))
            g = float(np.sum(w1[i] * w2[i + j] * w2[i + k]))
            i = np.arange(max(0, -j, k - j), min(n1, n2 - j, n1 + k - j))
            h = float(np.sum(w1[i] * w2[i + j] * w1[i + j - k]))
            a[r, c] = (k == j) - g / (yk * sw2) - h / (yk * sw1) + yj / (sw1 * sw2)
    return a


def cross_bias_entries(w1, w2, lag_range: LagRange, method: str = "fft") -> np.ndarray:
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    lag_range.check(w1.size, w2.size, strict=False)
    _require_overlap(w1, w2, lag_range)
    if method == "fft":
        return _cross_entries_fft(w1, w2, lag_range)
    return _cross_entries_direct(w1, w2, lag_range)


def bias_matrix(weights, lag_range: LagRange, method: str = "fft") -> BiasMatrix:
    """Matrix ``A`` with ``E{c_k} = sum_j a_kj C_j`` for the auto-covariance.

    ``a_kj = delta_{kj} + Y_j / W^2 - (G_kj + H_kj) / (Y_k W)`` with
    ``W = sum w``. The matrix can be assembled on any window with nonzero
    overlaps, but it is invertible only on windows strictly inside
    ``[-(N-1), N-1]``.
    """
    w = np.asarray(weights, dtype=float)
    return BiasMatrix(lag_range, cross_bias_entries(w, w, lag_range, method))


def correct(c: CovarianceFunction, a: BiasMatrix, refine: bool = False) -> CovarianceFunction:
    """Bias-free estimate ``c_hat`` solving ``A c_hat = c``."""
    c.require_range(a.lag_range)
    vals = linalg.solve(a.factorization, c.values, refine=refine)
    return CovarianceFunction(c.k1, c.k2, vals, c.dt)


def expected_estimate(c_true: CovarianceFunction, a: BiasMatrix) -> CovarianceFunction:
    """Expectation ``A C`` of the raw estimator for true covariance ``C``."""
    c_true.require_range(a.lag_range)
    return CovarianceFunction(c_true.k1, c_true.k2, a.entries @ c_true.values, c_true.dt)


def bias_epsilon(c_true: CovarianceFunction, weights, lag_range: LagRange) -> CovarianceFunction:
    """Predicted bias ``E{c_k} - C_k`` of the raw auto-covariance."""
    a = bias_matrix(weights, lag_range)
    c_true = c_true.restrict(lag_range) if c_true.lag_range != lag_range else c_true
    expected = expected_estimate(c_true, a)
    return CovarianceFunction(lag_range.k1, lag_range.k2, expected.values - c_true.values, c_true.dt)


class VarianceEstimate(NamedTuple):
    s2: float
    sigma_mean2: float
    s2_corrected: float


@dataclass(frozen=True)
class AutocovEstimate:
    """Everything produced by one pass of the auto-covariance pipeline."""

    mean_free: MeanFreeSeries
    raw: CovarianceFunction
    matrix: BiasMatrix | None
    corrected: CovarianceFunction | None
    variance: VarianceEstimate | None


def analyze(series: WeightedSeries, lag_range: LagRange, correct_bias: bool = True) -> AutocovEstimate:
    """Demean, estimate, correct and derive the variance for one series."""
    n = len(series)
    lag_range.check(n, strict=correct_bias)
    mf = demean(series)
    raw = estimate_raw(mf, lag_range)
    if not correct_bias:
        return AutocovEstimate(mf, raw, None, None, None)
    a = bias_matrix(series.weights, lag_range)
    corrected = correct(raw, a)
    s2 = naive_variance(mf)
    sm2 = mean_estimator_variance(series.weights, corrected)
    return AutocovEstimate(
        mf, raw, a, corrected, VarianceEstimate(s2, sm2, corrected_variance_correlated(s2, sm2))
    )


def corrected_variance_pipeline(series: WeightedSeries, lag_range: LagRange) -> VarianceEstimate:
    """Variance of correlated data corrected with the bias-free auto-covariance.

    Returns ``(s2, sigma_mean2, s2_corrected)`` where ``sigma_mean2`` is the
    variance of the weighted mean evaluated with the corrected covariance.
    """
    return analyze(series, lag_range).variance
