"""Lag-indexed correlation sums by direct summation and by zero-padded FFT.

All sums here are aperiodic cross-correlations ``S_k = sum_i a_i b_{i+k}`` of
a first sequence of length ``n1`` and a second of length ``n2``. Both are
zero-padded to ``L = n1 + n2`` before transforming, which makes the circular
correlation equal to the aperiodic one. Bin ``b`` of the length-``L`` result
holds lag ``b`` for ``0 <= b <= n2-1`` and lag ``b - L`` for negative lags.

Four families of sums are produced:

``X``  weighted products of mean-free values,
``Y``  products of weights (the overlap normalisation),
``G``, ``H``  triple weight products that populate the bias matrix, one row
       per lag ``k``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import LagOutOfRange, LengthMismatch, NumericalResidue
from .series_stats import MeanFreeSeries

RESIDUE_TOL = 1e-9


def lag_to_bin(k: int, n1: int, n2: int) -> int:
    """Map lag ``k`` in ``[-(n1-1), n2-1]`` to its FFT bin."""
    if not -(n1 - 1) <= k <= n2 - 1:
        raise LagOutOfRange(f"lag {k} outside [{-(n1 - 1)}, {n2 - 1}]")
    return k if k >= 0 else n1 + n2 + k


def _bins(lags, n1: int, n2: int) -> np.ndarray:
    lags = np.asarray(lags, dtype=int)
    if lags.size and (lags.min() < -(n1 - 1) or lags.max() > n2 - 1):
        raise LagOutOfRange(f"lags span [{lags.min()}, {lags.max()}], allowed [{-(n1 - 1)}, {n2 - 1}]")
    return np.where(lags >= 0, lags, lags + n1 + n2)


@dataclass(frozen=True)
class PaddedPair:
    """Two sequences zero-padded to the common length ``n1 + n2``."""

    a: np.ndarray
    b: np.ndarray
    n1: int
    n2: int

    @classmethod
    def build(cls, a, b) -> PaddedPair:
        a = np.asarray(a, dtype=float)
        b = np.asarray(b, dtype=float)
        n1, n2 = a.shape[-1], b.shape[-1]
        length = n1 + n2
        pa = np.zeros(a.shape[:-1] + (length,))
        pb = np.zeros(b.shape[:-1] + (length,))
        pa[..., :n1] = a
        pb[..., :n2] = b
        return cls(pa, pb, n1, n2)

    @property
    def length(self) -> int:
        return self.n1 + self.n2


@dataclass(frozen=True)
class LagIndexedArray:
    """Length ``n1 + n2`` array laid out in FFT bin order."""

    bins: np.ndarray
    n1: int
    n2: int

    def at(self, k: int) -> float:
        return float(self.bins[..., lag_to_bin(k, self.n1, self.n2)])

    def window(self, k1: int, k2: int) -> np.ndarray:
        """Values for lags ``k1..k2`` in ascending lag order."""
        return self.bins[..., _bins(np.arange(k1, k2 + 1), self.n1, self.n2)]

    @property
    def lags(self) -> np.ndarray:
        return np.arange(-(self.n1 - 1), self.n2)

    def as_lag_ordered(self) -> np.ndarray:
        return self.window(-(self.n1 - 1), self.n2 - 1)


@dataclass(frozen=True)
class GHRow:
    """Rows ``G_{k.}`` and ``H_{k.}`` of the triple weight sums for one lag ``k``."""

    g: LagIndexedArray
    h: LagIndexedArray
    row_lag: int


def circular_xcorr(pair: PaddedPair) -> np.ndarray:
    """``IFFT{FFT{a}^* FFT{b}}`` with the imaginary residue checked and dropped.

    Works along the last axis, so a stack of rows is transformed in one call.
    """
    fa = np.fft.fft(pair.a, axis=-1)
    fb = np.fft.fft(pair.b, axis=-1)
    out = np.fft.ifft(np.conj(fa) * fb, axis=-1)
    return _real_checked(out)


def _real_checked(out: np.ndarray) -> np.ndarray:
    scale = float(np.max(np.abs(out))) if out.size else 0.0
    resid = float(np.max(np.abs(out.imag))) if out.size else 0.0
    if resid > RESIDUE_TOL * scale:
        raise NumericalResidue(
            f"imaginary residue {resid:.3g} exceeds {RESIDUE_TOL:g} of scale {scale:.3g}"
        )
    return np.ascontiguousarray(out.real)


def _check_seq(s: MeanFreeSeries) -> None:
    if s.values.shape != s.weights.shape:
        raise LengthMismatch(f"{s.values.size} values but {s.weights.size} weights")


def correlation_sums_direct(s1: MeanFreeSeries, s2: MeanFreeSeries):
    """Reference O(N1 N2) evaluation of the ``X`` and ``Y`` sums.

    Returns
    -------
    (X, Y) : tuple of LagIndexedArray
    """
    _check_seq(s1)
    _check_seq(s2)
    n1, n2 = len(s1), len(s2)
    u1 = s1.weights * s1.values
    u2 = s2.weights * s2.values
    x = np.zeros(n1 + n2)
    y = np.zeros(n1 + n2)
    for k in range(-(n1 - 1), n2):
        lo, hi = max(0, -k), min(n1, n2 - k)
        b = lag_to_bin(k, n1, n2)
        if hi > lo:
            x[b] = np.dot(u1[lo:hi], u2[lo + k : hi + k])
            y[b] = np.dot(s1.weights[lo:hi], s2.weights[lo + k : hi + k])
    return LagIndexedArray(x, n1, n2), LagIndexedArray(y, n1, n2)


def correlation_sums_fft(s1: MeanFreeSeries, s2: MeanFreeSeries):
    """FFT evaluation of the ``X`` and ``Y`` sums; the auto case passes one series twice."""
    _check_seq(s1)
    _check_seq(s2)
    n1, n2 = len(s1), len(s2)
    first = np.stack([s1.weights * s1.values, s1.weights])
    second = np.stack([s2.weights * s2.values, s2.weights])
    xy = circular_xcorr(PaddedPair.build(first, second))
    return LagIndexedArray(xy[0], n1, n2), LagIndexedArray(xy[1], n1, n2)


def weight_sums_fft(w1, w2) -> LagIndexedArray:
    """``Y_k = sum_i w1_i w2_{i+k}`` for every lag."""
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    return LagIndexedArray(circular_xcorr(PaddedPair.build(w1, w2)), w1.size, w2.size)


def shifted(w: np.ndarray, k: int) -> np.ndarray:
    """``out[i] = w[i + k]``, zero where ``i + k`` leaves the array."""
    n = w.shape[-1]
    out = np.zeros_like(w)
    if abs(k) < n:
        if k >= 0:
            out[..., : n - k] = w[..., k:]
        else:
            out[..., -k:] = w[..., : n + k]
    return out


def _shift_stack(w: np.ndarray, lags: np.ndarray, n_out: int) -> np.ndarray:
    # out[r, i] = w[i + lags[r]] for i < n_out, zero outside w
    n = w.size
    idx = np.arange(n_out)[None, :] + lags[:, None]
    valid = (idx >= 0) & (idx < n)
    return np.where(valid, w[np.clip(idx, 0, n - 1)], 0.0)


def gh_rows(w1, w2, lags):
    """Batched ``G`` and ``H`` rows for each lag in ``lags``.

    ``G_{kj} = sum_i w1_i w2_{i+k} w2_{i+j}`` and
    ``H_{kj} = sum_i w1_i w2_{i+k} w1_{i+k-j}``, obtained as
    ``IFFT{FFT{w1 * shift(w2, +k)}^* FFT{w2}}`` and
    ``IFFT{FFT{w1}^* FFT{w2 * shift(w1, -k)}}``.

    Returns
    -------
    (g, h) : ndarray, shape (len(lags), n1 + n2)
        Rows in bin order; see :func:`lag_to_bin`.
    """
    w1 = np.asarray(w1, dtype=float)
    w2 = np.asarray(w2, dtype=float)
    n1, n2 = w1.size, w2.size
    lags = np.atleast_1d(np.asarray(lags, dtype=int))
    _bins(lags, n1, n2)
    length = n1 + n2

    u = w1[None, :] * _shift_stack(w2, lags, n1)
    v = w2[None, :] * _shift_stack(w1, -lags, n2)

    fw1 = np.fft.fft(w1, n=length)
    fw2 = np.fft.fft(w2, n=length)
    fu = np.fft.fft(u, n=length, axis=-1)
    fv = np.fft.fft(v, n=length, axis=-1)
    g = _real_checked(np.fft.ifft(np.conj(fu) * fw2[None, :], axis=-1))
    h = _real_checked(np.fft.ifft(np.conj(fw1)[None, :] * fv, axis=-1))
    return g, h


def gh_row(w1, w2, k: int) -> GHRow:
    """Single-lag form of :func:`gh_rows`."""
    n1, n2 = np.size(w1), np.size(w2)
    if not -(n1 - 1) <= k <= n2 - 1:
        raise LagOutOfRange(f"row lag {k} outside [{-(n1 - 1)}, {n2 - 1}]")
    g, h = gh_rows(w1, w2, [k])
    return GHRow(LagIndexedArray(g[0], n1, n2), LagIndexedArray(h[0], n1, n2), int(k))
