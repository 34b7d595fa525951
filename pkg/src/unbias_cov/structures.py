"""Lag windows and lag-indexed covariance values."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidRange, RangeMismatch


def _frozen_array(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class LagRange:
    """Closed integer lag window ``[k1, k2]``."""

    k1: int
    k2: int

    def __post_init__(self):
        if int(self.k1) != self.k1 or int(self.k2) != self.k2:
            raise InvalidRange(f"lag bounds must be integers, got [{self.k1}, {self.k2}]")
        object.__setattr__(self, "k1", int(self.k1))
        object.__setattr__(self, "k2", int(self.k2))
        if self.k1 > self.k2:
            raise InvalidRange(f"k1={self.k1} exceeds k2={self.k2}")

    @property
    def size(self) -> int:
        return self.k2 - self.k1 + 1

    @property
    def lags(self) -> np.ndarray:
        return np.arange(self.k1, self.k2 + 1)

    def check(self, n1: int, n2: int | None = None, strict: bool = True) -> LagRange:
        """Validate the window against series lengths.

        A lag ``k`` pairs sample ``i`` of the first series with sample
        ``i + k`` of the second, so lags outside ``[-(n1-1), n2-1]`` have no
        overlap at all. With ``strict`` the window must also stay clear of both
        extreme lags, which is the condition for an invertible bias matrix.
        """
        n2 = n1 if n2 is None else n2
        lo, hi = -(n1 - 1), n2 - 1
        if strict:
            ok = lo < self.k1 and self.k2 < hi
            rel = f"-(N1-1) < K1 <= K2 < N2-1 with N1={n1}, N2={n2}"
        else:
            ok = lo <= self.k1 and self.k2 <= hi
            rel = f"-(N1-1) <= K1 <= K2 <= N2-1 with N1={n1}, N2={n2}"
        if not ok:
            raise InvalidRange(f"lag range [{self.k1}, {self.k2}] violates {rel}")
        return self


@dataclass(frozen=True)
class CovarianceFunction:
    """Covariance values on the lag window ``[k1, k2]`` sampled every ``dt``."""

    k1: int
    k2: int
    values: np.ndarray
    dt: float = 1.0

    def __post_init__(self):
        LagRange(self.k1, self.k2)
        vals = _frozen_array(self.values)
        if vals.shape != (self.k2 - self.k1 + 1,):
            raise RangeMismatch(
                f"expected {self.k2 - self.k1 + 1} values for lags [{self.k1}, {self.k2}], "
                f"got shape {vals.shape}"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("covariance values must be finite")
        if not (np.isfinite(self.dt) and self.dt > 0):
            raise ValueError(f"dt must be positive, got {self.dt}")
        object.__setattr__(self, "values", vals)
        object.__setattr__(self, "dt", float(self.dt))

    @classmethod
    def from_function(cls, lag_range: LagRange, func, dt: float = 1.0) -> CovarianceFunction:
        lags = lag_range.lags
        return cls(lag_range.k1, lag_range.k2, np.array([func(int(k)) for k in lags]), dt)

    @property
    def lag_range(self) -> LagRange:
        return LagRange(self.k1, self.k2)

    @property
    def lags(self) -> np.ndarray:
        return np.arange(self.k1, self.k2 + 1)

    @property
    def lag_times(self) -> np.ndarray:
        return self.lags * self.dt

    def at(self, k: int) -> float:
        """Value at lag ``k``; zero outside the stored window."""
        if self.k1 <= k <= self.k2:
            return float(self.values[k - self.k1])
        return 0.0

    def restrict(self, lag_range: LagRange) -> CovarianceFunction:
        """Re-express on another window, padding with zeros where undefined."""
        vals = np.array([self.at(int(k)) for k in lag_range.lags])
        return CovarianceFunction(lag_range.k1, lag_range.k2, vals, self.dt)

    def require_range(self, lag_range: LagRange) -> None:
        if (self.k1, self.k2) != (lag_range.k1, lag_range.k2):
            raise RangeMismatch(
                f"covariance covers [{self.k1}, {self.k2}] but matrix covers "
                f"[{lag_range.k1}, {lag_range.k2}]"
            )
