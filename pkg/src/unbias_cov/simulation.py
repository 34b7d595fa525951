"""Seeded Monte Carlo study of the raw and corrected estimators.

Two moving-average processes with equal taps are driven by correlated white
innovations; the second is delayed by ``delay_steps`` samples. With ``q``
taps of value ``theta`` and innovation correlation ``rho`` the exact
covariances are

    C_auto(k)  = target_variance * (1 - |k|/q)        for |k| < q
    C_cross(k) = rho * C_auto(k - delay_steps)

with ``rho = target_crosscov_peak / target_variance``.

Each realization owns an independent Philox stream derived from
``(seed, realization_index)``, so results do not depend on how the work is
split across threads.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .autocov import BiasMatrix, bias_matrix, correct, estimate_raw
from .crosscov import SeriesPair, bias_matrix_cross, estimate_raw_cross
from .errors import InvalidConfig, UnbiasCovError
from .series_stats import WeightedSeries, mean_estimator_variance, naive_variance
from .structures import CovarianceFunction, LagRange

logger = logging.getLogger(__name__)

WEIGHT_LAWS = ("redraw", "fixed", "unit")
THREADS_ENV = "UNBIAS_COV_THREADS"


class RealizationError(UnbiasCovError):
    def __init__(self, index: int, cause: Exception):
        super().__init__(f"realization {index}: {cause}")
        self.index = index
        self.cause = cause


@dataclass(frozen=True)
class SimulationConfig:
    ma_order: int = 10
    ma_coeff: float = 0.1
    dt: float = 0.2
    target_variance: float = 4.0
    mean: float = 8.0
    target_crosscov_peak: float = 3.0
    delay_steps: int = 10
    n1: int = 50
    n2: int = 50
    realizations: int = 10_000
    k1: int = -25
    k2: int = 24
    weight_law: str = "redraw"
    seed: int = 0

    def __post_init__(self):
        if self.ma_order < 1 or self.ma_coeff == 0:
            raise InvalidConfig("need ma_order >= 1 and a nonzero ma_coeff")
        if not (self.dt > 0 and self.target_variance > 0):
            raise InvalidConfig("dt and target_variance must be positive")
        if abs(self.target_crosscov_peak) > self.target_variance:
            raise InvalidConfig("cross-covariance peak cannot exceed the variance")
        if self.delay_steps < 0:
            raise InvalidConfig("delay_steps must be nonnegative")
        if self.n1 < 2 or self.n2 < 2:
            raise InvalidConfig("series need at least 2 samples")
        if self.realizations < 1:
            raise InvalidConfig("need at least one realization")
        if self.weight_law not in WEIGHT_LAWS:
            raise InvalidConfig(f"weight_law must be one of {WEIGHT_LAWS}")
        if self.seed < 0:
            raise InvalidConfig("seed must be nonnegative")
        try:
            LagRange(self.k1, self.k2).check(self.n1, self.n2, strict=True)
        except UnbiasCovError as exc:
            raise InvalidConfig(str(exc)) from exc

    @property
    def lag_range(self) -> LagRange:
        return LagRange(self.k1, self.k2)

    @property
    def innovation_variance(self) -> float:
        return self.target_variance / (self.ma_order * self.ma_coeff**2)

    @property
    def coupling(self) -> float:
        return self.target_crosscov_peak / self.target_variance

    @property
    def delay(self) -> float:
        return self.delay_steps * self.dt


def true_autocov(config: SimulationConfig, lag_range: LagRange | None = None) -> CovarianceFunction:
    lag_range = lag_range or config.lag_range
    q = config.ma_order
    k = np.abs(lag_range.lags)
    vals = np.where(k < q, config.target_variance * (1.0 - k / q), 0.0)
    return CovarianceFunction(lag_range.k1, lag_range.k2, vals, config.dt)


def true_crosscov(config: SimulationConfig, lag_range: LagRange | None = None) -> CovarianceFunction:
    lag_range = lag_range or config.lag_range
    q = config.ma_order
    k = np.abs(lag_range.lags - config.delay_steps)
    vals = np.where(k < q, config.target_crosscov_peak * (1.0 - k / q), 0.0)
    return CovarianceFunction(lag_range.k1, lag_range.k2, vals, config.dt)


def realization_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(0, index))))


def fixed_weights(config: SimulationConfig) -> tuple[np.ndarray, np.ndarray]:
    rng = np.random.Generator(np.random.Philox(np.random.SeedSequence(config.seed, spawn_key=(1,))))
    return rng.uniform(0.0, 1.0, config.n1), rng.uniform(0.0, 1.0, config.n2)


def generate_pair(config: SimulationConfig, realization_index: int, weights=None) -> SeriesPair:
    """Draw the coupled, delayed pair for one realization.

    ``weights`` overrides the configured law with a given ``(w1, w2)``.
    """
    rng = realization_rng(config.seed, realization_index)
    q, d = config.ma_order, config.delay_steps
    n = max(config.n1, config.n2)
    length = n + q + d
    rho = config.coupling
    sigma_e = np.sqrt(config.innovation_variance)
    shared = rng.standard_normal(length)
    own1 = rng.standard_normal(length)
    own2 = rng.standard_normal(length)
    e1 = sigma_e * (np.sqrt(rho) * shared + np.sqrt(1.0 - rho) * own1)
    e2 = sigma_e * (np.sqrt(rho) * shared + np.sqrt(1.0 - rho) * own2)
    kernel = np.full(q, config.ma_coeff)
    # filtered[m] is the process at time m - 1 - d
    y1 = np.convolve(e1, kernel, mode="valid")
    y2 = np.convolve(e2, kernel, mode="valid")
    x1 = y1[1 + d : 1 + d + config.n1] + config.mean
    x2 = y2[1 : 1 + config.n2] + config.mean

    if weights is not None:
        w1, w2 = weights
    elif config.weight_law == "redraw":
        w1 = rng.uniform(0.0, 1.0, config.n1)
        w2 = rng.uniform(0.0, 1.0, config.n2)
    elif config.weight_law == "fixed":
        w1, w2 = fixed_weights(config)
    else:
        w1, w2 = np.ones(config.n1), np.ones(config.n2)
    return SeriesPair(WeightedSeries(x1, w1, config.dt), WeightedSeries(x2, w2, config.dt))


@dataclass(frozen=True)
class LagStats:
    mean: np.ndarray
    stderr: np.ndarray


@dataclass(frozen=True)
class ScalarStats:
    mean: float
    stderr: float


def _lag_stats(samples: np.ndarray) -> LagStats:
    r = samples.shape[0]
    se = samples.std(axis=0, ddof=1) / np.sqrt(r) if r > 1 else np.full(samples.shape[1:], np.nan)
    return LagStats(samples.mean(axis=0), se)


def _scalar_stats(samples: np.ndarray) -> ScalarStats:
    s = _lag_stats(samples[:, None])
    return ScalarStats(float(s.mean[0]), float(s.stderr[0]))


@dataclass(frozen=True)
class RealizationResult:
    """Per-realization estimates, stacked along axis 0 in a study."""

    auto_raw: np.ndarray
    auto_corrected: np.ndarray
    auto_predicted: np.ndarray
    cross_raw: np.ndarray
    cross_corrected: np.ndarray
    cross_predicted: np.ndarray
    s2: np.ndarray
    sigma_mean2: np.ndarray
    s2_corrected: np.ndarray
    s2_predicted: np.ndarray


@dataclass(frozen=True)
class MonteCarloReport:
    """Empirical means over realizations next to the exact truths.

    ``*_predicted`` holds the mean over realizations of ``A C_true`` (or of
    ``sigma^2 - sigma_mean^2`` for ``s2``); the ``*_deviation`` entries are
    statistics of the per-realization difference estimate minus prediction.
    Standard errors are NaN and ``stderr_defined`` is False for a single
    realization.
    """

    config: SimulationConfig
    lags: np.ndarray
    auto_truth: CovarianceFunction
    cross_truth: CovarianceFunction
    auto_raw: LagStats
    auto_corrected: LagStats
    auto_predicted: LagStats
    auto_deviation: LagStats
    cross_raw: LagStats
    cross_corrected: LagStats
    cross_predicted: LagStats
    cross_deviation: LagStats
    s2: ScalarStats
    sigma_mean2: ScalarStats
    s2_corrected: ScalarStats
    s2_predicted: ScalarStats
    s2_deviation: ScalarStats
    realizations: int
    seed: int
    stderr_defined: bool
    samples: RealizationResult | None = field(default=None, repr=False)

    @property
    def lag_times(self) -> np.ndarray:
        return self.lags * self.config.dt


@dataclass
class _Study:
    config: SimulationConfig
    c_auto: np.ndarray
    c_cross: np.ndarray
    fixed: tuple[BiasMatrix, BiasMatrix, float] | None = None

    def matrices(self, pair: SeriesPair) -> tuple[BiasMatrix, BiasMatrix, float]:
        if self.fixed is not None:
            return self.fixed
        return self._build(pair.s1.weights, pair.s2.weights)

    def _build(self, w1, w2):
        lr = self.config.lag_range
        a_auto = bias_matrix(w1, lr)
        a_cross = bias_matrix_cross(w1, w2, lr)
        sm2_true = mean_estimator_variance(w1, true_autocov(self.config))
        # factor up front so concurrent realizations share the cached LU
        a_auto.factorization
        a_cross.factorization
        return a_auto, a_cross, sm2_true


def simulate_realization(study: _Study, index: int) -> tuple[np.ndarray, ...]:
    config = study.config
    lr = config.lag_range
    pair = generate_pair(config, index)
    mf1, mf2 = pair.demeaned()
    a_auto, a_cross, sm2_true = study.matrices(pair)

    auto_raw = estimate_raw(mf1, lr)
    auto_hat = correct(auto_raw, a_auto)
    cross_raw = estimate_raw_cross(mf1, mf2, lr)
    cross_hat = correct(cross_raw, a_cross)

    s2 = naive_variance(mf1)
    sm2 = mean_estimator_variance(pair.s1.weights, auto_hat)
    return (
        auto_raw.values,
        auto_hat.values,
        a_auto.entries @ study.c_auto,
        cross_raw.values,
        cross_hat.values,
        a_cross.entries @ study.c_cross,
        s2,
        sm2,
        s2 + sm2,
        config.target_variance - sm2_true,
    )


def _thread_count(requested: int | None) -> int:
    if requested is None:
        env = os.environ.get(THREADS_ENV)
        requested = int(env) if env else (os.cpu_count() or 1)
    return max(1, int(requested))


def run_monte_carlo(
    config: SimulationConfig, threads: int | None = None, keep_samples: bool = False
) -> MonteCarloReport:
    """Run all realizations and aggregate per-lag means and standard errors.

    Bias matrices are rebuilt for every realization under the ``redraw``
    weight law and built once otherwise.
    """
    r, k = config.realizations, config.lag_range.size
    study = _Study(config, true_autocov(config).values, true_crosscov(config).values)
    if config.weight_law != "redraw":
        pair = generate_pair(config, 0)
        study.fixed = study._build(pair.s1.weights, pair.s2.weights)

    names = RealizationResult.__dataclass_fields__.keys()
    shapes = [(r, k)] * 6 + [(r,)] * 4
    out = {name: np.empty(shape) for name, shape in zip(names, shapes)}

    def work(block: range) -> None:
        for i in block:
            try:
                values = simulate_realization(study, i)
            except UnbiasCovError as exc:
                raise RealizationError(i, exc) from exc
            for name, v in zip(names, values):
                out[name][i] = v

    nthreads = min(_thread_count(threads), r)
    chunk = -(-r // nthreads)
    blocks = [range(s, min(s + chunk, r)) for s in range(0, r, chunk)]
    logger.info("running %d realizations on %d thread(s)", r, nthreads)
    if nthreads == 1:
        for b in blocks:
            work(b)
    else:
        with ThreadPoolExecutor(nthreads) as pool:
            for fut in [pool.submit(work, b) for b in blocks]:
                fut.result()

    res = RealizationResult(**out)
    return MonteCarloReport(
        config=config,
        lags=config.lag_range.lags,
        auto_truth=true_autocov(config),
        cross_truth=true_crosscov(config),
        auto_raw=_lag_stats(res.auto_raw),
        auto_corrected=_lag_stats(res.auto_corrected),
        auto_predicted=_lag_stats(res.auto_predicted),
        auto_deviation=_lag_stats(res.auto_raw - res.auto_predicted),
        cross_raw=_lag_stats(res.cross_raw),
        cross_corrected=_lag_stats(res.cross_corrected),
        cross_predicted=_lag_stats(res.cross_predicted),
        cross_deviation=_lag_stats(res.cross_raw - res.cross_predicted),
        s2=_scalar_stats(res.s2),
        sigma_mean2=_scalar_stats(res.sigma_mean2),
        s2_corrected=_scalar_stats(res.s2_corrected),
        s2_predicted=_scalar_stats(res.s2_predicted),
        s2_deviation=_scalar_stats(res.s2 - res.s2_predicted),
        realizations=r,
        seed=config.seed,
        stderr_defined=r > 1,
        samples=res if keep_samples else None,
    )


def config_dict(config: SimulationConfig) -> dict:
    return asdict(config)
