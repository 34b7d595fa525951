"""Bias-free auto- and cross-covariance estimation for weighted, time-limited series."""

from .autocov import (
    AutocovEstimate,
    BiasMatrix,
    VarianceEstimate,
    analyze,
    bias_epsilon,
    bias_matrix,
    correct,
    corrected_variance_pipeline,
    estimate_raw,
    expected_estimate,
)
from .crosscov import (
    CrosscovEstimate,
    SeriesPair,
    analyze_cross,
    bias_epsilon_cross,
    bias_matrix_cross,
    correct_cross,
    estimate_raw_cross,
)
from .errors import *  # noqa: F401,F403
from .series_stats import (
    MeanFreeSeries,
    WeightedSeries,
    bessel_variance_independent,
    corrected_variance_correlated,
    demean,
    mean_estimator_variance,
    naive_variance,
    weighted_mean,
)
from .structures import CovarianceFunction, LagRange

__version__ = "0.1.0"
