import numpy as np
import pytest

from oracles import closed_form_cross, quadratic_form_matrix, triple_sum_matrix
from unbias_cov import (
    BiasMatrix,
    CovarianceFunction,
    InvalidRange,
    InvalidSeries,
    LagRange,
    MeanFreeSeries,
    SeriesPair,
    WeightedSeries,
    analyze,
    analyze_cross,
    bias_epsilon_cross,
    bias_matrix,
    bias_matrix_cross,
    correct_cross,
    demean,
    estimate_raw,
    estimate_raw_cross,
    expected_estimate,
)


def _weights(rng, n):
    return rng.uniform(0.05, 1.0, size=n)


def test_identical_series_degenerates_to_auto(rng):
    s = WeightedSeries(rng.normal(size=25), _weights(rng, 25))
    lr = LagRange(-10, 12)
    mf = demean(s)
    np.testing.assert_array_equal(estimate_raw_cross(mf, mf, lr).values, estimate_raw(mf, lr).values)
    np.testing.assert_array_equal(bias_matrix_cross(s.weights, s.weights, lr).entries, bias_matrix(s.weights, lr).entries)
    auto, cross = analyze(s, lr), analyze_cross(SeriesPair(s, s), lr)
    np.testing.assert_allclose(cross.corrected.values, auto.corrected.values, rtol=1e-12, atol=1e-14)


def test_raw_cross_example():
    c = estimate_raw_cross(MeanFreeSeries([1.0, 0.0], [1, 1]), MeanFreeSeries([0.0, 1.0], [1, 1]), LagRange(-1, 1))
    np.testing.assert_allclose(c.values, [0, 0, 1], atol=1e-15)


def test_swap_negates_lag(rng):
    m1 = MeanFreeSeries(rng.normal(size=11), _weights(rng, 11))
    m2 = MeanFreeSeries(rng.normal(size=17), _weights(rng, 17))
    c12 = estimate_raw_cross(m1, m2, LagRange(-10, 16))
    c21 = estimate_raw_cross(m2, m1, LagRange(-16, 10))
    np.testing.assert_allclose(c12.values, c21.values[::-1], rtol=1e-12, atol=1e-14)


def test_cross_range_validation(rng):
    m1 = MeanFreeSeries(rng.normal(size=5), np.ones(5))
    m2 = MeanFreeSeries(rng.normal(size=8), np.ones(8))
    estimate_raw_cross(m1, m2, LagRange(-4, 7))
    with pytest.raises(InvalidRange):
        estimate_raw_cross(m1, m2, LagRange(-5, 0))
    with pytest.raises(InvalidRange):
        analyze_cross(SeriesPair(WeightedSeries(m1.values), WeightedSeries(m2.values)), LagRange(-4, 6))


def test_pair_dt_mismatch():
    with pytest.raises(InvalidSeries):
        SeriesPair(WeightedSeries([1.0, 2.0], dt=0.1), WeightedSeries([1.0, 2.0], dt=0.2))


def test_closed_form_two_three():
    lr = LagRange(-1, 2)
    a = bias_matrix_cross(np.ones(2), np.ones(3), lr).entries
    for r, k in enumerate(lr.lags):
        for c, j in enumerate(lr.lags):
            assert a[r, c] == pytest.approx(closed_form_cross(2, 3, k, j), abs=1e-12)


def test_closed_form_constant_weights_all_lengths():
    for n1 in range(2, 16):
        for n2 in range(2, 16):
            lr = LagRange(-(n1 - 1), n2 - 1)
            a = bias_matrix_cross(np.full(n1, 2.0), np.full(n2, 0.5), lr).entries
            ref = np.array([[closed_form_cross(n1, n2, k, j) for j in lr.lags] for k in lr.lags])
            np.testing.assert_allclose(a, ref, rtol=0, atol=1e-12)


def test_random_weights_against_oracles(rng):
    for _ in range(25):
        n1, n2 = (int(v) for v in rng.integers(2, 16, size=2))
        w1, w2 = _weights(rng, n1), _weights(rng, n2)
        lr = LagRange(-(n1 - 1), n2 - 1)
        ref = triple_sum_matrix(w1, w2, lr.lags)
        np.testing.assert_allclose(bias_matrix_cross(w1, w2, lr).entries, ref, atol=1e-9 * np.abs(ref).max())
        np.testing.assert_allclose(bias_matrix_cross(w1, w2, lr, method="direct").entries, ref, atol=1e-12)
        np.testing.assert_allclose(ref, quadratic_form_matrix(w1, w2, lr.lags), atol=1e-10)


def test_correct_cross_identity_and_round_trip(rng):
    lr = LagRange(-3, 5)
    c = CovarianceFunction(-3, 5, rng.normal(size=9))
    np.testing.assert_array_equal(correct_cross(c, BiasMatrix(lr, np.eye(9))).values, c.values)
    for _ in range(20):
        n1, n2 = (int(v) for v in rng.integers(5, 40, size=2))
        lr = LagRange(int(rng.integers(-(n1 - 2), 1)), int(rng.integers(0, n2 - 1)))
        a = bias_matrix_cross(_weights(rng, n1), _weights(rng, n2), lr)
        truth = CovarianceFunction(lr.k1, lr.k2, rng.normal(size=lr.size))
        back = correct_cross(expected_estimate(truth, a), a)
        np.testing.assert_allclose(back.values, truth.values, atol=1e-8 * np.abs(truth.values).max())


def test_epsilon_constant_for_white_noise_equal_weights():
    n = 25
    lr = LagRange(-15, 15)
    white = CovarianceFunction.from_function(lr, lambda k: 1.2 * (k == 0))
    eps = bias_epsilon_cross(white, np.ones(n), np.ones(n), lr).values
    np.testing.assert_allclose(eps, -2.4 / n + 1.2 / n, rtol=1e-12)


def test_epsilon_varies_with_differing_weights(rng):
    n = 25
    lr = LagRange(-15, 15)
    white = CovarianceFunction.from_function(lr, lambda k: 1.0 * (k == 0))
    eps = bias_epsilon_cross(white, _weights(rng, n), _weights(rng, n), lr).values
    assert np.ptp(eps) > 1e-3
