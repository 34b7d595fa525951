"""Brute-force reference computations, independent of the package internals.

None of these use FFTs or the package's index-bound formulas; sums run over
every index and skip those that leave a series.
"""

import numpy as np


def lag_sums(x1, w1, x2, w2):
    """{k: (X_k, Y_k)} by a double loop over all sample pairs."""
    n1, n2 = len(w1), len(w2)
    out = {k: [0.0, 0.0] for k in range(-(n1 - 1), n2)}
    for i in range(n1):
        for j in range(n2):
            out[j - i][0] += w1[i] * w2[j] * x1[i] * x2[j]
            out[j - i][1] += w1[i] * w2[j]
    return {k: tuple(v) for k, v in out.items()}


def triple_g(w1, w2, k, j):
    """sum_i w1_i w2_{i+k} w2_{i+j}."""
    n1, n2 = len(w1), len(w2)
    total = 0.0
    for i in range(n1):
        if 0 <= i + k < n2 and 0 <= i + j < n2:
            total += w1[i] * w2[i + k] * w2[i + j]
    return total


def triple_h(w1, w2, k, j):
    """sum_i w1_i w2_{i+k} w1_{i+k-j}."""
    n1, n2 = len(w1), len(w2)
    total = 0.0
    for i in range(n1):
        if 0 <= i + k < n2 and 0 <= i + k - j < n1:
            total += w1[i] * w2[i + k] * w1[i + k - j]
    return total


def quadratic_form_matrix(w1, w2, lags):
    """Bias matrix from the estimator definition alone.

    The raw estimate is a bilinear form c_k = x1^T B_k x2 in the raw samples,
    with B_k = M1^T D_k M2 / Y_k where M removes the weighted mean and D_k
    holds the lag-k weight products. For E{x1_i x2_j} = C_{j-i} + const the
    constant drops out, so a_kj = sum over entries of B_k where j' - i = j.
    """
    w1 = np.asarray(w1, float)
    w2 = np.asarray(w2, float)
    n1, n2 = w1.size, w2.size
    m1 = np.eye(n1) - np.outer(np.ones(n1), w1) / w1.sum()
    m2 = np.eye(n2) - np.outer(np.ones(n2), w2) / w2.sum()
    diff = np.arange(n2)[None, :] - np.arange(n1)[:, None]
    a = np.zeros((len(lags), len(lags)))
    for r, k in enumerate(lags):
        d = np.where(diff == k, np.outer(w1, w2), 0.0)
        b = m1.T @ d @ m2 / d.sum()
        for c, j in enumerate(lags):
            a[r, c] = b[diff == j].sum()
    return a


def triple_sum_matrix(w1, w2, lags):
    """Bias matrix from the G/H/Y triple sums evaluated by loops."""
    w1 = np.asarray(w1, float)
    w2 = np.asarray(w2, float)
    sw1, sw2 = w1.sum(), w2.sum()
    sums = lag_sums(np.ones_like(w1), w1, np.ones_like(w2), w2)
    a = np.zeros((len(lags), len(lags)))
    for r, k in enumerate(lags):
        yk = sums[k][1]
        for c, j in enumerate(lags):
            a[r, c] = (
                (k == j)
                + sums[j][1] / (sw1 * sw2)
                - triple_g(w1, w2, k, j) / (yk * sw2)
                - triple_h(w1, w2, k, j) / (yk * sw1)
            )
    return a


def closed_form_auto(n, k, j):
    """Closed-form entry for constant weights, |j|, |k| < n."""
    return (
        (k == j)
        - 2 * (n - max(abs(j), abs(k), min(n, abs(k - j)))) / (n * (n - abs(k)))
        + (n - abs(j)) / n**2
    )


def closed_form_cross(n1, n2, k, j):
    """Closed-form entry for constant weights, -n1 < j, k < n2.

    The first overlap count is clipped at zero; unclipped it goes negative
    when the lags j and k are far apart.
    """
    yk = min(n1, n2 - k) - max(0, -k)
    g = max(0, min(n1, n2 - j, n2 - k) - max(0, -j, -k))
    h = min(n1, n2 - j, max(0, n1 + k - j)) - max(0, -j, min(n1, k - j))
    return (k == j) - g / (n2 * yk) - h / (n1 * yk) + (min(n1, n2 - j) - max(0, -j)) / (n1 * n2)


def mean_variance_double_sum(w, cov):
    """sum_ij w_i w_j C_{j-i} / (sum w)^2 with C given as a callable."""
    w = np.asarray(w, float)
    n = w.size
    total = 0.0
    for i in range(n):
        for j in range(n):
            total += w[i] * w[j] * cov(j - i)
    return total / w.sum() ** 2
