"""Dense LU solves with a condition guard for the (small) bias matrices."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lapack, lu_factor, lu_solve

from .errors import IllConditioned, SingularMatrix

PIVOT_TOL = 1e-14
RCOND_MIN = 1e-12


@dataclass(frozen=True)
class Factorization:
    """Row-pivoted LU factors ``P M = L U`` plus a 1-norm rcond estimate."""

    lu: np.ndarray
    piv: np.ndarray
    matrix: np.ndarray
    rcond: float

    @property
    def dimension(self) -> int:
        return self.lu.shape[0]


def factorize(m) -> Factorization:
    m = np.array(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] < 1:
        raise ValueError(f"expected a non-empty square matrix, got shape {m.shape}")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    anorm = float(np.max(np.sum(np.abs(m), axis=0)))
    # lu_factor warns on exact zero pivots; the explicit check below handles them
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        lu, piv = lu_factor(m, check_finite=False)
    min_pivot = float(np.min(np.abs(np.diag(lu))))
    if anorm == 0 or min_pivot < PIVOT_TOL * anorm:
        raise SingularMatrix(
            f"pivot {min_pivot:.3g} below {PIVOT_TOL:g} * ||M||_1 = {anorm:.3g}", rcond=0.0
        )
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    if info != 0:
        raise SingularMatrix(f"dgecon failed with info={info}")
    m.setflags(write=False)
    return Factorization(lu, piv, m, float(min(max(rcond, 0.0), 1.0)))


def solve(f: Factorization, b, trans: bool = False, refine: bool = False) -> np.ndarray:
    """Solve ``M x = b`` (or ``M^T x = b``) with the stored factors.

    ``b`` may hold several right-hand sides as columns. With ``refine`` one
    step of iterative refinement is applied.
    """
    if f.rcond < RCOND_MIN:
        raise IllConditioned(
            f"reciprocal condition estimate {f.rcond:.3g} below {RCOND_MIN:g}", rcond=f.rcond
        )
    b = np.asarray(b, dtype=float)
    if b.shape[0] != f.dimension:
        raise ValueError(f"right-hand side has {b.shape[0]} rows, matrix is {f.dimension}")
    t = 1 if trans else 0
    x = lu_solve((f.lu, f.piv), b, trans=t, check_finite=False)
    if refine:
        m = f.matrix.T if trans else f.matrix
        x = x + lu_solve((f.lu, f.piv), b - m @ x, trans=t, check_finite=False)
    return x


def relative_residual(m, x, b) -> float:
    """``||M x - b|| / (||M|| ||x|| + ||b||)`` in the infinity norm."""
    m = np.asarray(m)
    r = m @ x - b
    denom = np.linalg.norm(m, np.inf) * np.linalg.norm(x, np.inf) + np.linalg.norm(b, np.inf)
    return float(np.linalg.norm(r, np.inf) / denom) if denom > 0 else 0.0
