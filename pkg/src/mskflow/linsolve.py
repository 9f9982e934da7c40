"""Dense LU solve with partial pivoting for the collocation systems.

Backed by LAPACK (``getrf``/``getrs`` through scipy) with an explicit pivot
check and a 1-norm condition estimate (``gecon``).
"""

from __future__ import annotations

import logging
import warnings

import numpy as np
import scipy.linalg as sla
from scipy.linalg import lapack

from .errors import SingularMatrixError

logger = logging.getLogger(__name__)

COND_WARN = 1e12
PIVOT_RTOL = 1e-14


def condition_estimate(lu: np.ndarray, anorm: float) -> float:
    """1-norm condition number estimate from an LU factorization."""
    rcond, info = lapack.dgecon(lu, anorm, norm="1")
    if info != 0 or rcond == 0.0:
        return np.inf
    return 1.0 / rcond


def solve(A: np.ndarray, b: np.ndarray, *, refine: bool = False,
          return_cond: bool = False, estimate_cond: bool = True):
    """Solve ``A x = b`` for square dense ``A``.

    Raises SingularMatrixError when a pivot of U falls below
    ``PIVOT_RTOL * n * max|A|``. A condition estimate above 1e12 is logged as
    a warning and the solution is still returned. ``refine`` enables one pass
    of iterative refinement. With ``estimate_cond`` False the estimate is
    skipped and reported as NaN.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"A must be square, got shape {A.shape}")
    if b.shape[0] != A.shape[0]:
        raise ValueError(f"dimension mismatch: A is {A.shape}, b is {b.shape}")
    n = A.shape[0]
    if not np.all(np.isfinite(A)) or not np.all(np.isfinite(b)):
        raise ValueError("non-finite entries in the linear system")
    scale = float(max(A.max(), -A.min())) if A.size else 0.0
    if scale == 0.0:
        raise SingularMatrixError(0, 0.0)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", sla.LinAlgWarning)
        lu, piv = sla.lu_factor(A, check_finite=False)
    diag = np.abs(np.diag(lu))
    small = np.flatnonzero(diag <= PIVOT_RTOL * n * scale)
    if small.size:
        k = int(small[0])
        raise SingularMatrixError(k, float(lu[k, k]))
    x = sla.lu_solve((lu, piv), b, check_finite=False)
    if refine:
        x = x + sla.lu_solve((lu, piv), b - A @ x, check_finite=False)
    cond = np.nan
    if estimate_cond:
        cond = condition_estimate(lu, float(np.abs(A).sum(axis=0).max()))
    if cond > COND_WARN:
        logger.warning("ill-conditioned system: cond_1 ~ %.3g (n=%d)", cond, n)
    if return_cond:
        return x, cond
    return x


def relative_residual(A: np.ndarray, x: np.ndarray, b: np.ndarray) -> float:
    r = A @ x - b
    return float(np.max(np.abs(r)) / max(1.0, float(np.max(np.abs(b)))))
