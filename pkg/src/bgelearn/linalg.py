"""Dense symmetric-matrix utilities used by the scoring arithmetic.

Everything here works on plain float64 ``numpy`` arrays. Matrices are small
(a few dozen rows at most), so a straightforward Cholesky with an explicit
pivot tolerance beats anything fancier: it gives us the log-determinant and
the inverse for free, and a clean failure signal when a precision or
covariance matrix is not positive definite.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg import cho_solve

from .errors import IndexOutOfRangeError, NotPositiveDefiniteError

# A pivot at or below PIVOT_RTOL * max(diagonal) counts as non-positive:
# genuine singularity rather than rounding noise at this problem scale.
PIVOT_RTOL = 1e-12

_SYMMETRY_RTOL = 1e-8


def _as_sym(a) -> np.ndarray:
    """Validate a square symmetric matrix and return a float64 copy."""
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {a.shape}")
    scale = np.abs(a).max() if a.size else 0.0
    if a.size and np.abs(a - a.T).max() > _SYMMETRY_RTOL * max(scale, 1.0):
        raise ValueError("matrix is not symmetric")
    # Canonicalize tiny asymmetries from accumulated rounding.
    return (a + a.T) / 2.0


def spd_factor(a) -> np.ndarray:
    """Cholesky-factor a symmetric positive definite matrix.

    Returns the lower-triangular L with ``L @ L.T == a``. Raises
    :class:`NotPositiveDefiniteError` when a pivot falls at or below
    ``PIVOT_RTOL`` times the largest diagonal entry.
    """
    a = _as_sym(a)
    n = a.shape[0]
    lower = np.zeros_like(a)
    tol = PIVOT_RTOL * max(a.diagonal().max(initial=0.0), 0.0)
    for j in range(n):
        pivot = a[j, j] - lower[j, :j] @ lower[j, :j]
        if pivot <= tol:
            raise NotPositiveDefiniteError(
                f"pivot {pivot:.3e} at index {j} is not positive"
            )
        lower[j, j] = np.sqrt(pivot)
        if j + 1 < n:
            lower[j + 1 :, j] = (
                a[j + 1 :, j] - lower[j + 1 :, :j] @ lower[j, :j]
            ) / lower[j, j]
    return lower


def log_det(a) -> float:
    """Natural log of the determinant of a positive definite matrix.

    Computed as twice the log-trace of the Cholesky factor, never via the
    raw determinant, so values like exp(-200) stay representable.
    """
    lower = spd_factor(a)
    return float(2.0 * np.sum(np.log(lower.diagonal())))


def invert_spd(a) -> np.ndarray:
    """Invert a symmetric positive definite matrix via its Cholesky factor."""
    lower = spd_factor(a)
    inv = cho_solve((lower, True), np.eye(lower.shape[0]))
    return (inv + inv.T) / 2.0


def submatrix(a, keep) -> np.ndarray:
    """Restrict rows and columns to the index sequence ``keep``, in order."""
    a = np.asarray(a, dtype=float)
    n = a.shape[0]
    keep = list(keep)
    for k in keep:
        if not (isinstance(k, (int, np.integer)) and 0 <= k < n):
            raise IndexOutOfRangeError(f"index {k!r} not in [0, {n})")
    if len(set(keep)) != len(keep):
        raise IndexOutOfRangeError(f"duplicate index in {keep}")
    return a[np.ix_(keep, keep)].copy()
