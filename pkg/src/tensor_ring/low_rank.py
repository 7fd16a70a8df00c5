"""Truncated SVD and least-squares kernels."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

__all__ = ["TruncationResult", "truncated_svd", "delta_rank", "solve_least_squares"]

# Singular values below this fraction of sigma_max count as exact zeros.
ZERO_SV_RTOL = 1e-14


@dataclass(frozen=True)
class TruncationResult:
    u: np.ndarray
    sigma: np.ndarray
    v: np.ndarray
    rank: int
    discarded_energy: float

    @property
    def sv(self) -> np.ndarray:
        """``diag(sigma) @ v.T``, the right factor used by the decompositions."""
        return self.sigma[:, None] * self.v.T

    def reconstruct(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.T


def delta_rank(sigma: np.ndarray, delta: float) -> int:
    """Smallest ``r`` with ``sqrt(sum_{j>r} sigma_j^2) <= delta``.

    ``sigma`` must be sorted non-increasing. At exact equality the smaller
    rank wins.
    """
    # tail[r] = energy discarded when keeping r values
    tail = np.sqrt(np.concatenate([np.cumsum((sigma**2)[::-1])[::-1], [0.0]]))
    return int(np.argmax(tail <= delta))


def _fix_signs(u: np.ndarray, vt: np.ndarray) -> None:
    # largest-magnitude entry of each left singular vector made non-negative
    if u.shape[1] == 0:
        return
    pivots = u[np.argmax(np.abs(u), axis=0), np.arange(u.shape[1])]
    flip = np.where(pivots < 0, -1.0, 1.0)
    u *= flip
    vt *= flip[:, None]


def truncated_svd(m: np.ndarray, delta: float) -> TruncationResult:
    """delta-truncated SVD under the Frobenius criterion.

    Keeps the minimal number of singular triplets such that the discarded
    energy ``sqrt(sum of dropped sigma^2)`` is at most ``delta``. Rank 0 is
    returned (with empty factors) when ``delta >= ||m||_F``.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim != 2:
        raise ValueError("truncated_svd expects a matrix")
    if not np.all(np.isfinite(m)):
        raise ValueError("matrix has non-finite entries")
    if delta < 0:
        raise ValueError("delta must be non-negative")
    rows, cols = m.shape
    if m.size == 0 or not np.any(m):
        return TruncationResult(np.zeros((rows, 0)), np.zeros(0), np.zeros((cols, 0)), 0, 0.0)
    try:
        u, s, vt = np.linalg.svd(m, full_matrices=False)
    except np.linalg.LinAlgError:
        u, s, vt = scipy.linalg.svd(m, full_matrices=False, lapack_driver="gesvd")
    s = np.where(s < ZERO_SV_RTOL * s[0], 0.0, s)
    r = min(delta_rank(s, delta), int(np.count_nonzero(s)))
    discarded = float(np.sqrt(np.sum(s[r:] ** 2)))
    u, vt = u[:, :r].copy(), vt[:r].copy()
    _fix_signs(u, vt)
    return TruncationResult(u, s[:r].copy(), vt.T.copy(), r, discarded)


def solve_least_squares(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimum-norm minimizer of ``||a @ x - b||_F``.

    Uses LAPACK ``gelsy`` (complete orthogonal factorization via QR with
    column pivoting), so rank-deficient systems get the minimum-Frobenius-norm
    solution without forming normal equations.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    vector_rhs = b.ndim == 1
    if vector_rhs:
        b = b[:, None]
    if a.ndim != 2 or b.ndim != 2:
        raise ValueError("solve_least_squares expects matrices")
    if a.shape[0] != b.shape[0]:
        raise ValueError(f"row mismatch: a is {a.shape}, b is {b.shape}")
    if min(a.shape) < 1:
        raise ValueError("a must have at least one row and one column")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("least-squares inputs must be finite")
    x = scipy.linalg.lstsq(a, b, lapack_driver="gelsy", check_finite=False)[0]
    return x[:, 0] if vector_rhs else x
