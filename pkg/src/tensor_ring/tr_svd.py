"""Sequential-SVD tensor-ring decomposition and the tensor-train baseline."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .low_rank import TruncationResult, truncated_svd
from .nd_tensor import as_tensor, circular_shift_dims
from .tr_core import TRTensor, circular_shift_cores

__all__ = ["SvdConfig", "split_rank", "tr_svd", "tt_svd"]


@dataclass(frozen=True)
class SvdConfig:
    """Options for :func:`tr_svd`.

    start_mode
        1-based mode the sequential sweep starts from.
    force_tt
        Pin ``r_1 = 1`` and use the uniform tensor-train threshold.
    balanced_round_up
        When the first truncated rank has no balanced factor pair, round it
        up to the next integer that has one (keeps more singular values).
        Off by default.
    """

    epsilon_p: float
    start_mode: int = 1
    force_tt: bool = False
    balanced_round_up: bool = False

    def __post_init__(self):
        if not self.epsilon_p > 0:
            raise ValueError("epsilon_p must be positive")


def split_rank(rank: int) -> tuple[int, int]:
    """Factor pair ``(r1, r2)`` with ``r1 * r2 == rank`` minimizing ``|r1 - r2|``, ``r1 <= r2``."""
    if rank < 1:
        raise ValueError("rank must be positive")
    r1 = math.isqrt(rank)
    while rank % r1:
        r1 -= 1
    return r1, rank // r1


def _balanced_rank(rank: int, limit: int) -> int:
    # next R' >= rank (<= limit) whose factor pair differs by at most one
    for cand in range(rank, limit + 1):
        r1, r2 = split_rank(cand)
        if r2 - r1 <= 1:
            return cand
    return rank


def _truncate(m: np.ndarray, delta: float, extra: int = 0) -> TruncationResult:
    res = truncated_svd(m, delta)
    if extra > 0 or res.rank == 0:
        # keep more triplets than the threshold asks for (rank clamp or
        # balanced rounding); redo at delta=0 and cut to the wanted size
        want = max(res.rank + extra, 1)
        full = truncated_svd(m, 0.0)
        if full.rank >= want:
            return TruncationResult(
                full.u[:, :want],
                full.sigma[:want],
                full.v[:, :want],
                want,
                float(np.sqrt(np.sum(full.sigma[want:] ** 2))),
            )
        # not enough non-zero singular values: pad with zero directions
        u = _orthonormal_completion(full.u, m.shape[0], want)
        sigma = np.concatenate([full.sigma, np.zeros(want - full.rank)])
        v = np.hstack([full.v, np.zeros((m.shape[1], want - full.rank))])
        return TruncationResult(u, sigma, v, want, 0.0)
    return res


def _orthonormal_completion(u: np.ndarray, rows: int, cols: int) -> np.ndarray:
    if cols > rows:
        raise ValueError(f"cannot build {cols} orthonormal columns in dimension {rows}")
    basis = np.hstack([u, np.eye(rows)])
    q, _ = np.linalg.qr(basis)
    q = q[:, :cols]
    q[:, : u.shape[1]] = u
    return q


def tr_svd(t: np.ndarray, cfg: SvdConfig | float) -> TRTensor:
    """Decompose ``t`` into a tensor ring by ``d`` sequential truncated SVDs.

    The first SVD uses threshold ``sqrt(2) eps ||T|| / sqrt(d)`` and its rank
    is split as evenly as possible into ``r_1 * r_2``; the rest use
    ``eps ||T|| / sqrt(d)``. With ``force_tt`` the boundary rank is 1 and all
    steps use ``eps ||T|| / sqrt(d - 1)``.
    """
    if not isinstance(cfg, SvdConfig):
        cfg = SvdConfig(epsilon_p=float(cfg))
    t = as_tensor(t)
    d = t.ndim
    if d < 2:
        raise ValueError("TR-SVD needs a tensor of order >= 2")
    if not 1 <= cfg.start_mode <= d:
        raise ValueError(f"start_mode must be in 1..{d}")
    shift = cfg.start_mode - 1
    if shift:
        ring = _sequential_svd(circular_shift_dims(t, shift), cfg)
        return circular_shift_cores(ring, -shift)
    return _sequential_svd(t, cfg)


def tt_svd(t: np.ndarray, epsilon_p: float) -> TRTensor:
    """TT-SVD baseline, returned as a ring with ``r_1 = 1``."""
    return tr_svd(t, SvdConfig(epsilon_p=epsilon_p, force_tt=True))


def _sequential_svd(t: np.ndarray, cfg: SvdConfig) -> TRTensor:
    d = t.ndim
    n = t.shape
    norm = float(np.linalg.norm(t.ravel()))
    if norm == 0:
        raise ArithmeticError("cannot decompose a zero-norm tensor")
    eps = cfg.epsilon_p
    if cfg.force_tt:
        delta_first = delta_rest = eps * norm / math.sqrt(d - 1)
    else:
        delta_first = math.sqrt(2) * eps * norm / math.sqrt(d)
        delta_rest = eps * norm / math.sqrt(d)

    rest = int(t.size // n[0])
    res = _truncate(t.reshape(n[0], rest, order="F"), delta_first)
    if cfg.force_tt:
        r1, r2 = 1, res.rank
    else:
        rank = res.rank
        if cfg.balanced_round_up:
            wanted = _balanced_rank(rank, min(n[0], rest))
            if wanted > rank:
                res = _truncate(t.reshape(n[0], rest, order="F"), delta_first, wanted - rank)
                rank = res.rank
        r1, r2 = split_rank(rank)
    # U(i1, a1 + r1*a2) -> Z1(a1, i1, a2)
    cores = [np.transpose(res.u.reshape(n[0], r1, r2, order="F"), (1, 0, 2))]
    # SV^T(a1 + r1*a2, J) -> Z^{>1}(a2, J, a1)
    remainder = np.transpose(res.sv.reshape(r1, r2, rest, order="F"), (1, 2, 0))

    rk = r2
    for k in range(1, d - 1):
        cols = remainder.size // (rk * n[k])
        res = _truncate(remainder.reshape(rk * n[k], cols, order="F"), delta_rest)
        cores.append(res.u.reshape(rk, n[k], res.rank, order="F"))
        remainder = res.sv.reshape(res.rank, cols // r1, r1, order="F")
        rk = res.rank
    cores.append(remainder.reshape(rk, n[d - 1], r1, order="F"))
    return TRTensor(cores)
