"""Block-wise ALS for tensor rings with rank adaptation.

Two adjacent cores are merged into a block, the block is fitted by linear
least squares against the rest of the ring, and the block is split back into
a left-orthonormal core and a remainder by a truncated SVD whose threshold
tracks the current error. Truncation is judged in tensor space (through
``G = A^T A`` of the rest-of-ring matrix ``A``), and the remainder core is
refitted exactly for the kept left factor. Every block update works in a
rotated frame where the block sits at the front of the ring, so the
wrap-around block ``(d, 1)`` takes the same path as all others.
"""
from __future__ import annotations

import logging
import math
import sys
import time
from dataclasses import dataclass, field

import numpy as np

from .low_rank import solve_least_squares, truncated_svd
from .nd_tensor import as_tensor, circular_shift_dims, relative_error
from .tr_core import TRTensor, core_unfold_1, core_unfold_2, subchain, subchain_unfolding, to_dense

__all__ = ["BalsConfig", "BalsRecord", "BalsTrace", "tr_bals"]

log = logging.getLogger(__name__)

# relative slack when comparing a block update against the previous error
_MONOTONE_RTOL = 1e-12
# absolute error floor (relative to ||T||) below which updates count as exact
_ROUNDOFF = 1e-14


@dataclass(frozen=True)
class BalsConfig:
    """Options for :func:`tr_bals`.

    epsilon_p
        Target relative error.
    max_sweeps, stall_tolerance
        Sweep budget, and the minimum relative improvement of the error over
        one sweep before the run counts as stalled.
    max_rank
        Hard cap on every bond rank; ``None`` means ``ceil(sqrt(prod(n)))``.
    rng_seed
        Seed for the Gaussian initial cores.
    threshold_ref
        Norm that scales the truncation threshold
        ``max(eps, eps_p) * ref / sqrt(d)``: ``"fit"`` uses the norm of the
        least-squares fit of the current block, ``"tensor"`` uses ``||T||``.
        The two agree once the error is small.
    monotone
        Never accept a block update that raises the error; keep more singular
        triplets instead, or reject the update.
    max_rest_elements
        Memory guard: bond ranks are capped so that the rest-of-ring matrix
        of either neighbouring block stays below this many entries.
    """

    epsilon_p: float
    max_sweeps: int = 50
    stall_tolerance: float = 1e-4
    max_rank: int | None = None
    rng_seed: int = 0
    threshold_ref: str = "fit"
    monotone: bool = True
    max_rest_elements: int | None = 50_000_000

    def __post_init__(self):
        if not self.epsilon_p > 0:
            raise ValueError("epsilon_p must be positive")
        if self.max_sweeps < 1:
            raise ValueError("max_sweeps must be >= 1")
        if self.threshold_ref not in ("fit", "tensor"):
            raise ValueError("threshold_ref must be 'fit' or 'tensor'")
        if self.max_rank is not None and self.max_rank < 1:
            raise ValueError("max_rank must be >= 1")


@dataclass(frozen=True)
class BalsRecord:
    sweep: int
    block_k: int  # 1-based index of the first core of the block
    rank_k1: int  # bond rank between the two cores after the update
    epsilon: float
    elapsed_ms: float


@dataclass
class BalsTrace:
    records: list[BalsRecord] = field(default_factory=list)
    converged: bool = False
    status: str = "running"
    sweeps: int = 0
    epsilon: float = math.inf

    def to_csv(self, path) -> None:
        with open(path, "w") as f:
            f.write("sweep,block_k,rank_k1,epsilon,elapsed_ms\n")
            for r in self.records:
                f.write(f"{r.sweep},{r.block_k},{r.rank_k1},{r.epsilon!r},{r.elapsed_ms:.3f}\n")


class _Frames:
    """Unfoldings of the target with modes (k, k+1) as rows, cached per block."""

    def __init__(self, t: np.ndarray):
        self.t = t
        self._cache: dict[int, np.ndarray] = {}

    def __getitem__(self, k: int) -> np.ndarray:
        if k not in self._cache:
            shifted = circular_shift_dims(self.t, k)
            rows = shifted.shape[0] * shifted.shape[1]
            self._cache[k] = shifted.reshape(rows, -1, order="F")
        return self._cache[k]


def rest_matrix(cores: list[np.ndarray], k: int) -> np.ndarray:
    """Mode-2 unfolding of the chain of every core except ``k`` and ``k+1`` (0-based).

    Shape ``M x (r_k r_{k+2})`` with column index ``alpha_k + r_k * alpha_{k+2}``.
    For ``d == 2`` the chain is empty and this is ``vec(I)`` as a single row.
    """
    d = len(cores)
    if d == 2:
        r = cores[k].shape[0]
        return np.eye(r).reshape(1, r * r, order="F")
    return subchain_unfolding(subchain(TRTensor(cores), (k + 2) % d, (k - 1) % d))


def block_to_matrix(x: np.ndarray, r_k: int, n_k: int, n_k1: int, r_k2: int) -> np.ndarray:
    """LS layout ``(i_k i_{k+1}) x (alpha_k alpha_{k+2})`` -> ``(alpha_k i_k) x (i_{k+1} alpha_{k+2})``."""
    b = x.reshape(n_k, n_k1, r_k, r_k2, order="F").transpose(2, 0, 1, 3)
    return b.reshape(r_k * n_k, n_k1 * r_k2, order="F")


def matrix_to_block(b: np.ndarray, r_k: int, n_k: int, n_k1: int, r_k2: int) -> np.ndarray:
    """Inverse of :func:`block_to_matrix`."""
    x = b.reshape(r_k, n_k, n_k1, r_k2, order="F").transpose(1, 2, 0, 3)
    return x.reshape(n_k * n_k1, r_k * r_k2, order="F")


def _memory_cap(cores: list[np.ndarray], k: int, max_rest: int | None) -> int:
    """Largest bond rank r_{k+1} keeping both neighbouring rest matrices within budget."""
    d = len(cores)
    if max_rest is None or d < 3:
        return sys.maxsize
    n = [c.shape[1] for c in cores]
    total = math.prod(n)
    cap = sys.maxsize
    # block (k+1, k+2) sees r_{k+1} r_{k+3}; block (k-1, k) sees r_{k-1} r_{k+1}
    for j, far in (((k + 1) % d, cores[(k + 3) % d].shape[0]), ((k - 1) % d, cores[(k - 1) % d].shape[0])):
        rows = total // (n[j] * n[(j + 1) % d])
        cap = min(cap, max_rest // (rows * far))
    return max(cap, 1)


def _tail_errors(res, gram: np.ndarray, dims: tuple[int, int, int, int]) -> np.ndarray:
    """``out[r]`` = squared tensor-space error of dropping all triplets after the first ``r``.

    The block enters the fit as ``X A^T``, so dropping a part ``D`` of ``X``
    costs ``tr(D G D^T)`` with ``G = A^T A``; this is exact because the
    least-squares residual is orthogonal to the range of ``A``.
    """
    full = res.rank
    layouts = np.stack(
        [matrix_to_block(np.outer(res.u[:, j], res.v[:, j]), *dims) for j in range(full)]
    )  # full x P x q
    weighted = layouts @ gram
    h = np.einsum("ipq,jpq->ij", layouts, weighted)
    m = np.outer(res.sigma, res.sigma) * h
    # out[r] = sum(m[r:, r:])
    tail = np.cumsum(np.cumsum(m[::-1, ::-1], axis=0), axis=1)[::-1, ::-1]
    out = np.zeros(full + 1)
    out[:full] = np.diag(tail)
    return np.maximum(out, 0.0)


def _refit_right(u: np.ndarray, x: np.ndarray, gram: np.ndarray, dims) -> np.ndarray:
    """Best right factor for a fixed left-orthonormal ``u`` in the tensor-space metric.

    Minimizes ``||(x - block(u @ sv)) A^T||_F`` over ``sv`` (``r x n_{k+1} r_{k+2}``).
    The problem splits over ``i_{k+1}`` and every slice shares one normal
    matrix of size ``r r_{k+2}``, so it costs far less than the block solve.
    """
    r_k, n_k, n_k1, r_k2 = dims
    r = u.shape[1]
    u3 = u.reshape(r_k, n_k, r, order="F")  # [a, i, beta]
    g4 = gram.reshape(r_k, r_k2, r_k, r_k2, order="F")  # [a, c, a', c']
    x4 = x.reshape(n_k, n_k1, r_k, r_k2, order="F")  # [i, j, a, c]
    h = np.einsum("aib,acde,dif->bcfe", u3, g4, u3, optimize=True).reshape(r * r_k2, -1, order="F")
    rhs = np.einsum("aib,acde,ijde->bcj", u3, g4, x4, optimize=True).reshape(r * r_k2, n_k1, order="F")
    v = solve_least_squares(h, rhs).reshape(r, r_k2, n_k1, order="F")
    return v.transpose(0, 2, 1).reshape(r, n_k1 * r_k2, order="F")


def _update_block(
    cores: list[np.ndarray],
    k: int,
    unfolding: np.ndarray,
    norm_t: float,
    eps_prev: float,
    cfg: BalsConfig,
    max_rank: int,
    grow: bool,
) -> float:
    """Refit cores ``k, k+1`` (0-based) in place and return the new relative error."""
    d = len(cores)
    k1 = (k + 1) % d
    r_k, n_k, r_old = cores[k].shape
    _, n_k1, r_k2 = cores[k1].shape
    dims = (r_k, n_k, n_k1, r_k2)

    a = rest_matrix(cores, k)
    # least-squares solution nearest to the current block: when A has a null
    # space this keeps the existing low-rank structure instead of spreading
    # the fit across it (which is what the minimum-norm solution does)
    x_old = matrix_to_block(core_unfold_2(cores[k]) @ core_unfold_1(cores[k1]), *dims)
    x = x_old + solve_least_squares(a, (unfolding - x_old @ a.T).T).T
    gram = a.T @ a
    fit_sq = max(float(np.einsum("pq,pq->", x @ gram, x)), 0.0)
    ls_err_sq = float(np.linalg.norm(unfolding - x @ a.T) ** 2)

    res = truncated_svd(block_to_matrix(x, *dims), 0.0)
    if res.rank == 0:
        # all-zero block: keep a unit direction so the ring stays valid
        u = np.zeros((r_k * n_k, 1))
        u[0, 0] = 1.0
        cores[k] = u.reshape(r_k, n_k, 1, order="F")
        cores[k1] = np.zeros((1, n_k1, r_k2))
        return float(np.linalg.norm(unfolding) / norm_t)

    tails = _tail_errors(res, gram, dims)
    ref = math.sqrt(fit_sq) if cfg.threshold_ref == "fit" else norm_t
    scale = ref / math.sqrt(d)
    delta = max(eps_prev, cfg.epsilon_p) * scale

    def rank_for(delta: float) -> int:
        return int(np.argmax(tails <= delta**2))

    def err_sq_at(r: int) -> tuple[float, np.ndarray]:
        sv = _refit_right(res.u[:, :r], x, gram, dims)
        diff = x - matrix_to_block(res.u[:, :r] @ sv, *dims)
        return ls_err_sq + max(float(np.einsum("pq,pq->", diff @ gram, diff)), 0.0), sv

    cap = max(1, min(max_rank, _memory_cap(cores, k, cfg.max_rest_elements), res.rank))
    rank = max(1, min(rank_for(delta), cap))
    if grow:
        rank = max(rank, min(rank_for(cfg.epsilon_p * scale), r_old + 1, cap))
    else:
        # the refit right factor can only do better than sigma V^T, so the
        # smallest rank meeting the threshold may be lower; the refit error is
        # non-increasing in the rank, so bisect
        target = ls_err_sq + delta**2
        lo, hi = 1, rank
        while lo < hi:
            mid = (lo + hi) // 2
            if err_sq_at(mid)[0] <= target:
                hi = mid
            else:
                lo = mid + 1
        rank = lo
    err_sq, sv = err_sq_at(rank)
    if cfg.monotone:
        limit = (eps_prev * norm_t) ** 2 * (1 + _MONOTONE_RTOL) + (_ROUNDOFF * norm_t) ** 2
        while err_sq > limit and rank < cap:
            rank += 1
            err_sq, sv = err_sq_at(rank)
        if err_sq > limit:
            return eps_prev  # nothing within the caps beats the current cores

    u = res.u[:, :rank]
    cores[k] = u.reshape(r_k, n_k, rank, order="F")
    cores[k1] = sv.reshape(rank, n_k1, r_k2, order="F")
    approx = matrix_to_block(u @ sv, *dims)
    return float(np.linalg.norm(unfolding - approx @ a.T) / norm_t)


def tr_bals(t: np.ndarray, cfg: BalsConfig | float) -> tuple[TRTensor, BalsTrace]:
    """Fit a tensor ring to ``t`` by block-wise ALS.

    All ranks start at 1 with seeded standard-normal cores. Blocks are
    visited circularly ``(1,2), (2,3), ..., (d,1)``. Each block is the
    least-squares optimum given the other cores; it is split by a truncated
    SVD: the left core is the leading left singular vectors, the right core
    is refitted for them, and the rank is the smallest whose truncation costs
    at most ``max(eps, eps_p) * ref / sqrt(d)`` in tensor norm, where ``eps``
    is the current relative error.

    Stops as soon as the error reaches ``eps_p``. If a sweep improves the
    error by less than ``stall_tolerance`` (relative), the next sweep lets
    each bond grow by one toward the ``eps_p`` threshold; a second stalled
    sweep in a row, or exhausting ``max_sweeps``, ends the run unconverged.
    The best ring seen is returned either way, and ``trace.epsilon`` is its
    error recomputed from the dense reconstruction.
    """
    if not isinstance(cfg, BalsConfig):
        cfg = BalsConfig(epsilon_p=float(cfg))
    t = as_tensor(t)
    d = t.ndim
    if d < 2:
        raise ValueError("TR-BALS needs a tensor of order >= 2")
    norm_t = float(np.linalg.norm(t.ravel()))
    if norm_t == 0:
        raise ArithmeticError("cannot decompose a zero-norm tensor")
    max_rank = cfg.max_rank or math.ceil(math.sqrt(t.size))

    rng = np.random.default_rng(cfg.rng_seed)
    cores = [rng.standard_normal((1, n, 1)) for n in t.shape]
    eps = relative_error(t, to_dense(TRTensor(cores)))
    frames = _Frames(t)
    trace = BalsTrace(epsilon=eps)
    best_eps, best = eps, list(cores)
    start = time.perf_counter()

    sweep_start_eps = eps
    grow = False
    for sweep in range(1, cfg.max_sweeps + 1):
        trace.sweeps = sweep
        for k in range(d):
            eps = _update_block(cores, k, frames[k], norm_t, eps, cfg, max_rank, grow)
            elapsed = (time.perf_counter() - start) * 1e3
            trace.records.append(BalsRecord(sweep, k + 1, cores[k].shape[2], eps, elapsed))
            if eps < best_eps:
                best_eps, best = eps, list(cores)
            if eps <= cfg.epsilon_p:
                trace.converged = True
                break
        log.debug("sweep %d: eps=%.3e ranks=%s", sweep, eps, [c.shape[0] for c in cores])
        if trace.converged:
            trace.status = "converged"
            break
        stalled = sweep_start_eps - eps < cfg.stall_tolerance * sweep_start_eps
        if stalled and grow:
            trace.status = "stalled"
            break
        grow = stalled
        sweep_start_eps = eps
    else:
        trace.status = "max_sweeps"

    ring = TRTensor(best)
    trace.epsilon = relative_error(t, to_dense(ring))
    return ring, trace
