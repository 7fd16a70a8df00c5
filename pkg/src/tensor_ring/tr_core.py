"""Tensor-ring data model.

A ring of ``d`` cores ``Z_k`` of shape ``(r_k, n_k, r_{k+1})`` with
``r_{d+1} = r_1`` represents the tensor whose elements are
``Tr(Z_1(i_1) Z_2(i_2) ... Z_d(i_d))``, where ``Z_k(i)`` is the lateral
slice ``Z_k[:, i, :]``.
"""
from __future__ import annotations

import struct
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "TRTensor",
    "tr_element",
    "to_dense",
    "circular_shift_cores",
    "subchain",
    "subchain_unfolding",
    "num_params",
    "avg_rank",
    "core_unfold_1",
    "core_unfold_2",
    "core_mode_2",
    "random_ring",
    "read_trz",
    "write_trz",
]

TRZ_MAGIC = b"TRZ1"
TRZ_VERSION = 1

# to_dense refuses to allocate more elements than this
MAX_DENSE_ELEMENTS = 2**31


class TRTensor:
    """An immutable ring of third-order cores.

    Adjacent ranks must match and the last core must close the ring onto
    the first; both are checked on construction.
    """

    __slots__ = ("_cores",)

    def __init__(self, cores: Iterable[np.ndarray]):
        cores = [np.array(c, dtype=np.float64, order="F") for c in cores]
        if not cores:
            raise ValueError("a tensor ring needs at least one core")
        for k, c in enumerate(cores):
            if c.ndim != 3:
                raise ValueError(f"core {k} has {c.ndim} dimensions, expected 3")
            if min(c.shape) < 1:
                raise ValueError(f"core {k} has an empty dimension: {c.shape}")
        d = len(cores)
        for k in range(d):
            nxt = cores[(k + 1) % d]
            if cores[k].shape[2] != nxt.shape[0]:
                what = "ring closure" if k == d - 1 else "adjacency"
                raise ValueError(
                    f"{what} violated between core {k} {cores[k].shape} "
                    f"and core {(k + 1) % d} {nxt.shape}"
                )
        for c in cores:
            c.flags.writeable = False
        self._cores = tuple(cores)

    @property
    def cores(self) -> tuple[np.ndarray, ...]:
        return self._cores

    @property
    def d(self) -> int:
        return len(self._cores)

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(c.shape[1] for c in self._cores)

    @property
    def ranks(self) -> tuple[int, ...]:
        """TR-ranks ``(r_1, ..., r_d)``."""
        return tuple(c.shape[0] for c in self._cores)

    def __len__(self) -> int:
        return self.d

    def __getitem__(self, k: int) -> np.ndarray:
        return self._cores[k]

    def __repr__(self) -> str:
        return f"TRTensor(shape={self.shape}, ranks={self.ranks})"


def _check_index(t: TRTensor, idx: Sequence[int]) -> None:
    if len(idx) != t.d:
        raise ValueError(f"index of length {len(idx)} for a ring of order {t.d}")
    for i, n in zip(idx, t.shape):
        if not 0 <= i < n:
            raise IndexError(f"index {tuple(idx)} out of bounds for shape {t.shape}")


def tr_element(t: TRTensor, idx: Sequence[int]) -> float:
    """Single element via the trace of the slice-matrix product (0-based index)."""
    _check_index(t, idx)
    prod = t[0][:, idx[0], :]
    for core, i in zip(t.cores[1:], idx[1:]):
        prod = prod @ core[:, i, :]
    return float(np.trace(prod))


def _merge(acc: np.ndarray, core: np.ndarray) -> np.ndarray:
    # (a, I, c) x (c, i, b) -> (a, I + N*i, b)
    a, n_acc, _ = acc.shape
    _, n, b = core.shape
    merged = np.tensordot(acc, core, axes=(2, 0))
    return merged.reshape(a, n_acc * n, b, order="F")


def subchain(t: TRTensor, start: int, stop: int) -> np.ndarray:
    """Merge the circular run of cores ``start, start+1, ..., stop`` (0-based, inclusive).

    Returns an array of shape ``(r_start, prod n_j, r_{stop+1})`` whose slice at
    the grouped index of ``(i_start, ..., i_stop)`` (first index fastest) is
    the ordered product of the slice matrices. ``stop`` may be smaller than
    ``start``, in which case the run wraps past the last core. The full ring
    is requested with ``stop == start - 1 (mod d)``.
    """
    d = t.d
    if not (0 <= start < d and 0 <= stop < d):
        raise ValueError(f"subchain bounds ({start}, {stop}) out of range for order {d}")
    length = (stop - start) % d + 1
    acc = t[start]
    for j in range(1, length):
        acc = _merge(acc, t[(start + j) % d])
    return np.asarray(acc)


def subchain_unfolding(chain: np.ndarray) -> np.ndarray:
    """Mode-2 unfolding with rows = grouped mode index, columns = ``(alpha_out, alpha_in)``.

    For a merged chain of shape ``(r_in, N, r_out)`` the result is ``N x (r_out r_in)``
    with column index ``alpha_out + r_out * alpha_in``, so that a block ``B``
    with ``vec_F(B)`` indexed ``alpha_in + r_in * alpha_out`` pairs with it as
    ``Tr(B C) = vec(B) . row(C)``.
    """
    r_in, n, r_out = chain.shape
    return np.transpose(chain, (1, 2, 0)).reshape(n, r_out * r_in, order="F")


def to_dense(t: TRTensor) -> np.ndarray:
    """Dense tensor of the ring.

    The ring is cut into two halves that are merged sequentially; the dense
    tensor is the contraction of the halves over both the middle bond and
    the closing bond (the trace).
    """
    count = int(np.prod(t.shape, dtype=object))
    if count > MAX_DENSE_ELEMENTS:
        raise MemoryError(f"dense tensor with {count} elements is too large")
    d = t.d
    if d == 1:
        core = t[0]
        return np.einsum("aia->i", core).copy()
    half = d // 2
    left = subchain(t, 0, half - 1)  # (r_1, N_left, r_{half+1})
    right = subchain(t, half, d - 1)  # (r_{half+1}, N_right, r_1)
    mat = np.tensordot(left, right, axes=([0, 2], [2, 0]))
    return np.asarray(mat).reshape(t.shape, order="F")


def circular_shift_cores(t: TRTensor, k: int) -> TRTensor:
    """Rotate the ring to ``(Z_{k+1}, ..., Z_d, Z_1, ..., Z_k)``."""
    k %= t.d
    return TRTensor(t.cores[k:] + t.cores[:k])


def num_params(t: TRTensor) -> int:
    return int(sum(c.size for c in t.cores))


def avg_rank(t: TRTensor, interior_only: bool = False) -> float:
    """Mean TR-rank.

    ``interior_only`` averages ``r_2..r_d`` only, the convention used for
    tensor-train results whose boundary rank is pinned to 1.
    """
    ranks = t.ranks[1:] if interior_only and t.d > 1 else t.ranks
    return float(np.mean(ranks))


def core_unfold_1(core: np.ndarray) -> np.ndarray:
    """``r_k x (n_k r_{k+1})``."""
    r, n, s = core.shape
    return core.reshape(r, n * s, order="F")


def core_unfold_2(core: np.ndarray) -> np.ndarray:
    """``(r_k n_k) x r_{k+1}``."""
    r, n, s = core.shape
    return core.reshape(r * n, s, order="F")


def core_mode_2(core: np.ndarray) -> np.ndarray:
    """``n_k x (r_k r_{k+1})`` with column index ``alpha_k + r_k * alpha_{k+1}``.

    Works for merged chains as well as single cores.
    """
    r, n, s = core.shape
    return np.transpose(core, (1, 0, 2)).reshape(n, r * s, order="F")


def random_ring(
    shape: Sequence[int], ranks: Sequence[int], rng: np.random.Generator | int | None = None
) -> TRTensor:
    """Ring with standard-normal core entries."""
    rng = np.random.default_rng(rng)
    d = len(shape)
    if len(ranks) != d:
        raise ValueError("need one rank per mode")
    return TRTensor(
        rng.standard_normal((ranks[k], shape[k], ranks[(k + 1) % d])) for k in range(d)
    )


# -- TRZ1 container -------------------------------------------------------


def write_trz(path: str | Path, t: TRTensor) -> None:
    with open(path, "wb") as f:
        f.write(TRZ_MAGIC)
        f.write(struct.pack("<II", TRZ_VERSION, t.d))
        f.write(struct.pack(f"<{t.d}Q", *t.shape))
        f.write(struct.pack(f"<{t.d}Q", *t.ranks))
        for core in t.cores:
            f.write(core.ravel(order="F").astype("<f8").tobytes())


def read_trz(path: str | Path) -> TRTensor:
    raw = Path(path).read_bytes()
    if raw[:4] != TRZ_MAGIC:
        raise ValueError(f"{path}: not a TRZ1 file")
    version, d = struct.unpack_from("<II", raw, 4)
    if version != TRZ_VERSION:
        raise ValueError(f"{path}: unsupported TRZ version {version}")
    if d < 1:
        raise ValueError(f"{path}: ring order must be >= 1")
    shape = struct.unpack_from(f"<{d}Q", raw, 12)
    ranks = struct.unpack_from(f"<{d}Q", raw, 12 + 8 * d)
    offset = 12 + 16 * d
    cores = []
    for k in range(d):
        dims = (ranks[k], shape[k], ranks[(k + 1) % d])
        count = int(np.prod(dims))
        if offset + 8 * count > len(raw):
            raise ValueError(f"{path}: truncated core {k}")
        flat = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
        cores.append(flat.astype(np.float64).reshape(dims, order="F"))
        offset += 8 * count
    if offset != len(raw):
        raise ValueError(f"{path}: trailing bytes after last core")
    return TRTensor(cores)

