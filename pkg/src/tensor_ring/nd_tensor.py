"""Dense tensors with a first-index-fastest linearization.

Dense tensors are plain ``numpy.ndarray`` objects. Every reshape in this
package uses Fortran (column-major) ordering, so the linear index of the
0-based multi-index ``(i_1, ..., i_d)`` is ``sum_k i_k * prod_{j<k} n_j``.
The grouped row/column indices of unfoldings follow the same rule.

Public functions take 0-based indices and never modify their inputs.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

__all__ = [
    "Unfolding",
    "as_tensor",
    "linear_index",
    "multi_index",
    "unfold_k",
    "unfold_mode_k",
    "fold",
    "permute_dims",
    "circular_shift_dims",
    "tensorize",
    "flatten",
    "relative_error",
    "read_dtns",
    "write_dtns",
    "read_csv_tensor",
]

DTNS_MAGIC = b"DTNS"
DTNS_VERSION = 1


def as_tensor(data, shape: Sequence[int] | None = None) -> np.ndarray:
    """Return ``data`` as a float64 array, optionally checking its shape."""
    t = np.asarray(data, dtype=np.float64)
    if t.ndim < 1:
        raise ValueError("a tensor needs at least one dimension")
    if any(n < 1 for n in t.shape):
        raise ValueError(f"all dimensions must be >= 1, got {t.shape}")
    if shape is not None and tuple(t.shape) != tuple(shape):
        raise ValueError(f"expected shape {tuple(shape)}, got {t.shape}")
    return t


def _check_shape(shape: Sequence[int]) -> tuple[int, ...]:
    shape = tuple(int(n) for n in shape)
    if len(shape) < 1 or any(n < 1 for n in shape):
        raise ValueError(f"invalid shape {shape}")
    return shape


def linear_index(idx: Sequence[int], shape: Sequence[int]) -> int:
    """First-index-fastest linear index of a 0-based multi-index."""
    shape = _check_shape(shape)
    if len(idx) != len(shape):
        raise ValueError("index length does not match tensor order")
    lin, stride = 0, 1
    for i, n in zip(idx, shape):
        if not 0 <= i < n:
            raise IndexError(f"index {tuple(idx)} out of bounds for shape {shape}")
        lin += int(i) * stride
        stride *= n
    return lin


def multi_index(lin: int, shape: Sequence[int]) -> tuple[int, ...]:
    """Inverse of :func:`linear_index`."""
    shape = _check_shape(shape)
    if not 0 <= lin < int(np.prod(shape)):
        raise IndexError(f"linear index {lin} out of bounds for shape {shape}")
    out = []
    for n in shape:
        out.append(lin % n)
        lin //= n
    return tuple(out)


@dataclass(frozen=True)
class Unfolding:
    """Describes which unfolding produced a matrix, so that it can be folded back.

    ``kind`` is ``"k"`` for the k-unfolding (first ``k`` modes as rows) and
    ``"mode"`` for the mode-k unfolding (mode ``k`` as rows, the remaining
    modes circularly ordered from ``k+1`` as columns). ``k`` is 1-based, as
    in the math.
    """

    kind: str
    k: int


def unfold_k(t: np.ndarray, k: int) -> np.ndarray:
    """k-unfolding: rows group modes ``1..k``, columns group ``k+1..d``."""
    t = as_tensor(t)
    d = t.ndim
    if not 1 <= k <= d - 1:
        raise ValueError(f"k-unfolding needs 1 <= k <= d-1, got k={k}, d={d}")
    rows = int(np.prod(t.shape[:k]))
    return t.reshape(rows, -1, order="F")


def unfold_mode_k(t: np.ndarray, k: int) -> np.ndarray:
    """Mode-k unfolding with columns indexed by ``(i_{k+1}, ..., i_d, i_1, ..., i_{k-1})``."""
    t = as_tensor(t)
    d = t.ndim
    if not 1 <= k <= d:
        raise ValueError(f"mode-k unfolding needs 1 <= k <= d, got k={k}, d={d}")
    shifted = circular_shift_dims(t, k - 1)
    return shifted.reshape(t.shape[k - 1], -1, order="F")


def fold(m: np.ndarray, shape: Sequence[int], scheme: Unfolding) -> np.ndarray:
    """Inverse of :func:`unfold_k` / :func:`unfold_mode_k`."""
    shape = _check_shape(shape)
    m = np.asarray(m, dtype=np.float64)
    if m.size != int(np.prod(shape)):
        raise ValueError(f"cannot fold {m.size} elements into shape {shape}")
    d = len(shape)
    if scheme.kind == "k":
        if not 1 <= scheme.k <= d - 1:
            raise ValueError(f"invalid k={scheme.k} for order {d}")
        return m.reshape(shape, order="F")
    if scheme.kind == "mode":
        if not 1 <= scheme.k <= d:
            raise ValueError(f"invalid k={scheme.k} for order {d}")
        s = scheme.k - 1
        shifted_shape = shape[s:] + shape[:s]
        return circular_shift_dims(m.reshape(shifted_shape, order="F"), -s)
    raise ValueError(f"unknown unfolding kind {scheme.kind!r}")


def permute_dims(t: np.ndarray, perm: Sequence[int]) -> np.ndarray:
    """Permute modes; ``perm`` is a 1-based permutation of ``1..d``.

    Mode ``j`` of the result is mode ``perm[j]`` of ``t``.
    """
    t = as_tensor(t)
    perm = [int(p) for p in perm]
    if sorted(perm) != list(range(1, t.ndim + 1)):
        raise ValueError(f"{perm} is not a permutation of 1..{t.ndim}")
    return np.transpose(t, [p - 1 for p in perm]).copy(order="F")


def circular_shift_dims(t: np.ndarray, k: int) -> np.ndarray:
    """Shift modes circularly: the result has modes ``(k+1, ..., d, 1, ..., k)``."""
    t = as_tensor(t)
    d = t.ndim
    k %= d
    return permute_dims(t, [(k + j) % d + 1 for j in range(d)])


def tensorize(v: np.ndarray, shape: Sequence[int]) -> np.ndarray:
    """Fold a vector into ``shape`` with the first index running fastest."""
    shape = _check_shape(shape)
    v = np.asarray(v, dtype=np.float64).ravel()
    if v.size != int(np.prod(shape)):
        raise ValueError(f"vector of length {v.size} does not fit shape {shape}")
    return v.reshape(shape, order="F")


def flatten(t: np.ndarray) -> np.ndarray:
    return as_tensor(t).ravel(order="F")


def relative_error(t: np.ndarray, approx: np.ndarray) -> float:
    """``||t - approx||_F / ||t||_F``."""
    t = as_tensor(t)
    approx = as_tensor(approx)
    if t.shape != approx.shape:
        raise ValueError(f"shape mismatch {t.shape} vs {approx.shape}")
    ref = np.linalg.norm(t.ravel())
    if ref == 0:
        raise ArithmeticError("relative error undefined for a zero-norm reference")
    return float(np.linalg.norm((t - approx).ravel()) / ref)


# -- file formats ---------------------------------------------------------


def write_dtns(path: str | Path, t: np.ndarray) -> None:
    t = as_tensor(t)
    with open(path, "wb") as f:
        f.write(DTNS_MAGIC)
        f.write(struct.pack("<II", DTNS_VERSION, t.ndim))
        f.write(struct.pack(f"<{t.ndim}Q", *t.shape))
        f.write(flatten(t).astype("<f8").tobytes())


def read_dtns(path: str | Path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != DTNS_MAGIC:
        raise ValueError(f"{path}: not a DTNS file")
    version, d = struct.unpack_from("<II", raw, 4)
    if version != DTNS_VERSION:
        raise ValueError(f"{path}: unsupported DTNS version {version}")
    if d < 1:
        raise ValueError(f"{path}: tensor order must be >= 1")
    shape = struct.unpack_from(f"<{d}Q", raw, 12)
    offset = 12 + 8 * d
    count = int(np.prod(shape))
    if len(raw) - offset != 8 * count:
        raise ValueError(f"{path}: expected {count} values, file is truncated or padded")
    values = np.frombuffer(raw, dtype="<f8", count=count, offset=offset)
    return tensorize(values.astype(np.float64), shape)


def read_csv_tensor(path: str | Path, shape: Sequence[int]) -> np.ndarray:
    """Read a flat CSV (one value per line) and fold it into ``shape``."""
    values = np.loadtxt(path, dtype=np.float64, delimiter=",", ndmin=1)
    return tensorize(values, shape)
