"""Arithmetic directly on tensor-ring cores.

None of these functions form a dense tensor. Ranks grow under ``add``
(``r_k + s_k``) and ``hadamard`` (``r_k * s_k``) and are not reduced
afterwards; recompress explicitly if that matters.
"""
from __future__ import annotations

from typing import Sequence

import numpy as np

from .tr_core import TRTensor

__all__ = [
    "add",
    "scale",
    "negate",
    "multilinear_product",
    "hadamard",
    "inner_product",
    "frobenius_norm",
]


def _same_shape(a: TRTensor, b: TRTensor) -> None:
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")


def add(a: TRTensor, b: TRTensor) -> TRTensor:
    """Sum of two rings; each slice is ``diag(Z_k(i), Y_k(i))``."""
    _same_shape(a, b)
    cores = []
    for z, y in zip(a.cores, b.cores):
        r, n, r1 = z.shape
        s, _, s1 = y.shape
        x = np.zeros((r + s, n, r1 + s1))
        x[:r, :, :r1] = z
        x[r:, :, r1:] = y
        cores.append(x)
    return TRTensor(cores)


def scale(a: TRTensor, c: float) -> TRTensor:
    """Multiply the represented tensor by ``c`` (only the first core is scaled)."""
    return TRTensor((a[0] * c,) + a.cores[1:])


def negate(a: TRTensor) -> TRTensor:
    return scale(a, -1.0)


def multilinear_product(t: TRTensor, vectors: Sequence[np.ndarray]) -> float:
    """Contract every mode of ``t`` with a vector: ``T x_1 u_1 ... x_d u_d``.

    Each core collapses to ``X_k = sum_i Z_k(i) u_k(i)``; the result is
    ``Tr(X_1 ... X_d)``.
    """
    if len(vectors) != t.d:
        raise ValueError(f"need {t.d} vectors, got {len(vectors)}")
    prod = None
    for k, (core, u) in enumerate(zip(t.cores, vectors)):
        u = np.asarray(u, dtype=np.float64)
        if u.shape != (core.shape[1],):
            raise ValueError(f"vector {k} has shape {u.shape}, expected ({core.shape[1]},)")
        x = np.tensordot(core, u, axes=(1, 0))
        prod = x if prod is None else prod @ x
    return float(np.trace(prod))


def _kron_slices(z: np.ndarray, y: np.ndarray) -> np.ndarray:
    # slice i of the result is kron(Z(i), Y(i)), Z as the left operand
    r, n, r1 = z.shape
    s, _, s1 = y.shape
    x = np.einsum("aib,cid->acibd", z, y)
    return x.reshape(r * s, n, r1 * s1)


def hadamard(a: TRTensor, b: TRTensor) -> TRTensor:
    """Elementwise product; each slice is ``kron(Z_k(i), Y_k(i))``."""
    _same_shape(a, b)
    return TRTensor(_kron_slices(z, y) for z, y in zip(a.cores, b.cores))


def inner_product(a: TRTensor, b: TRTensor) -> float:
    """``<A, B>`` as the all-ones multilinear product of ``hadamard(a, b)``.

    The Hadamard cores are never built: each step folds the slice sum
    ``sum_i kron(Z_k(i), Y_k(i))`` straight into the running product.
    """
    _same_shape(a, b)
    prod = None
    for z, y in zip(a.cores, b.cores):
        r, _, r1 = z.shape
        s, _, s1 = y.shape
        x = np.einsum("aib,cid->acbd", z, y).reshape(r * s, r1 * s1)
        prod = x if prod is None else prod @ x
    return float(np.trace(prod))


def frobenius_norm(t: TRTensor) -> float:
    return float(np.sqrt(max(inner_product(t, t), 0.0)))
