"""Brute-force oracles and hypothesis strategies shared by the test modules."""
import itertools

import numpy as np
from hypothesis import strategies as st

from tensor_ring import TRTensor


def dense_oracle(ring: TRTensor) -> np.ndarray:
    """Elementwise ``Tr(Z_1(i_1) ... Z_d(i_d))`` by explicit loops."""
    out = np.empty(ring.shape)
    for idx in itertools.product(*(range(n) for n in ring.shape)):
        m = np.eye(ring.ranks[0])
        for core, i in zip(ring.cores, idx):
            m = m @ core[:, i, :]
        out[idx] = np.trace(m)
    return out


def fortran_index(idx, shape) -> int:
    lin, stride = 0, 1
    for i, n in zip(idx, shape):
        lin += i * stride
        stride *= n
    return lin


@st.composite
def ring_dims(draw, d_values=(2, 3, 4), max_n=4, max_r=3):
    d = draw(st.sampled_from(d_values))
    shape = tuple(draw(st.lists(st.integers(1, max_n), min_size=d, max_size=d)))
    ranks = tuple(draw(st.lists(st.integers(1, max_r), min_size=d, max_size=d)))
    return shape, ranks


@st.composite
def rings(draw, d_values=(2, 3, 4), max_n=4, max_r=3, shape=None):
    if shape is None:
        shape, ranks = draw(ring_dims(d_values, max_n, max_r))
    else:
        d = len(shape)
        ranks = tuple(draw(st.lists(st.integers(1, max_r), min_size=d, max_size=d)))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    d = len(shape)
    return TRTensor(rng.standard_normal((ranks[k], shape[k], ranks[(k + 1) % d])) for k in range(d))


@st.composite
def ring_pairs(draw, max_r=3):
    a = draw(rings(max_r=max_r))
    b = draw(rings(max_r=max_r, shape=a.shape))
    return a, b


def dense_arrays(max_d=4, max_n=4):
    shapes = st.lists(st.integers(1, max_n), min_size=1, max_size=max_d).map(tuple)
    return shapes.flatmap(
        lambda s: st.integers(0, 2**32 - 1).map(lambda seed: np.random.default_rng(seed).standard_normal(s))
    )
