import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import dense_arrays, fortran_index
from tensor_ring.nd_tensor import (
    Unfolding,
    circular_shift_dims,
    flatten,
    fold,
    linear_index,
    multi_index,
    permute_dims,
    read_csv_tensor,
    read_dtns,
    relative_error,
    tensorize,
    unfold_k,
    unfold_mode_k,
    write_dtns,
)


def test_unfold_k_brute_force():
    t = np.arange(12.0).reshape(2, 3, 2) + 1
    m = unfold_k(t, 1)
    assert m.shape == (2, 6)
    for i1, i2, i3 in itertools.product(range(2), range(3), range(2)):
        assert m[i1, i2 + 3 * i3] == t[i1, i2, i3]


def test_unfold_mode_k_brute_force():
    t = np.random.default_rng(0).standard_normal((2, 3, 2))
    m = unfold_mode_k(t, 2)
    assert m.shape == (3, 4)
    for i1, i2, i3 in itertools.product(range(2), range(3), range(2)):
        # columns group (i3, i1), i3 fastest
        assert m[i2, i3 + 2 * i1] == t[i1, i2, i3]


def test_unfold_mode_1_equals_unfold_k_1():
    t = np.random.default_rng(1).standard_normal((3, 2, 4))
    np.testing.assert_array_equal(unfold_mode_k(t, 1), unfold_k(t, 1))


def test_unfold_errors_and_zero():
    with pytest.raises(ValueError):
        unfold_k(np.zeros(4), 1)
    with pytest.raises(ValueError):
        unfold_mode_k(np.zeros((2, 2)), 3)
    np.testing.assert_array_equal(unfold_k(np.zeros((2, 3, 4)), 2), np.zeros((6, 4)))
    np.testing.assert_array_equal(unfold_mode_k(np.zeros((2, 3, 4)), 3), np.zeros((4, 6)))


def test_fold_count_mismatch():
    with pytest.raises(ValueError):
        fold(np.zeros((2, 3)), (2, 2), Unfolding("k", 1))


@given(dense_arrays(), st.data())
def test_fold_inverts_unfoldings(t, data):
    d = t.ndim
    k = data.draw(st.integers(1, d))
    assert np.array_equal(fold(unfold_mode_k(t, k), t.shape, Unfolding("mode", k)), t)
    if d >= 2:
        k = data.draw(st.integers(1, d - 1))
        assert np.array_equal(fold(unfold_k(t, k), t.shape, Unfolding("k", k)), t)


@given(dense_arrays(), st.data())
def test_mode_unfolding_is_shifted_first_unfolding(t, data):
    k = data.draw(st.integers(1, t.ndim))
    shifted = circular_shift_dims(t, k - 1)
    expected = shifted.reshape(shifted.shape[0], -1, order="F")
    assert np.array_equal(unfold_mode_k(t, k), expected)


def test_permute_dims_brute_force():
    t = np.random.default_rng(2).standard_normal((2, 3, 4))
    p = permute_dims(t, (2, 3, 1))
    assert p.shape == (3, 4, 2)
    for i, j, k in itertools.product(range(2), range(3), range(4)):
        assert p[j, k, i] == t[i, j, k]
    with pytest.raises(ValueError):
        permute_dims(t, (1, 1, 2))


@given(dense_arrays(), st.randoms(use_true_random=False))
def test_permute_inverse_and_norm(t, rnd):
    perm = list(range(1, t.ndim + 1))
    rnd.shuffle(perm)
    inv = [perm.index(j) + 1 for j in range(1, t.ndim + 1)]
    p = permute_dims(t, perm)
    assert np.array_equal(permute_dims(p, inv), t)
    assert sorted(p.ravel()) == sorted(t.ravel())


@given(dense_arrays(), st.integers(-7, 7), st.integers(-7, 7))
def test_circular_shift_group(t, k1, k2):
    d = t.ndim
    assert np.array_equal(circular_shift_dims(t, 0), t)
    assert np.array_equal(circular_shift_dims(t, d), t)
    assert np.array_equal(circular_shift_dims(circular_shift_dims(t, k1), k2), circular_shift_dims(t, k1 + k2))


def test_circular_shift_shape():
    assert circular_shift_dims(np.zeros((2, 3, 4)), 1).shape == (3, 4, 2)


def test_tensorize_linearization():
    t = tensorize([1, 2, 3, 4], (2, 2))
    assert (t[0, 0], t[1, 0], t[0, 1], t[1, 1]) == (1, 2, 3, 4)
    np.testing.assert_array_equal(flatten(t), [1, 2, 3, 4])
    with pytest.raises(ValueError):
        tensorize(np.arange(4), (2, 3))


@given(st.lists(st.integers(1, 4), min_size=1, max_size=4), st.data())
def test_linear_index_round_trip(shape, data):
    idx = tuple(data.draw(st.integers(0, n - 1)) for n in shape)
    lin = linear_index(idx, shape)
    assert lin == fortran_index(idx, shape)
    assert multi_index(lin, shape) == idx


def test_index_bounds():
    with pytest.raises(IndexError):
        linear_index((2, 0), (2, 2))
    with pytest.raises(IndexError):
        multi_index(4, (2, 2))


def test_relative_error_cases():
    t = np.array([3.0, 4.0])
    assert relative_error(t, t) == 0
    assert relative_error(t, np.zeros(2)) == 1
    assert relative_error(t, np.array([3.0, 0.0])) == pytest.approx(0.8)
    with pytest.raises(ArithmeticError):
        relative_error(np.zeros(2), t)
    with pytest.raises(ValueError):
        relative_error(t, np.zeros(3))


@settings(max_examples=25)
@given(dense_arrays())
def test_dtns_round_trip(tmp_path_factory, t):
    path = tmp_path_factory.mktemp("dtns") / "t.dtns"
    write_dtns(path, t)
    back = read_dtns(path)
    assert back.shape == t.shape and np.array_equal(back, t)


def test_dtns_layout_and_corruption(tmp_path):
    t = np.arange(6.0).reshape(2, 3, order="F")
    path = tmp_path / "t.dtns"
    write_dtns(path, t)
    raw = path.read_bytes()
    assert raw[:4] == b"DTNS"
    assert np.array_equal(np.frombuffer(raw[12 + 16 :], "<f8"), np.arange(6.0))
    path.write_bytes(raw[:-8])
    with pytest.raises(ValueError):
        read_dtns(path)
    path.write_bytes(b"XXXX" + raw[4:])
    with pytest.raises(ValueError):
        read_dtns(path)


def test_csv_tensor(tmp_path):
    path = tmp_path / "v.csv"
    path.write_text("1\n2\n3\n4\n5\n6\n")
    t = read_csv_tensor(path, (2, 3))
    assert t[1, 0] == 2 and t[0, 1] == 3
    with pytest.raises(ValueError):
        read_csv_tensor(path, (4, 2))
