import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from tensor_ring.low_rank import delta_rank, solve_least_squares, truncated_svd


def matrices(max_dim=8):
    dims = st.tuples(st.integers(1, max_dim), st.integers(1, max_dim))
    return dims.flatmap(
        lambda s: st.integers(0, 2**32 - 1).map(lambda seed: np.random.default_rng(seed).standard_normal(s))
    )


def test_delta_rank_tail_rule():
    s = np.array([4.0, 3.0, 0.0])
    assert delta_rank(s, 0.0) == 2
    assert delta_rank(s, 2.999) == 2
    assert delta_rank(s, 3.0) == 1  # exact equality keeps the smaller rank
    assert delta_rank(s, 5.0) == 0


def test_diagonal_example():
    res = truncated_svd(np.diag([3.0, 2.0, 1.0]), 1.5)
    assert res.rank == 2
    assert res.discarded_energy == pytest.approx(1.0)
    np.testing.assert_allclose(res.reconstruct(), np.diag([3.0, 2.0, 0.0]), atol=1e-14)


def test_zero_matrix_gives_rank_zero():
    res = truncated_svd(np.zeros((3, 4)), 0.0)
    assert res.rank == 0 and res.u.shape == (3, 0) and res.v.shape == (4, 0)


def test_threshold_above_norm_gives_rank_zero():
    m = np.ones((2, 2))
    assert truncated_svd(m, np.linalg.norm(m)).rank == 0


def test_invalid_inputs():
    with pytest.raises(ValueError):
        truncated_svd(np.array([[np.nan]]), 0.0)
    with pytest.raises(ValueError):
        truncated_svd(np.eye(2), -1.0)
    with pytest.raises(ValueError):
        truncated_svd(np.ones(3), 0.0)


@given(matrices(), st.floats(0, 1))
def test_truncation_contract(m, frac):
    delta = frac * np.linalg.norm(m)
    res = truncated_svd(m, delta)
    err = np.linalg.norm(m - res.reconstruct())
    assert err <= delta * (1 + 1e-10) + 1e-12
    assert err == pytest.approx(res.discarded_energy, abs=1e-10)
    np.testing.assert_allclose(res.u.T @ res.u, np.eye(res.rank), atol=1e-10)
    np.testing.assert_allclose(res.v.T @ res.v, np.eye(res.rank), atol=1e-10)
    assert np.all(np.diff(res.sigma) <= 0)
    # minimality: one triplet fewer would exceed delta
    if res.rank > 0:
        full = np.linalg.svd(m, compute_uv=False)
        assert np.sqrt(np.sum(full[res.rank - 1 :] ** 2)) > delta


@given(matrices())
def test_sign_convention_and_determinism(m):
    a, b = truncated_svd(m, 0.0), truncated_svd(m.copy(), 0.0)
    assert np.array_equal(a.u, b.u) and np.array_equal(a.sigma, b.sigma)
    for j in range(a.rank):
        col = a.u[:, j]
        assert col[np.argmax(np.abs(col))] >= 0


def test_least_squares_exact_and_overdetermined():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((10, 3))
    x = rng.standard_normal((3, 2))
    np.testing.assert_allclose(solve_least_squares(a, a @ x), x, atol=1e-12)
    b = rng.standard_normal(10)
    np.testing.assert_allclose(solve_least_squares(a, b), np.linalg.lstsq(a, b, rcond=None)[0], atol=1e-12)


def test_least_squares_rank_deficient_min_norm():
    a = np.array([[1.0, 1.0], [1.0, 1.0]])
    x = solve_least_squares(a, np.array([2.0, 2.0]))
    np.testing.assert_allclose(x, [1.0, 1.0], atol=1e-12)


def test_least_squares_errors():
    with pytest.raises(ValueError):
        solve_least_squares(np.eye(3), np.ones(2))
    with pytest.raises(ValueError):
        solve_least_squares(np.eye(2), np.array([np.inf, 0.0]))
