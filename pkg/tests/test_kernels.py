"""Hot-kernel equivalence: jitted loops vs pure-numpy implementations."""

import numpy as np
import pytest

from pere import geometry
from pere._kernels import (
    NUMBA_ENABLED,
    _greedy_map_loop,
    _greedy_map_nb,
    _greedy_map_py,
    _hyperplane_gap_sums_loop,
    _hyperplane_gap_sums_nb,
    _hyperplane_gap_sums_py,
    greedy_map_order,
    hyperplane_gap_sums,
)


def random_psd(rng, n):
    emb = rng.uniform(size=(n, 4))
    L = emb @ emb.T
    L[np.diag_indices_from(L)] += rng.uniform(0.01, 1.0, n)
    return L


def test_gap_sums_python_variants_agree():
    rng = np.random.default_rng(0)
    for _ in range(30):
        n_c = int(rng.integers(1, 40))
        n_r = int(rng.integers(1, 15))
        d = int(rng.integers(1, 8))
        cand = rng.uniform(size=(n_c, d))
        rated = rng.uniform(size=(n_r, d))
        center = rng.uniform(size=d)
        a = _hyperplane_gap_sums_py(cand, rated, center)
        b = _hyperplane_gap_sums_loop(cand, rated, center)
        # the vector path expands ||r - c||^2 = |r|^2 + |c|^2 - 2 r.c, so
        # close pairs lose a few low bits to cancellation vs the loop
        np.testing.assert_allclose(a, b, rtol=2e-9, atol=1e-12)


def test_gap_sums_jitted_matches_loop():
    rng = np.random.default_rng(1)
    cand = rng.uniform(size=(25, 5))
    rated = rng.uniform(size=(8, 5))
    center = rng.uniform(size=5)
    jitted = _hyperplane_gap_sums_nb(cand, rated, center)
    plain = _hyperplane_gap_sums_loop(cand, rated, center)
    np.testing.assert_array_equal(jitted, plain)
    if NUMBA_ENABLED:
        np.testing.assert_array_equal(
            hyperplane_gap_sums(cand, rated, center), jitted)


def test_gap_sums_match_cut_distance_definition():
    rng = np.random.default_rng(2)
    cand = rng.uniform(size=(12, 3))
    rated = rng.uniform(size=(5, 3))
    center = rng.uniform(size=3)
    got = hyperplane_gap_sums(cand, rated, center)
    for i in range(cand.shape[0]):
        expected = sum(
            geometry.cut_distance(center,
                                  geometry.cut_between(cand[i], rated[j]))
            for j in range(rated.shape[0]))
        assert got[i] == pytest.approx(expected, abs=1e-12)


def test_gap_sums_skip_coincident_pairs():
    cand = np.array([[0.3, 0.3], [0.7, 0.2]])
    rated = np.array([[0.3, 0.3]])
    center = np.array([0.5, 0.5])
    out = hyperplane_gap_sums(cand, rated, center)
    assert out[0] == 0.0
    assert out[1] > 0.0


def test_gap_sums_empty_rated():
    out = hyperplane_gap_sums(np.ones((3, 2)) * 0.5, np.empty((0, 2)),
                              np.array([0.5, 0.5]))
    assert np.array_equal(out, np.zeros(3))


def test_greedy_order_python_variants_agree():
    rng = np.random.default_rng(3)
    for _ in range(30):
        n = int(rng.integers(2, 25))
        k = int(rng.integers(1, n + 1))
        L = random_psd(rng, n)
        blocked = rng.random(n) < 0.2
        if blocked.all():
            blocked[0] = False
        k = min(k, int((~blocked).sum()))
        order_a, count_a = _greedy_map_py(L, k, blocked, 1e-12)
        order_b, count_b = _greedy_map_loop(L, k, blocked, 1e-12)
        assert count_a == count_b
        assert np.array_equal(order_a[:count_a], order_b[:count_b])
        assert not blocked[order_a[:count_a]].any()


def test_greedy_order_jitted_matches_loop():
    rng = np.random.default_rng(4)
    L = random_psd(rng, 20)
    blocked = np.zeros(20, dtype=bool)
    blocked[[3, 7]] = True
    a = _greedy_map_nb(L, 6, blocked, 1e-12)
    b = _greedy_map_loop(L, 6, blocked, 1e-12)
    assert a[1] == b[1]
    assert np.array_equal(a[0], b[0])


def test_greedy_order_gain_floor_stops_early():
    # rank-1 kernel without diagonal boost: second pick has zero gain
    v = np.array([[0.6, 0.8]])
    L = v.T @ v  # 2x2 rank one
    order = greedy_map_order(L, 2, np.zeros(2, dtype=bool))
    assert order.tolist() == [1]  # 0.64 vs 0.36 diagonal, then floor stop


def test_greedy_order_tie_to_lowest_index():
    L = np.diag([2.0, 2.0, 2.0])
    order = greedy_map_order(L, 2, np.zeros(3, dtype=bool))
    assert order.tolist() == [0, 1]


def test_greedy_order_k_zero():
    L = np.diag([1.0, 2.0])
    assert greedy_map_order(L, 0, np.zeros(2, dtype=bool)).size == 0


def test_greedy_order_respects_blocked():
    L = np.diag([5.0, 4.0, 3.0])
    blocked = np.array([True, False, False])
    order = greedy_map_order(L, 2, blocked)
    assert order.tolist() == [1, 2]
