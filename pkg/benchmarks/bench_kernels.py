#!/usr/bin/env python3
"""Benchmark the two hot kernels: compiled path vs. plain NumPy.

Times ``hyperplane_gap_sums`` (candidate scoring) and
``greedy_map_order`` (diverse subset selection) at a few realistic
sizes, checks both paths agree, and prints a speedup table.

Run from the repository root::

    python3 benchmarks/bench_kernels.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pere import _kernels


def best_of(repeats: int, fn, *args) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def bench_gap_sums(repeats: int) -> list[tuple[str, float, float]]:
    rows = []
    rng = np.random.default_rng(0)
    for n_cand, n_rated, dim in ((500, 50, 16), (2500, 100, 64),
                                 (10_000, 200, 64)):
        cand = rng.uniform(size=(n_cand, dim))
        rated = rng.uniform(size=(n_rated, dim))
        center = np.full(dim, 0.5)
        numba_t = best_of(repeats, _kernels._hyperplane_gap_sums_nb,
                          cand, rated, center)
        numpy_t = best_of(repeats, _kernels._hyperplane_gap_sums_py,
                          cand, rated, center)
        got_nb = _kernels._hyperplane_gap_sums_nb(cand, rated, center)
        got_py = _kernels._hyperplane_gap_sums_py(cand, rated, center)
        np.testing.assert_allclose(got_nb, got_py, rtol=1e-8)
        rows.append((f"gap sums {n_cand}x{n_rated} d={dim}",
                     numpy_t, numba_t))
    return rows


def bench_greedy(repeats: int) -> list[tuple[str, float, float]]:
    rows = []
    rng = np.random.default_rng(1)
    for n, k in ((300, 50), (1000, 100), (2500, 100)):
        emb = rng.uniform(size=(n, 32))
        gram = emb @ emb.T
        L = gram + 1e-9 * n * np.eye(n)
        blocked = np.zeros(n, dtype=np.bool_)
        numba_t = best_of(repeats, _kernels._greedy_map_nb,
                          L, k, blocked, 1e-12)
        numpy_t = best_of(repeats, _kernels._greedy_map_py,
                          L, k, blocked, 1e-12)
        order_nb, count_nb = _kernels._greedy_map_nb(L, k, blocked, 1e-12)
        order_py, count_py = _kernels._greedy_map_py(L, k, blocked, 1e-12)
        assert count_nb == count_py
        assert np.array_equal(order_nb[:count_nb], order_py[:count_py])
        rows.append((f"greedy pick {k} of {n}", numpy_t, numba_t))
    return rows


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5,
                        help="timed repetitions per case (best is kept)")
    args = parser.parse_args()

    if not _kernels._HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")

    # warm up so JIT compilation stays out of the timings
    warm = np.random.default_rng(2).uniform(size=(8, 4))
    _kernels._hyperplane_gap_sums_nb(warm, warm, np.full(4, 0.5))
    _kernels._greedy_map_nb(warm @ warm.T, 2,
                            np.zeros(8, dtype=np.bool_), 1e-12)

    rows = bench_gap_sums(args.repeats) + bench_greedy(args.repeats)
    width = max(len(name) for name, _, _ in rows)
    print(f"{'case':<{width}}  {'numpy':>10}  {'numba':>10}  {'speedup':>8}")
    for name, numpy_t, numba_t in rows:
        print(f"{name:<{width}}  {numpy_t * 1e3:>8.2f}ms  "
              f"{numba_t * 1e3:>8.2f}ms  {numpy_t / numba_t:>7.1f}x")


if __name__ == "__main__":
    main()
