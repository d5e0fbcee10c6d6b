"""Bounded-variable simplex and binary branch-and-bound."""

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog

from pere.lp import (
    FEAS_TOL,
    LinearProgram,
    SimplexProgram,
    solve_lp,
    solve_mip_binary,
)


def random_lp(rng: np.random.Generator, n: int, m: int) -> LinearProgram:
    A = rng.normal(size=(m, n))
    b = rng.normal(scale=2.0, size=m)
    lower = rng.uniform(-3.0, 0.0, size=n)
    upper = lower + rng.uniform(0.5, 4.0, size=n)
    c = rng.normal(size=n)
    return LinearProgram(c, A, b, lower, upper)


def scipy_solve(lp: LinearProgram):
    res = linprog(-lp.objective, A_ub=lp.A, b_ub=lp.b,
                  bounds=list(zip(lp.lower, lp.upper)), method="highs")
    if res.status == 2:
        return ("infeasible", None)
    if res.status == 3:
        return ("unbounded", None)
    return ("optimal", -res.fun)


def test_matches_scipy_on_400_random_instances():
    rng = np.random.default_rng(7)
    mismatch = 0
    for trial in range(400):
        n = int(rng.integers(1, 9))
        m = int(rng.integers(1, 13))
        lp = random_lp(rng, n, m)
        expected_status, expected_value = scipy_solve(lp)
        got = solve_lp(lp)
        assert got.status == expected_status, f"trial {trial}"
        if expected_status == "optimal":
            assert got.objective_value == pytest.approx(
                expected_value, abs=1e-7), f"trial {trial}"
            assert np.all(lp.A @ got.x <= lp.b + 1e-7)
            assert np.all(got.x >= lp.lower - 1e-9)
            assert np.all(got.x <= lp.upper + 1e-9)
            mismatch += 0


def test_unbounded_direction_detected():
    lp = LinearProgram([1.0, 0.0], [[0.0, 1.0]], [1.0],
                       [0.0, 0.0], [np.inf, np.inf])
    assert solve_lp(lp).status == "unbounded"


def test_infeasible_rows_detected():
    lp = LinearProgram([1.0], [[1.0], [-1.0]], [-2.0, -1.0], [0.0], [5.0])
    assert solve_lp(lp).status == "infeasible"


def test_degenerate_overlapping_rows():
    # many duplicate rows through the optimum stress the ratio-test ties
    A = np.vstack([np.eye(3)] * 6)
    b = np.full(18, 1.0)
    lp = LinearProgram(np.ones(3), A, b, np.zeros(3), np.full(3, 10.0))
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.objective_value == pytest.approx(3.0, abs=1e-9)


def test_bounds_only_optimum_no_pivots_needed():
    lp = LinearProgram([2.0, -3.0], np.zeros((1, 2)), [1.0],
                       [-1.0, -2.0], [4.0, 5.0])
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.x == pytest.approx([4.0, -2.0])
    assert sol.objective_value == pytest.approx(14.0)


def test_equal_bounds_fixed_variable():
    lp = LinearProgram([1.0, 1.0], [[1.0, 1.0]], [1.5],
                       [0.5, 0.0], [0.5, 1.0])
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(0.5)
    assert sol.objective_value == pytest.approx(1.5, abs=1e-9)


def test_session_pin_then_reoptimize_matches_cold_start():
    rng = np.random.default_rng(11)
    for _ in range(50):
        n, m = 5, 8
        lp = random_lp(rng, n, m)
        warm = SimplexProgram(lp.A, lp.b, lp.lower, lp.upper)
        first = warm.maximize(lp.objective)
        if first.status != "optimal":
            continue
        # pin x0 at its optimum, then maximize +x1 warm vs cold
        pinned = float(first.x[0])
        warm.pin(0, pinned)
        follow = np.zeros(n)
        follow[1] = 1.0
        hot = warm.maximize(follow)
        lower2, upper2 = lp.lower.copy(), lp.upper.copy()
        lower2[0] = upper2[0] = pinned
        cold = solve_lp(LinearProgram(follow, lp.A, lp.b, lower2, upper2))
        assert hot.status == cold.status == "optimal"
        assert hot.objective_value == pytest.approx(
            cold.objective_value, abs=1e-7)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_feasible_solutions_respect_all_rows(seed):
    rng = np.random.default_rng(seed)
    lp = random_lp(rng, int(rng.integers(1, 6)), int(rng.integers(1, 8)))
    sol = solve_lp(lp)
    if sol.status == "optimal":
        assert np.all(lp.A @ sol.x <= lp.b + FEAS_TOL)
        assert np.all(sol.x >= lp.lower - FEAS_TOL)
        assert np.all(sol.x <= lp.upper + FEAS_TOL)


def brute_force_mip(lp: LinearProgram, binaries, budget):
    best = None
    n = lp.n_vars
    for bits in itertools.product((0.0, 1.0), repeat=len(binaries)):
        if sum(bits) > budget:
            continue
        lower, upper = lp.lower.copy(), lp.upper.copy()
        for j, bit in zip(binaries, bits):
            lower[j] = upper[j] = bit
        sol = solve_lp(LinearProgram(lp.objective, lp.A, lp.b, lower, upper))
        if sol.status != "optimal":
            continue
        if best is None or sol.objective_value > best + 1e-9:
            best = sol.objective_value
    return best


def test_mip_matches_exhaustive_enumeration():
    rng = np.random.default_rng(23)
    solved = 0
    for _ in range(60):
        n = int(rng.integers(2, 7))
        m = int(rng.integers(1, 8))
        lp = random_lp(rng, n, m)
        lower = np.minimum(lp.lower, 0.0)
        upper = np.maximum(lp.upper, 1.0)
        lp = LinearProgram(lp.objective, lp.A, lp.b, lower, upper)
        lp = LinearProgram(lp.objective, lp.A, lp.b + 3.0, lower, upper)
        n_bin = int(rng.integers(1, n + 1))
        binaries = sorted(rng.choice(n, size=n_bin, replace=False).tolist())
        budget = int(rng.integers(0, n_bin + 1))
        expected = brute_force_mip(lp, binaries, budget)
        got = solve_mip_binary(lp, binaries, budget)
        if expected is None:
            assert got.status == "infeasible"
            continue
        solved += 1
        assert got.status == "optimal"
        assert got.objective_value == pytest.approx(expected, abs=1e-6)
        assert np.all((got.assignment == 0) | (got.assignment == 1))
        assert got.assignment.sum() <= budget
    assert solved >= 30  # the generator should produce mostly feasible MIPs


def test_mip_budget_zero_forces_all_binaries_off():
    lp = LinearProgram([1.0, 1.0, 1.0], np.zeros((1, 3)), [0.0],
                       np.zeros(3), np.ones(3))
    sol = solve_mip_binary(lp, [0, 1, 2], budget=0)
    assert sol.status == "optimal"
    assert sol.assignment.tolist() == [0, 0, 0]
    assert sol.objective_value == pytest.approx(0.0, abs=1e-12)


def test_mip_node_limit_returns_flagged_incumbent():
    # a knapsack-like instance large enough to need several nodes
    rng = np.random.default_rng(5)
    n = 14
    values = rng.uniform(1.0, 2.0, size=n)
    weights = rng.uniform(1.0, 2.0, size=n)
    lp = LinearProgram(values, weights[None, :], [float(weights.sum() / 3)],
                       np.zeros(n), np.ones(n))
    full = solve_mip_binary(lp, range(n), budget=n)
    assert full.status == "optimal"
    capped = solve_mip_binary(lp, range(n), budget=n, max_nodes=1)
    assert capped.status in ("optimal", "node_limit")
    if capped.status == "node_limit" and not np.isnan(capped.x).any():
        assert capped.objective_value <= full.objective_value + 1e-9


def test_mip_validates_inputs():
    lp = LinearProgram([1.0], np.zeros((1, 1)), [0.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        solve_mip_binary(lp, [2], budget=1)
    with pytest.raises(ValueError):
        solve_mip_binary(lp, [0], budget=-1)


def test_linear_program_validates_shapes():
    with pytest.raises(ValueError):
        LinearProgram([1.0, 2.0], [[1.0]], [1.0], [0.0], [1.0])
    with pytest.raises(ValueError):
        LinearProgram([1.0], [[1.0]], [1.0], [2.0], [1.0])  # lower > upper
