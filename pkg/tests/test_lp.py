"""Tests for the simplex solver and the column-generation driver."""

import itertools

import numpy as np
import pytest

from qchancap.lp import (
    LinearProgram,
    LpError,
    PricingOutcome,
    column_generation,
    solve_lp,
)


def brute_force_min(c, a, b):
    """Independent oracle: enumerate every basis submatrix and keep the best
    feasible vertex."""
    m, n = a.shape
    best = np.inf
    for cols in itertools.combinations(range(n), m):
        sub = a[:, cols]
        try:
            xb = np.linalg.solve(sub, b)
        except np.linalg.LinAlgError:
            continue
        if xb.min() >= -1e-9:
            x = np.zeros(n)
            x[list(cols)] = xb
            best = min(best, float(c @ x))
    return best


def test_single_variable():
    sol = solve_lp(LinearProgram(c=[1.0], A=[[1.0]], b=[1.0]))
    assert sol.status == "optimal"
    assert sol.x[0] == pytest.approx(1.0, abs=1e-12)
    assert sol.objective == pytest.approx(1.0, abs=1e-12)
    assert sol.duals[0] == pytest.approx(1.0, abs=1e-12)


def test_two_variable_vertex():
    sol = solve_lp(LinearProgram(c=[-1.0, -1.0], A=[[1.0, 1.0]], b=[1.0]))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(-1.0, abs=1e-12)
    assert sol.duals[0] == pytest.approx(-1.0, abs=1e-12)


def test_max_sense():
    sol = solve_lp(LinearProgram(c=[2.0, 1.0], A=[[1.0, 1.0]], b=[1.0], sense="max"))
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(2.0, abs=1e-12)
    assert sol.x[0] == pytest.approx(1.0, abs=1e-12)
    # max-sense duals: y.b equals the objective, y.A_j >= c_j
    assert sol.duals @ np.array([1.0]) == pytest.approx(2.0, abs=1e-12)
    assert (sol.duals @ np.array([[1.0, 1.0]]) - np.array([2.0, 1.0])).min() >= -1e-9


def test_infeasible_reported():
    # x1 = 1 and x1 = 2 simultaneously
    lp = LinearProgram(c=[1.0], A=[[1.0], [1.0]], b=[1.0, 2.0])
    assert solve_lp(lp).status == "infeasible"


def test_unbounded_reported():
    # min -x1 with x1 - x2 = 0: both can grow forever
    lp = LinearProgram(c=[-1.0, 0.0], A=[[1.0, -1.0]], b=[0.0])
    assert solve_lp(lp).status == "unbounded"


def test_negative_rhs_normalization():
    lp = LinearProgram(c=[1.0, 1.0], A=[[-1.0, 1.0]], b=[-2.0])
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(2.0, abs=1e-12)
    # original-orientation dual: y * (-2) must equal the objective
    assert sol.duals[0] * -2.0 == pytest.approx(2.0, abs=1e-12)


def test_redundant_rows_duals_full_length():
    # second row duplicates the first; solver must still return two duals
    lp = LinearProgram(c=[1.0, 2.0], A=[[1.0, 1.0], [1.0, 1.0]], b=[1.0, 1.0])
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.objective == pytest.approx(1.0, abs=1e-12)
    assert sol.duals.shape == (2,)
    assert sol.duals @ lp.b == pytest.approx(1.0, abs=1e-10)


def test_random_lps_match_vertex_enumeration():
    rng = np.random.default_rng(0)
    for _ in range(25):
        m, n = 5, 12
        a = rng.normal(size=(m, n))
        x0 = np.where(rng.random(n) < 0.5, rng.uniform(0.0, 2.0, size=n), 0.0)
        b = a @ x0
        c = rng.uniform(0.1, 1.0, size=n)  # positive costs keep it bounded
        lp = LinearProgram(c=c, A=a, b=b)
        sol = solve_lp(lp)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(brute_force_min(c, a, b), abs=1e-8)
        # invariants of LpSolution
        assert np.abs(a @ sol.x - b).max() <= 1e-8 * (1 + np.abs(b).max())
        assert abs(sol.objective - sol.duals @ b) <= 1e-7 * (1 + abs(sol.objective))
        slack = c - sol.duals @ a
        assert slack.min() >= -1e-7
        assert (sol.x * slack).max() <= 1e-7


def test_klee_minty_terminates():
    n = 8
    a = np.zeros((n, 2 * n))
    b = np.zeros(n)
    c = np.zeros(2 * n)
    for i in range(n):
        for j in range(i):
            a[i, j] = 2.0 ** (i - j + 1)
        a[i, i] = 1.0
        a[i, n + i] = 1.0  # slack
        b[i] = 5.0 ** (i + 1)
        c[i] = 2.0 ** (n - 1 - i)
    lp = LinearProgram(c=c, A=a, b=b, sense="max")
    sol = solve_lp(lp)
    assert sol.status == "optimal"
    assert sol.pivots < 10**6
    assert sol.objective == pytest.approx(5.0**n, rel=1e-10)


def test_warm_start_matches_cold():
    rng = np.random.default_rng(1)
    a = rng.normal(size=(4, 8))
    x0 = rng.uniform(0.0, 1.0, size=8)
    b = a @ x0
    c = rng.uniform(0.1, 1.0, size=8)
    lp = LinearProgram(c=c.copy(), A=a.copy(), b=b.copy())
    sol = solve_lp(lp)
    newcol = rng.normal(size=4)
    lp.add_column(newcol, 0.01)
    warm = solve_lp(lp, warm_basis=sol.basis)
    cold = solve_lp(lp)
    assert warm.objective == pytest.approx(cold.objective, abs=1e-9)


# --- column generation -------------------------------------------------------

def test_cg_no_columns_returned():
    lp = LinearProgram(c=[1.0], A=[[1.0]], b=[1.0])

    def pricing(duals):
        return PricingOutcome(columns=[], best_reduced_cost=0.0)

    sol, rounds, converged = column_generation(lp, pricing)
    assert converged and rounds == 0
    assert sol.objective == pytest.approx(1.0, abs=1e-12)


def cutting_stock_patterns(width, sizes):
    """All maximal feasible cutting patterns (enumeration oracle)."""
    ranges = [range(width // s + 1) for s in sizes]
    pats = []
    for combo in itertools.product(*ranges):
        used = sum(c * s for c, s in zip(combo, sizes))
        if used <= width and any(combo):
            pats.append(np.array(combo, dtype=float))
    return pats


def test_cg_cutting_stock_matches_enumeration():
    width, sizes, demand = 10, [3, 4, 5], np.array([9.0, 7.0, 5.0])
    pats = cutting_stock_patterns(width, sizes)

    # oracle: LP over every pattern at once
    full = LinearProgram(
        c=np.ones(len(pats)), A=np.stack(pats, axis=1), b=demand
    )
    full_opt = solve_lp(full).objective

    # master seeded with single-size patterns
    seeds = []
    for k, s in enumerate(sizes):
        pat = np.zeros(3)
        pat[k] = width // s
        seeds.append(pat)
    master = LinearProgram(c=np.ones(3), A=np.stack(seeds, axis=1), b=demand)

    def pricing(duals):
        best, best_pat = 0.0, None
        for pat in pats:
            value = float(duals @ pat)
            if value > best + 1e-12:
                best, best_pat = value, pat
        if best > 1.0 + 1e-9:
            return PricingOutcome(columns=[(best_pat, 1.0, None)], best_reduced_cost=1.0 - best)
        return PricingOutcome(columns=[], best_reduced_cost=0.0)

    sol, rounds, converged = column_generation(master, pricing, tol=1e-9)
    assert converged
    assert sol.objective == pytest.approx(full_opt, abs=1e-8)


def test_cg_rejects_duplicate_columns():
    lp = LinearProgram(c=[1.0], A=[[1.0]], b=[1.0])
    calls = []

    def pricing(duals):
        calls.append(1)
        # claims an improvement but duplicates the existing column
        return PricingOutcome(columns=[(np.array([1.0]), 0.5, None)], best_reduced_cost=-0.5)

    sol, rounds, converged = column_generation(lp, pricing, tol=1e-9)
    assert converged and rounds == 0 and len(calls) == 1


def test_lp_validation_errors():
    with pytest.raises(LpError):
        LinearProgram(c=[1.0], A=[[1.0, 2.0]], b=[1.0])
    with pytest.raises(LpError):
        LinearProgram(c=[np.inf], A=[[1.0]], b=[1.0])
    with pytest.raises(LpError):
        LinearProgram(c=[1.0], A=[[1.0]], b=[1.0], sense="argmax")
