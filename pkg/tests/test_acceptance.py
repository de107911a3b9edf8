"""Acceptance suite: every criterion at its stated tolerance.

Run on its own with ``pytest tests/test_acceptance.py`` (or
``python3 tests/test_acceptance.py``); the terminal summary prints one
PASS/FAIL line per criterion.
"""
import json
import time
from fractions import Fraction
from pathlib import Path

import numpy as np
import pytest

from conftest import random_network
from slotflow.assignment import (CapacityProfile, CostParams, SlotGrid, build_demand_profile,
                                 critical_capacity, profile_from_counts, solve_assignment)
from slotflow.capacity import CapacityOptConfig, brute_force_capacity, build_capacity_lp, optimize_capacity
from slotflow.cli import run
from slotflow.compliance import endpoint_tws, sweep
from slotflow.errors import InfeasibleError
from slotflow.flow import brute_force_min_cost, solve_min_cost_flow
from slotflow.lp import solve_lp
from slotflow.queue import baseline_arrivals, evaluate, fcfs_cost_by_passenger, fcfs_total_cost, fifo_service, plan_arrivals
from slotflow.scenario import Scenario, run_comply, run_solve
from slotflow.schedule import ScenarioConfig, reference_day_schedule, generate_synthetic

GOLDEN = json.loads((Path(__file__).parent / "golden" / "reference_day.json").read_text())
GRID = SlotGrid(15, 96)
PARAMS = CostParams()


@pytest.fixture(scope="module")
def day():
    return build_demand_profile(reference_day_schedule(), GRID)


@pytest.fixture(scope="module")
def day_plan(day):
    t0 = time.perf_counter()
    cap = CapacityProfile.uniform(900, 96)
    plan = solve_assignment(day, cap, PARAMS, GRID)
    return cap, plan, time.perf_counter() - t0


def within_2se(a, b):
    """``b`` is no larger than ``a`` up to two standard errors of the difference."""
    return b.mean - a.mean <= 2 * np.hypot(a.se, b.se)


class _Stat:
    def __init__(self, mean, se):
        self.mean, self.se = mean, se


@pytest.mark.criterion(1, "solver objective == brute force on 240 random instances, < 60 s")
def test_oracle_equivalence():
    rng = np.random.default_rng(12345)
    t0 = time.perf_counter()
    mismatches = 0
    for k in range(240):
        n = random_network(rng, n_nodes=int(rng.integers(2, 8)), n_arcs=int(rng.integers(1, 9)),
                           max_upper=4, feasible=k % 5 != 0, negative=k % 3 == 0, lower=k % 4 == 0)
        fast, slow = solve_min_cost_flow(n), brute_force_min_cost(n, cap=10**6)
        if fast.status is not slow.status or fast.objective != slow.objective:
            mismatches += 1
    assert mismatches == 0
    assert time.perf_counter() - t0 < 60


@pytest.mark.criterion(2, "ceil(N/T) - 1 infeasible and ceil(N/T) optimal on 20 random (N, T); 511 for N = 49,034, T = 96, < 5 s")
def test_critical_capacity(day):
    rng = np.random.default_rng(2)
    t0 = time.perf_counter()
    assert critical_capacity(49_034, 96) == 511
    for _ in range(20):
        t = int(rng.integers(2, 97))
        grid = SlotGrid(15, t)
        items = {}
        for _ in range(int(rng.integers(1, 8))):
            p = int(rng.integers(0, t))
            key = (p, min(t - 1, p + int(rng.integers(0, 5))))
            items[key] = items.get(key, 0) + int(rng.integers(1, 400))
        prof = profile_from_counts(items)
        cc = critical_capacity(prof.total_passengers, t)
        with pytest.raises(InfeasibleError):
            solve_assignment(prof, CapacityProfile.uniform(cc - 1, t), PARAMS, grid)
        solve_assignment(prof, CapacityProfile.uniform(cc, t), PARAMS, grid)
    with pytest.raises(InfeasibleError):
        solve_assignment(day, CapacityProfile.uniform(510, 96), PARAMS, GRID)
    solve_assignment(day, CapacityProfile.uniform(511, 96), PARAMS, GRID)
    assert time.perf_counter() - t0 < 5


@pytest.mark.criterion(3, "optimized plans simulate to TW == 0 exactly; full-day solve + simulate < 60 s")
def test_zero_wait(day, day_plan):
    cap, plan, solve_time = day_plan
    t0 = time.perf_counter()
    _, metrics = evaluate(plan_arrivals(plan), cap, day, GRID)
    assert day.total_passengers == 49_034 and len(reference_day_schedule()) == 260
    assert metrics.tw == 0
    assert solve_time + time.perf_counter() - t0 < 60
    rng = np.random.default_rng(3)
    for seed in range(6):
        prof = build_demand_profile(generate_synthetic(seed, int(rng.integers(20, 300)), 30_000), GRID)
        cc = critical_capacity(prof.total_passengers, 96)
        c = CapacityProfile.uniform(int(rng.integers(cc, 3 * cc)), 96)
        p = solve_assignment(prof, c, PARAMS, GRID)
        assert evaluate(plan_arrivals(p), c, prof, GRID)[1].tw == 0


@pytest.mark.criterion(4, "TC == alpha * TW exactly when baseline waits end before departure")
def test_fcfs_relation(day):
    checked = 0
    cases = [(day, 900)] + [(build_demand_profile(generate_synthetic(s, 200, 40_000), GRID), c)
                            for s in range(8) for c in (700, 1000)]
    for prof, c in cases:
        cap = CapacityProfile.uniform(c, 96)
        arr = baseline_arrivals(prof, GRID)
        curves, metrics = evaluate(arr, cap, prof, GRID)
        service = fifo_service(arr, curves, prof)
        if service.outside_linear_window(GRID):
            continue
        assert fcfs_total_cost(metrics.tw, PARAMS, service, GRID) == fcfs_cost_by_passenger(service, PARAMS, GRID)
        assert PARAMS.alpha * metrics.tw == fcfs_cost_by_passenger(service, PARAMS, GRID)
        checked += 1
    assert checked >= 5


@pytest.mark.criterion(5, "optimal objective non-increasing over 7 uniform capacities (exact)")
def test_monotone_in_capacity(day):
    caps = [511, 550, 600, 700, 800, 900, 1100]
    objs = [solve_assignment(day, CapacityProfile.uniform(c, 96), PARAMS, GRID).objective for c in caps]
    assert all(a >= b for a, b in zip(objs, objs[1:]))
    assert objs[0] > objs[-1]


@pytest.mark.criterion(6, "lambda1 = lambda2 = 0: optimized-capacity cost <= fixed-900 cost")
def test_capacity_dominance(day, day_plan):
    res = optimize_capacity(day, PARAMS, CapacityOptConfig(0, 0), GRID)
    assert res.plan.objective <= day_plan[1].objective


@pytest.mark.criterion(6, "lambda2 > 0: tau_t == |C_{t+1} - C_t| within 1e-9 at LP optimality")
@pytest.mark.parametrize("l1, l2", [(0, 10), (1, 10), (Fraction(1, 4), 1)])
def test_tau_tightness(day, l1, l2):
    lp, lay = build_capacity_lp(day, PARAMS, CapacityOptConfig(l1, l2), GRID)
    res = solve_lp(lp)
    assert res.optimal
    _, cap, tau = lay.split(res.x)
    assert np.max(np.abs(tau - np.abs(np.diff(cap)))) <= 1e-9


def _toy_cases(seed, count, staffing):
    rng = np.random.default_rng(seed)
    cases = []
    while len(cases) < count:
        slots = int(rng.integers(1, 4))
        grid = SlotGrid(30, slots)
        items = {}
        for _ in range(int(rng.integers(1, 3))):
            p = int(rng.integers(0, slots))
            key = (p, min(slots - 1, p + int(rng.integers(0, 2))))
            items[key] = items.get(key, 0) + int(rng.integers(1, 6))
        prof = profile_from_counts(items)
        if prof.total_passengers > 5 * slots:
            continue
        l1 = Fraction(int(rng.integers(1, 5)), 4) if staffing else Fraction(0)
        cfg = CapacityOptConfig(l1, Fraction(int(rng.integers(0, 21)), 2), capacity_cap=5)
        params = CostParams(int(rng.integers(1, 5)), int(rng.integers(1, 5)), 200)
        cases.append((prof, params, cfg, grid))
    return cases


def _lp_vs_enumeration(cases):
    bad = []
    for prof, params, cfg, grid in cases:
        lp, _ = build_capacity_lp(prof, params, cfg, grid)
        res = solve_lp(lp)
        best, _ = brute_force_capacity(prof, params, cfg, grid, 5)
        if not res.optimal or abs(res.objective - float(best)) > 1e-9:
            bad.append((res.objective, best))
    return bad


@pytest.mark.criterion(6, "toy LP objective == capacity-grid enumeration, lambda1 = 0 (<= 3 slots, C <= 5)")
def test_lp_matches_enumeration_lambda1_zero():
    assert _lp_vs_enumeration(_toy_cases(61, 60, staffing=False)) == []


@pytest.mark.criterion(6, "toy LP objective == capacity-grid enumeration, lambda1 > 0 (<= 3 slots, C <= 5)")
def test_lp_matches_enumeration_lambda1_positive():
    # Expected to fail: the LP relaxation of the staffing-cost model is not
    # integral, so fractional capacities undercut every integer grid point.
    bad = _lp_vs_enumeration(_toy_cases(62, 60, staffing=True))
    assert bad == [], f"{len(bad)} of 60 toys differ, e.g. LP {bad[0][0]} vs enumeration {bad[0][1]}"


@pytest.fixture(scope="module")
def day_endpoints(day, day_plan):
    cap, plan, _ = day_plan
    return endpoint_tws(plan, cap, day, GRID)


@pytest.mark.criterion(7, "p = 1, sigma = 0 reproduce the plan TW; p = 0 the baseline TW, bit-exact")
def test_compliance_endpoints(day, day_plan, day_endpoints):
    cap, plan, _ = day_plan
    plan_tw, base_tw = day_endpoints
    one, zero = sweep([1.0, 0.0], "bernoulli", plan, cap, day, GRID, trials=200, seed=7)
    (still,) = sweep([0.0], "gaussian", plan, cap, day, GRID, trials=200, seed=7)
    assert np.all(one.tw == plan_tw) and np.all(still.tw == plan_tw)
    assert np.all(zero.tw == base_tw)


@pytest.mark.criterion(7, "mean TW non-increasing over p in {0, .25, .5, .75, 1} within 2 SE (200 trials)")
def test_tw_decreases_with_acceptance(day, day_plan):
    cap, plan, _ = day_plan
    res = sweep([0, 0.25, 0.5, 0.75, 1], "bernoulli", plan, cap, day, GRID, trials=200, seed=12345)
    stats = [_Stat(r.mean_tw, r.se_tw) for r in res]
    assert all(within_2se(a, b) for a, b in zip(stats, stats[1:]))


@pytest.mark.criterion(7, "mean missed fraction non-decreasing over sigma grid within 2 SE (200 trials), < 10 min")
def test_missed_increases_with_jitter(day, day_plan):
    cap, plan, _ = day_plan
    t0 = time.perf_counter()
    res = sweep([0, 15, 30, 60, 120, 240], "gaussian", plan, cap, day, GRID, trials=200, seed=12345)
    # non-decreasing within 2 SE: reverse the roles of the "within_2se" check
    stats = [_Stat(-r.mean_missed_fraction, r.se_missed_fraction) for r in res]
    assert all(within_2se(a, b) for a, b in zip(stats, stats[1:]))
    assert time.perf_counter() - t0 < 600


@pytest.mark.criterion(8, "synthetic full-day TC reduction reported and equal to the pinned exact values")
def test_golden_tc():
    summary, _ = run_solve(Scenario.from_config(ScenarioConfig()))
    assert summary["parameters"]["passengers"] == GOLDEN["passengers"]
    assert summary["baseline"]["tw"] == Fraction(GOLDEN["baseline_tw"])
    assert summary["baseline"]["tc"] == Fraction(GOLDEN["baseline_tc"])
    assert summary["optimized"]["tc"] == Fraction(GOLDEN["optimized_tc"])
    assert summary["tc_reduction"] == Fraction(GOLDEN["tc_reduction"])


@pytest.mark.criterion(8, "p = 0.5 TW reduction reported and within 2 SE of the pinned value")
def test_golden_half_compliance():
    cfg = ScenarioConfig(compliance_model="bernoulli", p=0.5, trials=GOLDEN["p05_trials"], seed=GOLDEN["p05_seed"])
    summary, _ = run_comply(Scenario.from_config(cfg))
    result = summary["result"]
    assert "tw_reduction_vs_baseline" in result
    assert abs(result["mean_tw"] - GOLDEN["p05_mean_tw"]) <= 2 * np.hypot(result["se_tw"], GOLDEN["p05_se_tw"])


@pytest.mark.criterion(9, "every command re-run with identical inputs and seeds is byte-identical")
@pytest.mark.parametrize("argv", [
    ["generate", "--reference-day"],
    ["solve"],
    ["simulate"],
    ["capacity", "--lambda1", "1"],
    ["comply", "--model", "bernoulli", "--p", "0.5"],
    ["sweep", "--model", "gaussian", "--values", "0,30,120", "--trials", "50"],
])
def test_determinism(tmp_path, argv):
    for name in ("a", "b"):
        assert run(argv + ["--out", str(tmp_path / name)]) == 0
    names = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert names == sorted(p.name for p in (tmp_path / "b").iterdir())
    for name in names:
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-q"]))
