"""Joint optimization of time-varying screening capacity and the assignment.

Variables are the grouped flows ``x[g, t]``, capacities ``C[t]`` and the
absolute-change slacks ``tau[t]`` for consecutive slots.  The LP value is a
lower bound; capacities are then rounded up and the integral assignment is
re-solved as a min-cost flow.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
import scipy.sparse as sp

from .assignment import (AssignmentPlan, CapacityProfile, CostParams, DemandProfile, SlotGrid,
                         cost_matrix, critical_capacity, solve_assignment)
from .errors import InfeasibleError, SolverError, ValidationError
from .lp import LinearProgram, LPResult, LPStatus, solve_lp

# LP capacities within this of an integer are taken as that integer before rounding up
ROUND_TOL = 1e-7


@dataclass(frozen=True)
class CapacityOptConfig:
    lambda1: Fraction = Fraction(0)
    lambda2: Fraction = Fraction(10)
    capacity_cap: int | None = None

    def __post_init__(self):
        for name in ("lambda1", "lambda2"):
            value = getattr(self, name)
            if isinstance(value, float):
                value = Fraction(repr(value))
            object.__setattr__(self, name, Fraction(value))
        if self.lambda1 < 0 or self.lambda2 < 0:
            raise ValidationError("lambda weights must be non-negative")
        if self.capacity_cap is not None and self.capacity_cap < 0:
            raise ValidationError("capacity cap must be non-negative")


@dataclass(frozen=True)
class CapacityLPLayout:
    """Column offsets of the capacity LP."""

    num_groups: int
    num_slots: int

    def x(self, g: int, t: int) -> int:
        return g * self.num_slots + t

    @property
    def c_start(self) -> int:
        return self.num_groups * self.num_slots

    @property
    def tau_start(self) -> int:
        return self.c_start + self.num_slots

    @property
    def num_vars(self) -> int:
        return self.tau_start + max(self.num_slots - 1, 0)

    def split(self, values: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        x = values[: self.c_start].reshape(self.num_groups, self.num_slots)
        return x, values[self.c_start: self.tau_start], values[self.tau_start: self.num_vars]


def build_capacity_lp(profile: DemandProfile, params: CostParams, config: CapacityOptConfig,
                      grid: SlotGrid) -> tuple[LinearProgram, CapacityLPLayout]:
    g_n, t_n = len(profile), grid.num_slots
    lay = CapacityLPLayout(g_n, t_n)
    n = lay.num_vars
    c = np.zeros(n)
    costs = cost_matrix(profile, params, grid)
    c[: lay.c_start] = [float(v) for row in costs for v in row]
    c[lay.c_start: lay.tau_start] = float(config.lambda1)
    c[lay.tau_start:] = float(config.lambda2)

    # supply rows: sum_t x[g, t] == count_g
    rows = np.repeat(np.arange(g_n), t_n)
    a_eq = sp.csr_matrix((np.ones(g_n * t_n), (rows, np.arange(g_n * t_n))), shape=(g_n, n))
    b_eq = profile.counts.astype(float)

    r, col, val = [], [], []
    # capacity rows: sum_g x[g, t] - C[t] <= 0
    for t in range(t_n):
        r += [t] * (g_n + 1)
        col += [lay.x(g, t) for g in range(g_n)] + [lay.c_start + t]
        val += [1.0] * g_n + [-1.0]
    # change rows: +-(C[t+1] - C[t]) - tau[t] <= 0
    row = t_n
    for t in range(t_n - 1):
        for s in (1.0, -1.0):
            r += [row, row, row]
            col += [lay.c_start + t + 1, lay.c_start + t, lay.tau_start + t]
            val += [s, -s, -1.0]
            row += 1
    a_ub = sp.csr_matrix((val, (r, col)), shape=(row, n))
    upper = np.full(n, np.inf)
    if config.capacity_cap is not None:
        upper[lay.c_start: lay.tau_start] = config.capacity_cap
    lp = LinearProgram(c, a_eq, b_eq, a_ub, np.zeros(row), upper)
    return lp, lay


def total_variation(capacity: np.ndarray) -> int | float:
    return np.abs(np.diff(capacity)).sum()


def capacity_objective(assignment_cost: Fraction, capacity: CapacityProfile,
                       config: CapacityOptConfig) -> Fraction:
    """Exact objective of an integral (capacity, assignment) pair."""
    cap = capacity.as_array()
    return assignment_cost + config.lambda1 * int(cap.sum()) + config.lambda2 * int(total_variation(cap))


@dataclass(frozen=True)
class CapacityDiagnostics:
    lp_objective: float
    lp_iterations: int
    lp_capacity: np.ndarray
    integral_objective: Fraction
    assignment_cost: Fraction
    total_capacity: int
    total_variation: int


@dataclass(frozen=True)
class CapacityResult:
    capacity: CapacityProfile
    plan: AssignmentPlan
    diagnostics: CapacityDiagnostics
    lp: LPResult


def round_up_capacity(values: np.ndarray) -> np.ndarray:
    near = np.abs(values - np.round(values)) <= ROUND_TOL
    out = np.where(near, np.round(values), np.ceil(values))
    return np.maximum(out, 0).astype(np.int64)


def optimize_capacity(profile: DemandProfile, params: CostParams, config: CapacityOptConfig,
                      grid: SlotGrid, backend: str | None = None) -> CapacityResult:
    n = profile.total_passengers
    if config.capacity_cap is not None and config.capacity_cap * grid.num_slots < n:
        raise InfeasibleError(
            f"capacity cap {config.capacity_cap} x {grid.num_slots} slots cannot serve {n} passengers",
            deficit=n - config.capacity_cap * grid.num_slots,
            critical_capacity=critical_capacity(n, grid.num_slots))
    lp, lay = build_capacity_lp(profile, params, config, grid)
    res = solve_lp(lp)
    if res.status is LPStatus.INFEASIBLE:
        raise InfeasibleError("capacity LP infeasible under the capacity cap",
                              critical_capacity=critical_capacity(n, grid.num_slots))
    if not res.optimal:
        raise SolverError(f"capacity LP {res.status.value}: {res.message}")
    x, cap_lp, _ = lay.split(res.x)
    if config.lambda2 == 0:
        # without a smoothness price any capacity above the load is idle; drop it
        cap_lp = np.minimum(cap_lp, x.sum(axis=0))
    rounded = round_up_capacity(cap_lp)
    if config.capacity_cap is not None:
        rounded = np.minimum(rounded, config.capacity_cap)
    if rounded.sum() < n:
        # near-integer snapping lost a fraction of a seat somewhere
        rounded = np.ceil(cap_lp - 1e-12).astype(np.int64)
    capacity = CapacityProfile(rounded)
    plan = solve_assignment(profile, capacity, params, grid, backend=backend)
    integral = capacity_objective(plan.objective, capacity, config)
    diag = CapacityDiagnostics(
        lp_objective=res.objective,
        lp_iterations=res.iterations,
        lp_capacity=cap_lp,
        integral_objective=integral,
        assignment_cost=plan.objective,
        total_capacity=int(rounded.sum()),
        total_variation=int(total_variation(rounded)),
    )
    return CapacityResult(capacity, plan, diag, res)


def brute_force_capacity(profile: DemandProfile, params: CostParams, config: CapacityOptConfig,
                         grid: SlotGrid, max_capacity: int) -> tuple[Fraction, tuple[int, ...]]:
    """Exhaustive search over integer capacity vectors in ``[0, max_capacity]``.

    Each candidate is scored with an exact min-cost flow.  Intended for toy
    instances (the search space is ``(max_capacity + 1) ** num_slots``).
    """
    import itertools

    n = profile.total_passengers
    best = None
    for caps in itertools.product(range(max_capacity + 1), repeat=grid.num_slots):
        if sum(caps) < n:
            continue
        cap = CapacityProfile(caps)
        plan = solve_assignment(profile, cap, params, grid)
        value = capacity_objective(plan.objective, cap, config)
        if best is None or value < best[0]:
            best = (value, caps)
    if best is None:
        raise InfeasibleError("no capacity vector in range serves all passengers",
                              deficit=n - max_capacity * grid.num_slots)
    return best


def smoothness_series(result: CapacityResult, served: np.ndarray) -> list[tuple[int, int, int]]:
    """(slot, capacity, served) rows."""
    return [(t, int(c), int(s)) for t, (c, s) in enumerate(zip(result.capacity.values, served))]

