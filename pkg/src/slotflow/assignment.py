"""Passenger -> time-slot -> sink network construction and plan decoding."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass
from fractions import Fraction
from collections.abc import Iterable, Mapping, Sequence
from typing import TYPE_CHECKING

import numpy as np

from .errors import InfeasibleError, SolverError, ValidationError
from .flow import Arc, FlowNetwork, Node, solve_min_cost_flow

if TYPE_CHECKING:
    from .schedule import Schedule

MINUTES_PER_DAY = 1440
PREFERRED_LEAD_MINUTES = 60


@dataclass(frozen=True)
class SlotGrid:
    delta_minutes: int = 15
    num_slots: int = 96
    start_minute: int = 0

    def __post_init__(self):
        if self.delta_minutes <= 0:
            raise ValidationError("slot length must be positive")
        if self.num_slots <= 0:
            raise ValidationError("grid needs at least one slot")
        if self.num_slots * self.delta_minutes > MINUTES_PER_DAY:
            raise ValidationError("grid longer than one day")
        if not 0 <= self.start_minute < MINUTES_PER_DAY:
            raise ValidationError("grid start must lie within the day")

    @property
    def end_minute(self) -> int:
        return self.start_minute + self.num_slots * self.delta_minutes

    @property
    def slot_hours(self) -> Fraction:
        return Fraction(self.delta_minutes, 60)

    def slot_of(self, minute: int) -> int:
        if not self.start_minute <= minute < self.end_minute:
            raise ValidationError(f"minute {minute} outside grid "
                                  f"[{self.start_minute}, {self.end_minute})")
        return (minute - self.start_minute) // self.delta_minutes

    def slot_start(self, slot: int) -> int:
        return self.start_minute + slot * self.delta_minutes


@dataclass(frozen=True)
class CostParams:
    alpha: Fraction = Fraction(4)
    beta: Fraction = Fraction(1)
    gamma: Fraction = Fraction(200)

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma"):
            value = getattr(self, name)
            if isinstance(value, float):
                value = Fraction(repr(value))
            object.__setattr__(self, name, Fraction(value))
        if self.alpha <= 0 or self.beta <= 0:
            raise ValidationError("alpha and beta must be positive")
        if self.gamma <= self.alpha:
            raise ValidationError("gamma must exceed alpha so missing a flight is never preferred")


@dataclass(frozen=True, order=True)
class DemandGroup:
    preferred_slot: int
    departure_slot: int
    count: int

    def __post_init__(self):
        if self.count < 1:
            raise ValidationError("group count must be at least 1")
        if self.preferred_slot > self.departure_slot:
            raise ValidationError("preferred slot after departure slot")


@dataclass(frozen=True)
class DemandProfile:
    """Passenger groups keyed by (preferred slot, departure slot).

    Group order is the FIFO tie-break order and the row order of every
    (group, slot) matrix in the package.
    """

    groups: tuple[DemandGroup, ...]

    def __init__(self, groups: Iterable[DemandGroup]):
        groups = tuple(groups)
        keys = [(g.preferred_slot, g.departure_slot) for g in groups]
        if len(set(keys)) != len(keys):
            raise ValidationError("duplicate (preferred_slot, departure_slot) group")
        object.__setattr__(self, "groups", groups)

    @property
    def total_passengers(self) -> int:
        return sum(g.count for g in self.groups)

    @property
    def counts(self) -> np.ndarray:
        return np.array([g.count for g in self.groups], np.int64)

    @property
    def preferred_slots(self) -> np.ndarray:
        return np.array([g.preferred_slot for g in self.groups], np.int64)

    @property
    def departure_slots(self) -> np.ndarray:
        return np.array([g.departure_slot for g in self.groups], np.int64)

    def __len__(self) -> int:
        return len(self.groups)


@dataclass(frozen=True)
class CapacityProfile:
    values: tuple[int, ...]

    def __init__(self, values: Iterable[int]):
        values = tuple(int(v) for v in values)
        if any(v < 0 for v in values):
            raise ValidationError("capacities must be non-negative")
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, capacity: int, num_slots: int) -> CapacityProfile:
        return cls([capacity] * num_slots)

    def as_array(self) -> np.ndarray:
        return np.array(self.values, np.int64)

    def __len__(self) -> int:
        return len(self.values)


def preferred_slot(departure_minute: int, grid: SlotGrid) -> int:
    """Slot containing departure minus one hour, clamped to slot 0."""
    grid.slot_of(departure_minute)
    lead = departure_minute - PREFERRED_LEAD_MINUTES - grid.start_minute
    return max(0, lead // grid.delta_minutes)


def reassignment_cost(group: DemandGroup, assigned_slot: int, params: CostParams,
                      grid: SlotGrid) -> Fraction:
    """Unit cost of serving one passenger of ``group`` in ``assigned_slot``.

    The hour offset from the preferred slot selects the branch: zero on
    time, linear delay up to one hour, quadratic earliness, flat penalty
    after departure.  A slot past the departure slot always pays the
    penalty, which matters only for clamped groups.
    """
    if not 0 <= assigned_slot < grid.num_slots:
        raise ValidationError(f"slot {assigned_slot} outside [0, {grid.num_slots})")
    h = (assigned_slot - group.preferred_slot) * grid.slot_hours
    if assigned_slot > group.departure_slot or h > 1:
        return params.gamma
    if h == 0:
        return Fraction(0)
    if h > 0:
        return params.alpha * h
    return params.beta * h * h


def cost_matrix(profile: DemandProfile, params: CostParams, grid: SlotGrid) -> list[list[Fraction]]:
    return [[reassignment_cost(g, t, params, grid) for t in range(grid.num_slots)]
            for g in profile.groups]


def _round_half_up(value: Fraction) -> int:
    return int((value + Fraction(1, 2)).__floor__())


def build_demand_profile(schedule: Schedule, grid: SlotGrid, load_factor: float | Fraction = 1) -> DemandProfile:
    """Aggregate flights into passenger groups.

    Passengers per flight are ``round(seats * load_factor)`` with halves
    rounded up; flights with no passengers after rounding are dropped.
    """
    lf = Fraction(repr(load_factor)) if isinstance(load_factor, float) else Fraction(load_factor)
    if not 0 < lf <= 1:
        raise ValidationError("load factor must lie in (0, 1]")
    if not schedule.flights:
        raise ValidationError("empty schedule: no demand to assign")
    merged: dict[tuple[int, int], int] = defaultdict(int)
    for flight in schedule.flights:
        pax = _round_half_up(flight.seats * lf)
        if pax == 0:
            continue
        key = (preferred_slot(flight.departure, grid), grid.slot_of(flight.departure))
        merged[key] += pax
    if not merged:
        raise ValidationError("empty profile after applying the load factor")
    return DemandProfile(DemandGroup(p, d, n) for (p, d), n in sorted(merged.items()))


def critical_capacity(total_passengers: int, num_slots: int) -> int:
    """Least uniform per-slot capacity that can serve everyone."""
    if num_slots <= 0:
        raise ValidationError("num_slots must be positive")
    return -(-total_passengers // num_slots)


def _group_node(i: int) -> str:
    return f"g{i}"


def _slot_node(t: int) -> str:
    return f"t{t}"


SINK = "sink"


def build_network(profile: DemandProfile, capacity: CapacityProfile, params: CostParams,
                  grid: SlotGrid) -> FlowNetwork:
    """Grouped network: group -> every slot (bounded by the group size), slot -> sink."""
    _check_lengths(capacity, grid)
    n = profile.total_passengers
    nodes = [Node(_group_node(i), g.count) for i, g in enumerate(profile.groups)]
    nodes += [Node(_slot_node(t), 0) for t in range(grid.num_slots)]
    nodes.append(Node(SINK, -n))
    arcs = [Arc(_group_node(i), _slot_node(t), 0, g.count, c)
            for i, (g, row) in enumerate(zip(profile.groups, cost_matrix(profile, params, grid)))
            for t, c in enumerate(row)]
    arcs += [Arc(_slot_node(t), SINK, 0, cap, 0) for t, cap in enumerate(capacity.values)]
    return FlowNetwork(nodes, arcs)


def build_passenger_network(profile: DemandProfile, capacity: CapacityProfile, params: CostParams,
                            grid: SlotGrid) -> FlowNetwork:
    """Ungrouped network with one unit-supply node per passenger."""
    _check_lengths(capacity, grid)
    costs = cost_matrix(profile, params, grid)
    nodes, arcs = [], []
    for i, g in enumerate(profile.groups):
        for k in range(g.count):
            pid = f"p{i}_{k}"
            nodes.append(Node(pid, 1))
            arcs += [Arc(pid, _slot_node(t), 0, 1, c) for t, c in enumerate(costs[i])]
    nodes += [Node(_slot_node(t), 0) for t in range(grid.num_slots)]
    nodes.append(Node(SINK, -profile.total_passengers))
    arcs += [Arc(_slot_node(t), SINK, 0, cap, 0) for t, cap in enumerate(capacity.values)]
    return FlowNetwork(nodes, arcs)


def _check_lengths(capacity: CapacityProfile, grid: SlotGrid) -> None:
    if len(capacity) != grid.num_slots:
        raise ValidationError(f"capacity profile has {len(capacity)} slots, grid has {grid.num_slots}")


@dataclass(frozen=True)
class AssignmentPlan:
    """Passenger counts per (group, assigned slot) and the exact total cost."""

    profile: DemandProfile
    matrix: np.ndarray
    objective: Fraction

    @property
    def entries(self) -> dict[int, dict[int, int]]:
        return {g: {int(t): int(self.matrix[g, t]) for t in np.flatnonzero(row)}
                for g, row in enumerate(self.matrix)}

    @property
    def slot_loads(self) -> np.ndarray:
        return self.matrix.sum(axis=0)

    @classmethod
    def identity(cls, profile: DemandProfile, grid: SlotGrid) -> AssignmentPlan:
        """Everyone at the preferred slot (zero cost)."""
        m = np.zeros((len(profile), grid.num_slots), np.int64)
        for i, g in enumerate(profile.groups):
            m[i, g.preferred_slot] = g.count
        return cls(profile, m, Fraction(0))


def plan_cost(profile: DemandProfile, matrix: np.ndarray, params: CostParams, grid: SlotGrid) -> Fraction:
    total = Fraction(0)
    for i, g in enumerate(profile.groups):
        for t in np.flatnonzero(matrix[i]):
            total += int(matrix[i, t]) * reassignment_cost(g, int(t), params, grid)
    return total


def check_plan(plan: AssignmentPlan, capacity: CapacityProfile) -> list[str]:
    """Independent re-check of plan invariants; returns a list of problems."""
    problems = []
    sums = plan.matrix.sum(axis=1)
    for i, g in enumerate(plan.profile.groups):
        if sums[i] != g.count:
            problems.append(f"group {i}: assigned {sums[i]} of {g.count}")
    if np.any(plan.matrix < 0):
        problems.append("negative assignment count")
    over = np.flatnonzero(plan.slot_loads > capacity.as_array())
    problems += [f"slot {t}: load exceeds capacity" for t in over]
    return problems


def solve_assignment(profile: DemandProfile, capacity: CapacityProfile, params: CostParams,
                     grid: SlotGrid, backend: str | None = None) -> AssignmentPlan:
    """System-optimal reassignment for fixed per-slot capacities."""
    network = build_network(profile, capacity, params, grid)
    solution = solve_min_cost_flow(network, backend=backend)
    n = profile.total_passengers
    if not solution.optimal:
        cc = critical_capacity(n, grid.num_slots)
        raise InfeasibleError(
            f"capacity cannot serve {n} passengers: {solution.deficit} unassigned "
            f"(uniform capacity needs at least {cc} per slot)",
            deficit=solution.deficit, critical_capacity=cc)
    g, t = len(profile), grid.num_slots
    matrix = np.array(solution.flows[: g * t], np.int64).reshape(g, t)
    objective = plan_cost(profile, matrix, params, grid)
    if objective != solution.objective:
        raise SolverError(f"decoded plan cost {objective} != flow objective {solution.objective}")
    return AssignmentPlan(profile, matrix, objective)


def arrival_shift_histogram(plan: AssignmentPlan, grid: SlotGrid) -> dict[int, int]:
    """Passengers by signed shift in minutes from the preferred slot."""
    hist: dict[int, int] = defaultdict(int)
    for i, g in enumerate(plan.profile.groups):
        for t in np.flatnonzero(plan.matrix[i]):
            hist[(int(t) - g.preferred_slot) * grid.delta_minutes] += int(plan.matrix[i, t])
    return dict(sorted(hist.items()))


def profile_from_counts(items: Sequence[tuple[int, int, int]] | Mapping[tuple[int, int], int]) -> DemandProfile:
    """Profile from ``(preferred, departure, count)`` triples or a key->count map."""
    if isinstance(items, Mapping):
        items = [(p, d, n) for (p, d), n in items.items()]
    return DemandProfile(DemandGroup(p, d, n) for p, d, n in sorted(items))
