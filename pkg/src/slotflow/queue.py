"""Slot-granular FIFO fluid queue at the security checkpoint.

Curves are sampled at slot ends: ``v[t]`` passengers arrived by the end of
slot ``t``, ``d[t]`` passengers screened by then, ``q[t]`` passengers whose
flight left by then.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._kernels import fifo_departures
from .assignment import (AssignmentPlan, CapacityProfile, CostParams, DemandProfile, SlotGrid,
                         reassignment_cost)
from .errors import RelationInvalidError, ValidationError


@dataclass(frozen=True)
class ArrivalSeries:
    """Per-slot arrivals; ``by_group`` keeps the (group, slot) breakdown."""

    counts: np.ndarray
    tag: str = "baseline"
    by_group: np.ndarray | None = None

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    @classmethod
    def from_matrix(cls, matrix: np.ndarray, tag: str) -> ArrivalSeries:
        matrix = np.asarray(matrix, np.int64)
        return cls(matrix.sum(axis=0), tag, matrix)


@dataclass(frozen=True)
class CumulativeCurves:
    v: np.ndarray
    d: np.ndarray
    q: np.ndarray
    capacity: np.ndarray

    @property
    def spillover(self) -> int:
        """Passengers still queued when the horizon ends."""
        return int(self.v[-1] - self.d[-1]) if len(self.v) else 0

    @property
    def served(self) -> np.ndarray:
        return np.diff(self.d, prepend=0)

    @property
    def queue(self) -> np.ndarray:
        return self.v - self.d


@dataclass(frozen=True)
class SimMetrics:
    tw: Fraction
    tc: Fraction | None
    missed: int
    spillover: int = 0
    missed_at_completion: int | None = None
    extra: dict = field(default_factory=dict)


def baseline_arrivals(profile: DemandProfile, grid: SlotGrid) -> ArrivalSeries:
    """Everyone shows up at the preferred slot (one hour before departure)."""
    m = np.zeros((len(profile), grid.num_slots), np.int64)
    for i, g in enumerate(profile.groups):
        m[i, g.preferred_slot] = g.count
    return ArrivalSeries.from_matrix(m, "baseline")


def plan_arrivals(plan: AssignmentPlan) -> ArrivalSeries:
    return ArrivalSeries.from_matrix(plan.matrix, "plan")


def flight_departures(profile: DemandProfile, grid: SlotGrid) -> np.ndarray:
    """Passengers whose flight leaves in each slot."""
    out = np.zeros(grid.num_slots, np.int64)
    np.add.at(out, profile.departure_slots, profile.counts)
    return out


def simulate_queue(arrivals: ArrivalSeries, capacity: CapacityProfile,
                   departures: np.ndarray | None = None, backend: str | None = None) -> CumulativeCurves:
    """FIFO service: ``d[t] = min(v[t], d[t-1] + C[t])`` with ``d[-1] = 0``."""
    cap = capacity.as_array()
    if len(arrivals.counts) != len(cap):
        raise ValidationError("arrival series and capacity profile differ in length")
    if np.any(arrivals.counts < 0):
        raise ValidationError("negative arrival count")
    v = np.cumsum(arrivals.counts, dtype=np.int64)
    d = fifo_departures(v, cap, backend=backend)
    q = np.zeros_like(v) if departures is None else np.cumsum(departures, dtype=np.int64)
    return CumulativeCurves(v, d, q, cap)


def wait_slots(curves: CumulativeCurves) -> int:
    """Sum over slot ends of the queue length."""
    return int((curves.v - curves.d).sum())


def total_wait(curves: CumulativeCurves, grid: SlotGrid) -> Fraction:
    """Total waiting time in passenger-hours, exact."""
    return wait_slots(curves) * grid.slot_hours


def fcfs_total_cost(tw: Fraction, params: CostParams, service: FifoService | None = None,
                    grid: SlotGrid | None = None) -> Fraction:
    """Cost of the unmanaged system, ``alpha * TW``.

    The identity only holds while every wait stays inside the linear
    branch of the cost function.  Pass the baseline ``service`` breakdown
    (and grid) to have that checked; violations raise
    :class:`RelationInvalidError`.
    """
    if service is not None:
        if grid is None:
            raise ValidationError("grid required to check the linear window")
        bad = service.outside_linear_window(grid)
        if bad:
            raise RelationInvalidError(
                f"{bad} passengers wait past the linear window or miss their flight; "
                "TC = alpha * TW does not hold")
    return params.alpha * Fraction(tw)


@dataclass(frozen=True)
class FifoService:
    """Passengers by group and the slot in which they clear security."""

    profile: DemandProfile
    matrix: np.ndarray
    unserved: np.ndarray

    def outside_linear_window(self, grid: SlotGrid) -> int:
        per_hour = Fraction(60, grid.delta_minutes)
        bad = int(self.unserved.sum())
        for i, g in enumerate(self.profile.groups):
            for s in np.flatnonzero(self.matrix[i]):
                if s < g.preferred_slot or s > g.departure_slot or s - g.preferred_slot > per_hour:
                    bad += int(self.matrix[i, s])
        return bad


def fifo_service(arrivals: ArrivalSeries, curves: CumulativeCurves, profile: DemandProfile) -> FifoService:
    """Attribute the FIFO departures to groups.

    Within a slot, arrivals are ordered by departure slot and then group
    order.  The passenger at 0-based queue position ``k`` clears security in
    the first slot whose ``d`` exceeds ``k``.
    """
    if arrivals.by_group is None:
        raise ValidationError("arrival series has no group identity")
    by_group = arrivals.by_group
    n_groups, n_slots = by_group.shape
    order = sorted(range(n_groups), key=lambda i: (profile.groups[i].departure_slot, i))
    d = curves.d
    d_prev = np.concatenate(([0], d[:-1]))
    served = np.zeros_like(by_group)
    unserved = np.zeros(n_groups, np.int64)
    pos = 0
    for t in range(n_slots):
        for i in order:
            n = int(by_group[i, t])
            if n == 0:
                continue
            lo, hi = pos, pos + n
            pos = hi
            first = int(np.searchsorted(d, lo, side="right"))
            last = int(np.searchsorted(d, hi - 1, side="right"))
            for s in range(first, min(last, n_slots - 1) + 1):
                served[i, s] += min(hi, d[s]) - max(lo, d_prev[s])
            unserved[i] += max(0, hi - max(lo, int(d[-1])))
    return FifoService(profile, served, unserved)


def fcfs_cost_by_passenger(service: FifoService, params: CostParams, grid: SlotGrid) -> Fraction:
    """Cost of the baseline computed passenger by passenger from service slots.

    Unserved passengers pay the missed-flight penalty.
    """
    total = params.gamma * int(service.unserved.sum())
    for i, g in enumerate(service.profile.groups):
        for s in np.flatnonzero(service.matrix[i]):
            total += int(service.matrix[i, s]) * reassignment_cost(g, int(s), params, grid)
    return total


def missed_flights(arrivals: ArrivalSeries, departure_slots: np.ndarray) -> int:
    """Passengers whose arrival slot starts after their flight has left."""
    if arrivals.by_group is None:
        raise ValidationError("arrival series has no group identity")
    slots = np.arange(arrivals.by_group.shape[1])
    late = slots[None, :] > np.asarray(departure_slots)[:, None]
    return int(arrivals.by_group[late].sum())


def missed_at_completion(service: FifoService) -> int:
    """Secondary statistic: passengers who clear security after departure."""
    dep = service.profile.departure_slots
    slots = np.arange(service.matrix.shape[1])
    late = slots[None, :] > dep[:, None]
    return int(service.matrix[late].sum() + service.unserved.sum())


def evaluate(arrivals: ArrivalSeries, capacity: CapacityProfile, profile: DemandProfile,
             grid: SlotGrid, backend: str | None = None) -> tuple[CumulativeCurves, SimMetrics]:
    """Simulate and compute TW, missed flights and spillover (TC left unset)."""
    curves = simulate_queue(arrivals, capacity, flight_departures(profile, grid), backend=backend)
    service = fifo_service(arrivals, curves, profile)
    metrics = SimMetrics(
        tw=total_wait(curves, grid),
        tc=None,
        missed=missed_flights(arrivals, profile.departure_slots),
        spillover=curves.spillover,
        missed_at_completion=missed_at_completion(service),
    )
    return curves, metrics
