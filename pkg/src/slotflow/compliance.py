"""Monte Carlo robustness of an assignment plan to passenger non-compliance.

Two models: every passenger accepts the slot but arrives with a normal
deviation (``GaussianJitter``), or each passenger independently accepts the
slot with probability ``p`` and otherwise arrives at the preferred slot
(``BernoulliAccept``).

Randomness: trial ``k`` of sweep point ``i`` draws from
``PCG64(SeedSequence(seed, spawn_key=(i, k)))``, so results do not depend on
trial execution order and substreams never overlap.  Normals come from
numpy's ziggurat sampler.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from collections.abc import Sequence

import numpy as np

from ._kernels import fifo_departures
from .assignment import AssignmentPlan, CapacityProfile, DemandProfile, SlotGrid
from .errors import ValidationError
from .queue import ArrivalSeries, baseline_arrivals, plan_arrivals


@dataclass(frozen=True)
class GaussianJitter:
    sigma: float
    boundary: str = "reflect"

    def __post_init__(self):
        if self.sigma < 0:
            raise ValidationError("sigma must be non-negative")
        if self.boundary not in ("reflect", "clamp"):
            raise ValidationError("boundary must be 'reflect' or 'clamp'")

    name = "sigma"

    @property
    def value(self) -> float:
        return self.sigma


@dataclass(frozen=True)
class BernoulliAccept:
    p: float

    def __post_init__(self):
        if not 0 <= self.p <= 1:
            raise ValidationError("p must lie in [0, 1]")

    name = "p"

    @property
    def value(self) -> float:
        return self.p


ComplianceModel = GaussianJitter | BernoulliAccept


@dataclass(frozen=True)
class ComplianceConfig:
    model: ComplianceModel
    trials: int = 200
    seed: int = 0

    def __post_init__(self):
        if self.trials < 1:
            raise ValidationError("trials must be >= 1")


@dataclass(frozen=True)
class ComplianceResult:
    parameter: str
    value: float
    tw: np.ndarray
    missed: np.ndarray
    passengers: int
    seed: int
    point: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def trials(self) -> int:
        return self.tw.size

    @property
    def missed_fraction(self) -> np.ndarray:
        return self.missed / self.passengers if self.passengers else np.zeros(self.trials)

    @staticmethod
    def _sd(a: np.ndarray) -> float:
        return float(a.std(ddof=1)) if a.size > 1 else 0.0

    @property
    def mean_tw(self) -> float:
        return float(self.tw.mean())

    @property
    def sd_tw(self) -> float:
        return self._sd(self.tw)

    @property
    def se_tw(self) -> float:
        return self.sd_tw / np.sqrt(self.trials)

    @property
    def mean_missed_fraction(self) -> float:
        return float(self.missed_fraction.mean())

    @property
    def sd_missed_fraction(self) -> float:
        return self._sd(self.missed_fraction)

    @property
    def se_missed_fraction(self) -> float:
        return self.sd_missed_fraction / np.sqrt(self.trials)


def substream(seed: int, point: int, trial: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(point, trial))))


def _expand(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Per-passenger (group, slot) arrays in group-major order."""
    n_groups, n_slots = matrix.shape
    cell = np.repeat(np.arange(matrix.size), matrix.ravel())
    return cell // n_slots, cell % n_slots


def _fold(minutes: np.ndarray, length: float, boundary: str) -> np.ndarray:
    if boundary == "clamp":
        return np.clip(minutes, 0, length)
    y = np.mod(minutes, 2 * length)
    return np.where(y > length, 2 * length - y, y)


def perturb_gaussian(plan: AssignmentPlan, sigma: float, rng: np.random.Generator,
                     grid: SlotGrid, boundary: str = "reflect") -> ArrivalSeries:
    """Shift every passenger's arrival by an independent N(0, sigma^2) minutes.

    Arrival times are measured from the assigned slot start and folded back
    into the horizon (``reflect``) or pinned to its ends (``clamp``), so no
    passenger leaves the day.
    """
    if sigma < 0:
        raise ValidationError("sigma must be non-negative")
    if sigma == 0:
        return ArrivalSeries.from_matrix(plan.matrix, "perturbed")
    groups, slots = _expand(plan.matrix)
    length = grid.num_slots * grid.delta_minutes
    minutes = slots * grid.delta_minutes + rng.normal(0.0, sigma, size=slots.size)
    minutes = _fold(minutes, length, boundary)
    new_slots = np.minimum((minutes // grid.delta_minutes).astype(np.int64), grid.num_slots - 1)
    n_groups, n_slots = plan.matrix.shape
    counts = np.bincount(groups * n_slots + new_slots, minlength=n_groups * n_slots)
    return ArrivalSeries.from_matrix(counts.reshape(n_groups, n_slots), "perturbed")


def perturb_bernoulli(plan: AssignmentPlan, p: float, profile: DemandProfile,
                      rng: np.random.Generator) -> ArrivalSeries:
    """Each passenger keeps the assigned slot with probability ``p``.

    The passengers of one (group, slot) cell are exchangeable, so the number
    who accept is drawn as one binomial per cell.
    """
    if not 0 <= p <= 1:
        raise ValidationError("p must lie in [0, 1]")
    matrix = plan.matrix
    accepted = rng.binomial(matrix, p).astype(np.int64)
    out = accepted.copy()
    reverted = (matrix - accepted).sum(axis=1)
    out[np.arange(len(profile)), profile.preferred_slots] += reverted
    return ArrivalSeries.from_matrix(out, "perturbed")


def _perturb(plan, model, rng, profile, grid):
    if isinstance(model, GaussianJitter):
        return perturb_gaussian(plan, model.sigma, rng, grid, model.boundary)
    return perturb_bernoulli(plan, model.p, profile, rng)


def tw_hours(v: np.ndarray, d: np.ndarray, grid: SlotGrid) -> np.ndarray:
    """TW per row in passenger-hours; integer sums scaled once so endpoints are bit-exact."""
    return (v - d).sum(axis=-1) * grid.delta_minutes / 60


def run_trials(plan: AssignmentPlan, capacity: CapacityProfile, config: ComplianceConfig,
               profile: DemandProfile, grid: SlotGrid, point: int = 0,
               backend: str | None = None) -> ComplianceResult:
    model = config.model
    late = np.arange(grid.num_slots)[None, :] > profile.departure_slots[:, None]
    v = np.empty((config.trials, grid.num_slots), np.int64)
    missed = np.empty(config.trials, np.int64)
    for k in range(config.trials):
        arrivals = _perturb(plan, model, substream(config.seed, point, k), profile, grid)
        v[k] = np.cumsum(arrivals.counts)
        missed[k] = arrivals.by_group[late].sum()
    d = fifo_departures(v, capacity.as_array(), backend=backend)
    return ComplianceResult(model.name, float(model.value), tw_hours(v, d, grid), missed,
                            profile.total_passengers, config.seed, point)


def sweep(values: Sequence[float], kind: str, plan: AssignmentPlan, capacity: CapacityProfile,
          profile: DemandProfile, grid: SlotGrid, trials: int = 200, seed: int = 0,
          boundary: str = "reflect", backend: str | None = None) -> list[ComplianceResult]:
    """One :func:`run_trials` per grid value; point ``i`` uses substreams ``(i, *)``."""
    if not len(values):
        raise ValidationError("sweep grid is empty")
    results = []
    for i, value in enumerate(values):
        if kind == "gaussian":
            model = GaussianJitter(float(value), boundary)
        elif kind == "bernoulli":
            model = BernoulliAccept(float(value))
        else:
            raise ValidationError(f"unknown compliance model {kind!r}")
        cfg = ComplianceConfig(model, trials, seed)
        results.append(run_trials(plan, capacity, cfg, profile, grid, point=i, backend=backend))
    return results


def reference_tw(arrivals: ArrivalSeries, capacity: CapacityProfile, grid: SlotGrid,
                 backend: str | None = None) -> float:
    """Deterministic TW of one arrival series, computed the same way as the trials."""
    v = np.cumsum(arrivals.counts)[None, :]
    d = fifo_departures(v, capacity.as_array(), backend=backend)
    return float(tw_hours(v, d, grid)[0])


def endpoint_tws(plan: AssignmentPlan, capacity: CapacityProfile, profile: DemandProfile,
                 grid: SlotGrid) -> tuple[float, float]:
    """(optimized-plan TW, first-come-first-served TW)."""
    return (reference_tw(plan_arrivals(plan), capacity, grid),
            reference_tw(baseline_arrivals(profile, grid), capacity, grid))
