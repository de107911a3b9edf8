"""Flight schedules: CSV interchange, synthetic generation, scenario config.

Schedule CSV::

    flight_id,departure,seats
    VY1234,06:35,180

Departures are 24h ``HH:MM`` local times; internally they are integer minutes
from midnight.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import asdict, dataclass
from fractions import Fraction
from pathlib import Path
from collections.abc import Iterable, Sequence

import numpy as np

from .errors import ScheduleParseError, ValidationError

HEADER = ("flight_id", "departure", "seats")


@dataclass(frozen=True)
class Flight:
    flight_id: str
    departure: int
    seats: int


@dataclass(frozen=True)
class Schedule:
    flights: tuple[Flight, ...]
    date: str = ""

    def __init__(self, flights: Iterable[Flight], date: str = ""):
        flights = tuple(flights)
        seen = set()
        for f in flights:
            if f.flight_id in seen:
                raise ValidationError(f"duplicate flight id {f.flight_id!r}")
            seen.add(f.flight_id)
            if not 0 <= f.departure < 1440:
                raise ValidationError(f"flight {f.flight_id}: departure {f.departure} outside the day")
            if f.seats < 1:
                raise ValidationError(f"flight {f.flight_id}: seats must be >= 1")
        object.__setattr__(self, "flights", flights)
        object.__setattr__(self, "date", date)

    @property
    def total_seats(self) -> int:
        return sum(f.seats for f in self.flights)

    def __len__(self) -> int:
        return len(self.flights)


def format_hhmm(minute: int) -> str:
    return f"{minute // 60:02d}:{minute % 60:02d}"


def parse_hhmm(text: str) -> int:
    parts = text.strip().split(":")
    if len(parts) != 2 or not all(p.isdigit() for p in parts) or len(parts[1]) != 2:
        raise ValueError(f"malformed time {text!r}, expected HH:MM")
    hh, mm = int(parts[0]), int(parts[1])
    if hh > 23:
        raise ValueError(f"hour out of range in {text!r}")
    if mm > 59:
        raise ValueError(f"minute out of range in {text!r}")
    return hh * 60 + mm


def parse_schedule_text(text: str, date: str = "") -> Schedule:
    rows = csv.reader(io.StringIO(text))
    header = next(rows, None)
    if header is None or tuple(h.strip().lower() for h in header) != HEADER:
        raise ScheduleParseError(f"header must be {','.join(HEADER)}", line=1)
    flights, seen = [], set()
    for lineno, row in enumerate(rows, start=2):
        if not row or all(not cell.strip() for cell in row):
            continue
        if len(row) != 3:
            raise ScheduleParseError(f"expected 3 fields, got {len(row)}", line=lineno)
        fid, dep, seats = (cell.strip() for cell in row)
        if not fid:
            raise ScheduleParseError("empty flight id", line=lineno)
        if fid in seen:
            raise ScheduleParseError(f"duplicate flight id {fid!r}", line=lineno)
        try:
            minute = parse_hhmm(dep)
        except ValueError as exc:
            raise ScheduleParseError(str(exc), line=lineno) from None
        try:
            n = int(seats)
        except ValueError:
            raise ScheduleParseError(f"seats {seats!r} is not an integer", line=lineno) from None
        if n < 1:
            raise ScheduleParseError(f"seats must be positive, got {n}", line=lineno)
        seen.add(fid)
        flights.append(Flight(fid, minute, n))
    return Schedule(flights, date)


def parse_schedule(path: str | Path) -> Schedule:
    path = Path(path)
    return parse_schedule_text(path.read_text(), date=path.stem)


def schedule_to_csv(schedule: Schedule) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(HEADER)
    for f in schedule.flights:
        writer.writerow((f.flight_id, format_hhmm(f.departure), f.seats))
    return out.getvalue()


def write_schedule(schedule: Schedule, path: str | Path) -> None:
    Path(path).write_text(schedule_to_csv(schedule))


@dataclass(frozen=True)
class Peak:
    """Departure window receiving ``weight`` of the flights, in minutes."""

    start: int = 360
    end: int = 540
    weight: float = 0.25


# Airport-style size classes: regional, narrow-body, large narrow-body, wide-body.
_SEAT_CLASSES = np.array([76, 150, 186, 220, 300])
_SEAT_WEIGHTS = np.array([0.10, 0.25, 0.40, 0.15, 0.10])


def generate_synthetic(seed: int, num_flights: int = 260, total_seats: int = 49_034,
                       peaks: Sequence[Peak] | None = (Peak(),),
                       day_start: int = 0, day_end: int = 1440) -> Schedule:
    """Deterministic synthetic departure schedule.

    Each flight departs in a peak window with that peak's weight, otherwise
    uniformly in ``[day_start, day_end)``.  Seats are one per flight plus a
    multinomial split of the remainder proportional to a drawn aircraft size,
    so they sum to ``total_seats`` exactly.
    """
    if num_flights < 1:
        raise ValidationError("need at least one flight")
    if total_seats < num_flights:
        raise ValidationError("total_seats must be at least num_flights")
    peaks = tuple(peaks or ())
    weights = [p.weight for p in peaks]
    if any(w < 0 for w in weights) or sum(weights) > 1:
        raise ValidationError("peak weights must be non-negative and sum to at most 1")
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    probs = np.array(weights + [1 - sum(weights)])
    which = rng.choice(len(probs), size=num_flights, p=probs / probs.sum())
    lows = np.array([p.start for p in peaks] + [day_start])
    highs = np.array([p.end for p in peaks] + [day_end])
    minutes = rng.integers(lows[which], highs[which])
    sizes = rng.choice(_SEAT_CLASSES, size=num_flights, p=_SEAT_WEIGHTS)
    seats = 1 + rng.multinomial(total_seats - num_flights, sizes / sizes.sum())
    order = np.lexsort((np.arange(num_flights), minutes))
    flights = [Flight(f"SYN{k + 1:04d}", int(minutes[j]), int(seats[j])) for k, j in enumerate(order)]
    return Schedule(flights, date=f"synthetic-{seed}")


@dataclass
class ScenarioConfig:
    """Everything needed to run a scenario, with the standard defaults.

    ``capacity_mode`` is ``"uniform"`` (uses ``capacity``), ``"profile"``
    (uses ``capacity_profile``) or ``"optimize"`` (uses the lambdas).  With
    no ``schedule`` the synthetic reference day for ``synthetic_seed`` is used.
    Rationals are kept as strings such as ``"4"`` or ``"1/2"``.
    """

    schedule: str | None = None
    delta_minutes: int = 15
    num_slots: int = 96
    start_minute: int = 0
    alpha: str = "4"
    beta: str = "1"
    gamma: str = "200"
    capacity_mode: str = "uniform"
    capacity: int = 900
    capacity_profile: list[int] | None = None
    lambda1: str = "0"
    lambda2: str = "10"
    capacity_cap: int | None = None
    load_factor: str = "1"
    compliance_model: str | None = None
    sigma: float = 0.0
    p: float = 1.0
    trials: int = 200
    seed: int = 12345
    synthetic_seed: int = 12345

    def __post_init__(self):
        for name in ("alpha", "beta", "gamma", "lambda1", "lambda2", "load_factor"):
            setattr(self, name, str(Fraction(str(getattr(self, name)))))
        if self.capacity_mode not in ("uniform", "profile", "optimize"):
            raise ValidationError(f"unknown capacity_mode {self.capacity_mode!r}")
        if self.capacity_mode == "profile" and not self.capacity_profile:
            raise ValidationError("capacity_mode 'profile' needs capacity_profile")
        if self.capacity < 0:
            raise ValidationError("capacity must be non-negative")
        if self.compliance_model not in (None, "gaussian", "bernoulli"):
            raise ValidationError(f"unknown compliance model {self.compliance_model!r}")
        if self.sigma < 0 or not 0 <= self.p <= 1 or self.trials < 1:
            raise ValidationError("need sigma >= 0, 0 <= p <= 1 and trials >= 1")
        if Fraction(self.lambda1) < 0 or Fraction(self.lambda2) < 0:
            raise ValidationError("lambdas must be non-negative")

    @classmethod
    def load(cls, path: str | Path) -> ScenarioConfig:
        path = Path(path)
        try:
            data = json.loads(path.read_text())
        except json.JSONDecodeError as exc:
            raise ValidationError(f"{path}: {exc}") from None
        known = set(cls.__dataclass_fields__)
        unknown = sorted(set(data) - known)
        if unknown:
            raise ValidationError(f"{path}: unknown config keys {unknown}")
        try:
            cfg = cls(**data)
        except (TypeError, ValueError) as exc:
            raise ValidationError(f"{path}: {exc}") from None
        if cfg.schedule is not None:
            sched = Path(cfg.schedule)
            if not sched.is_absolute():
                sched = path.parent / sched
            if not sched.exists():
                raise ValidationError(f"{path}: schedule file {sched} does not exist")
            cfg.schedule = str(sched)
        return cfg

    def to_dict(self) -> dict:
        return asdict(self)


# Synthetic stand-in for a busy single-terminal day: 260 departures and
# 49,034 seats, flights between 05:00 and 23:00 with a 06:00-09:00 bank.
REFERENCE_DAY = dict(num_flights=260, total_seats=49_034, peaks=(Peak(360, 540, 0.12),),
                     day_start=300, day_end=1380)


def reference_day_schedule(seed: int = 12345) -> Schedule:
    return generate_synthetic(seed, **REFERENCE_DAY)
