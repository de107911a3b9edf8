"""End-to-end pipelines behind the command-line subcommands.

Each ``run_*`` function returns ``(summary, tables)`` ready for
:func:`slotflow.report.write_report`.  Every effective parameter is echoed
under ``summary["parameters"]``.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from collections.abc import Sequence

import numpy as np

from . import report
from .assignment import (AssignmentPlan, CapacityProfile, CostParams, DemandProfile, SlotGrid,
                         arrival_shift_histogram, build_demand_profile, critical_capacity,
                         solve_assignment)
from .capacity import CapacityOptConfig, CapacityResult, optimize_capacity
from .compliance import (BernoulliAccept, ComplianceConfig, GaussianJitter, endpoint_tws,
                         run_trials, sweep)
from .errors import RelationInvalidError, ValidationError
from .queue import (baseline_arrivals, evaluate, fcfs_cost_by_passenger, fcfs_total_cost,
                    fifo_service, plan_arrivals)
from .schedule import ScenarioConfig, Schedule, reference_day_schedule, parse_schedule

DEFAULT_SIGMAS = (0, 15, 30, 60, 120, 240)
DEFAULT_PS = (0, 0.25, 0.5, 0.75, 1)


@dataclass(frozen=True)
class Scenario:
    config: ScenarioConfig
    grid: SlotGrid
    params: CostParams
    profile: DemandProfile
    flights: int
    source: str

    @classmethod
    def from_config(cls, config: ScenarioConfig) -> Scenario:
        if config.schedule is None:
            schedule = reference_day_schedule(config.synthetic_seed)
            source = f"synthetic:{config.synthetic_seed}"
        else:
            schedule = parse_schedule(config.schedule)
            source = config.schedule
        return cls.from_schedule(config, schedule, source)

    @classmethod
    def from_schedule(cls, config: ScenarioConfig, schedule: Schedule, source: str = "") -> Scenario:
        grid = SlotGrid(config.delta_minutes, config.num_slots, config.start_minute)
        params = CostParams(Fraction(config.alpha), Fraction(config.beta), Fraction(config.gamma))
        profile = build_demand_profile(schedule, grid, Fraction(config.load_factor))
        return cls(config, grid, params, profile, len(schedule), source)

    @classmethod
    def from_profile(cls, config: ScenarioConfig, profile: DemandProfile, source: str = "profile") -> Scenario:
        grid = SlotGrid(config.delta_minutes, config.num_slots, config.start_minute)
        params = CostParams(Fraction(config.alpha), Fraction(config.beta), Fraction(config.gamma))
        return cls(config, grid, params, profile, 0, source)

    @property
    def passengers(self) -> int:
        return self.profile.total_passengers

    def fixed_capacity(self) -> CapacityProfile:
        cfg = self.config
        if cfg.capacity_mode == "profile":
            cap = CapacityProfile(cfg.capacity_profile)
            if len(cap) != self.grid.num_slots:
                raise ValidationError(f"capacity_profile has {len(cap)} entries, "
                                      f"grid has {self.grid.num_slots} slots")
            return cap
        return CapacityProfile.uniform(cfg.capacity, self.grid.num_slots)

    def capacity_config(self) -> CapacityOptConfig:
        cfg = self.config
        return CapacityOptConfig(Fraction(cfg.lambda1), Fraction(cfg.lambda2), cfg.capacity_cap)


def parameters(scn: Scenario, **extra) -> dict:
    """Every effective parameter, defaults included."""
    out = scn.config.to_dict()
    out.update(source=scn.source, flights=scn.flights, passengers=scn.passengers,
               groups=len(scn.profile),
               critical_capacity=critical_capacity(scn.passengers, scn.grid.num_slots))
    out.update(extra)
    return out


def _ratio(saved: Fraction, base: Fraction) -> Fraction | None:
    return saved / base if base else None


def _metrics(metrics) -> dict:
    return {"tw": metrics.tw, "missed": metrics.missed, "spillover": metrics.spillover,
            "missed_at_completion": metrics.missed_at_completion}


def baseline_summary(scn: Scenario, capacity: CapacityProfile, backend: str | None = None):
    """FCFS metrics plus the exact baseline cost; returns (summary, curves)."""
    arrivals = baseline_arrivals(scn.profile, scn.grid)
    curves, metrics = evaluate(arrivals, capacity, scn.profile, scn.grid, backend)
    service = fifo_service(arrivals, curves, scn.profile)
    by_passenger = fcfs_cost_by_passenger(service, scn.params, scn.grid)
    try:
        tc = fcfs_total_cost(metrics.tw, scn.params, service, scn.grid)
        holds = True
    except RelationInvalidError:
        tc, holds = by_passenger, False
    out = _metrics(metrics)
    out.update(tc=tc, tc_by_passenger=by_passenger, tc_alpha_tw=scn.params.alpha * metrics.tw,
               linear_relation_holds=holds)
    return out, curves


def plan_summary(scn: Scenario, plan: AssignmentPlan, capacity: CapacityProfile,
                 backend: str | None = None):
    curves, metrics = evaluate(plan_arrivals(plan), capacity, scn.profile, scn.grid, backend)
    out = _metrics(metrics)
    out["tc"] = plan.objective
    return out, curves


def _capacity_block(result: CapacityResult, config: CapacityOptConfig) -> dict:
    d = result.diagnostics
    return {"lp_objective": d.lp_objective, "lp_iterations": d.lp_iterations,
            "integral_objective": d.integral_objective, "assignment_cost": d.assignment_cost,
            "total_capacity": d.total_capacity, "total_variation": d.total_variation,
            "lambda1": config.lambda1, "lambda2": config.lambda2}


def _capacity_and_plan(scn: Scenario, backend):
    if scn.config.capacity_mode == "optimize":
        cfg = scn.capacity_config()
        result = optimize_capacity(scn.profile, scn.params, cfg, scn.grid, backend)
        return result.capacity, result.plan, _capacity_block(result, cfg)
    capacity = scn.fixed_capacity()
    return capacity, solve_assignment(scn.profile, capacity, scn.params, scn.grid, backend), None


def _capacity_rows(capacity: CapacityProfile, served: np.ndarray, grid: SlotGrid) -> list[tuple]:
    return [(t, report.format_hhmm(grid.slot_start(t) % 1440), int(c), int(s))
            for t, (c, s) in enumerate(zip(capacity.values, served))]


CAPACITY_HEADER = ("slot", "start", "capacity", "served")
HISTOGRAM_HEADER = ("shift_minutes", "passengers")


def run_solve(scn: Scenario, backend: str | None = None):
    capacity, plan, cap_block = _capacity_and_plan(scn, backend)
    baseline, base_curves = baseline_summary(scn, capacity, backend)
    optimized, plan_curves = plan_summary(scn, plan, capacity, backend)
    summary = {
        "command": "solve",
        "parameters": parameters(scn),
        "baseline": baseline,
        "optimized": optimized,
        "tc_reduction": _ratio(baseline["tc"] - optimized["tc"], baseline["tc"]),
        "tw_reduction": _ratio(baseline["tw"] - optimized["tw"], baseline["tw"]),
        "capacity_total": int(capacity.as_array().sum()),
    }
    if cap_block is not None:
        summary["capacity_optimization"] = cap_block
    hist = arrival_shift_histogram(plan, scn.grid)
    tables = {
        "plan": (report.PLAN_HEADER, report.plan_rows(plan, scn.grid)),
        "curves_baseline": (report.CURVE_HEADER, report.curve_rows(base_curves, scn.grid)),
        "curves_plan": (report.CURVE_HEADER, report.curve_rows(plan_curves, scn.grid)),
        "shift_histogram": (HISTOGRAM_HEADER, sorted(hist.items())),
    }
    return summary, tables


def run_simulate(scn: Scenario, backend: str | None = None):
    """Baseline only: everyone arrives at the preferred slot."""
    capacity = scn.fixed_capacity()
    baseline, curves = baseline_summary(scn, capacity, backend)
    summary = {"command": "simulate", "parameters": parameters(scn), "baseline": baseline,
               "capacity_total": int(capacity.as_array().sum())}
    return summary, {"curves_baseline": (report.CURVE_HEADER, report.curve_rows(curves, scn.grid))}


def run_capacity(scn: Scenario, backend: str | None = None):
    cfg = scn.capacity_config()
    result = optimize_capacity(scn.profile, scn.params, cfg, scn.grid, backend)
    optimized, curves = plan_summary(scn, result.plan, result.capacity, backend)
    summary = {"command": "capacity", "parameters": parameters(scn, capacity_mode="optimize"),
               "capacity_optimization": _capacity_block(result, cfg), "optimized": optimized}
    lp_rows = [(t, float(c)) for t, c in enumerate(result.diagnostics.lp_capacity)]
    tables = {
        "capacity": (CAPACITY_HEADER, _capacity_rows(result.capacity, curves.served, scn.grid)),
        "capacity_lp": (("slot", "lp_capacity"), lp_rows),
        "plan": (report.PLAN_HEADER, report.plan_rows(result.plan, scn.grid)),
        "curves_plan": (report.CURVE_HEADER, report.curve_rows(curves, scn.grid)),
    }
    return summary, tables


def _model(kind: str, value: float):
    if kind == "gaussian":
        return GaussianJitter(float(value))
    if kind == "bernoulli":
        return BernoulliAccept(float(value))
    raise ValidationError(f"unknown compliance model {kind!r}")


def _result_block(r) -> dict:
    return {"parameter": r.parameter, "value": r.value, "trials": r.trials, "seed": r.seed,
            "mean_tw": r.mean_tw, "sd_tw": r.sd_tw, "se_tw": r.se_tw,
            "mean_missed_fraction": r.mean_missed_fraction,
            "sd_missed_fraction": r.sd_missed_fraction}


def _reference(scn, backend):
    capacity, plan, _ = _capacity_and_plan(scn, backend)
    plan_tw, base_tw = endpoint_tws(plan, capacity, scn.profile, scn.grid)
    return capacity, plan, {"plan_tw": plan_tw, "baseline_tw": base_tw}


def run_comply(scn: Scenario, backend: str | None = None):
    cfg = scn.config
    kind = cfg.compliance_model or "bernoulli"
    value = cfg.sigma if kind == "gaussian" else cfg.p
    capacity, plan, ref = _reference(scn, backend)
    model = _model(kind, value)
    result = run_trials(plan, capacity, ComplianceConfig(model, cfg.trials, cfg.seed),
                        scn.profile, scn.grid, backend=backend)
    block = _result_block(result)
    base = ref["baseline_tw"]
    block["tw_reduction_vs_baseline"] = (base - result.mean_tw) / base if base else None
    summary = {"command": "comply", "parameters": parameters(scn, compliance_model=kind),
               "reference": ref, "result": block}
    tables = {"trials": (("trial", "tw", "missed"), report.trial_rows(result))}
    return summary, tables


def run_sweep(scn: Scenario, kind: str, values: Sequence[float] | None = None,
              backend: str | None = None):
    cfg = scn.config
    if values is None:
        values = DEFAULT_SIGMAS if kind == "gaussian" else DEFAULT_PS
    values = [float(v) for v in values]
    capacity, plan, ref = _reference(scn, backend)
    results = sweep(values, kind, plan, capacity, scn.profile, scn.grid, cfg.trials, cfg.seed,
                    backend=backend)
    base = ref["baseline_tw"]
    blocks = []
    for r in results:
        b = _result_block(r)
        b["tw_reduction_vs_baseline"] = (base - r.mean_tw) / base if base else None
        blocks.append(b)
    summary = {"command": "sweep", "parameters": parameters(scn, compliance_model=kind, grid=values),
               "reference": ref, "points": blocks}
    return summary, {"sweep": (report.SWEEP_HEADER, report.sweep_rows(results))}
