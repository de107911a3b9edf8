"""Result serialization: a JSON summary plus CSV series.

Output is byte-stable for identical inputs: keys are sorted, floats use
``repr`` and exact rationals are written as ``"num/den"`` strings next to a
float rendering.
"""
from __future__ import annotations

import csv
import io
import json
from fractions import Fraction
from pathlib import Path
from collections.abc import Iterable, Mapping, Sequence

import numpy as np

from .assignment import AssignmentPlan, SlotGrid
from .compliance import ComplianceResult
from .queue import CumulativeCurves
from .schedule import format_hhmm

Table = tuple[Sequence[str], Iterable[Sequence]]


def exact(value: Fraction | int) -> dict:
    value = Fraction(value)
    return {"exact": f"{value.numerator}/{value.denominator}", "value": float(value)}


def _plain(obj):
    if isinstance(obj, Fraction):
        return exact(obj)
    if isinstance(obj, Mapping):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    return obj


def summary_text(summary: Mapping) -> str:
    return json.dumps(_plain(summary), sort_keys=True, indent=2) + "\n"


def table_text(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([_cell(v) for v in row])
    return out.getvalue()


def _cell(v):
    if isinstance(v, Fraction):
        return f"{v.numerator}/{v.denominator}" if v.denominator != 1 else str(v.numerator)
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def write_report(outdir: str | Path, summary: Mapping, tables: Mapping[str, Table]) -> list[Path]:
    """Write ``summary.json`` and one ``<name>.csv`` per table; returns the paths."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    paths = [outdir / "summary.json"]
    paths[0].write_text(summary_text(summary))
    for name, (header, rows) in sorted(tables.items()):
        path = outdir / f"{name}.csv"
        path.write_text(table_text(header, rows))
        paths.append(path)
    return paths


CURVE_HEADER = ("slot", "start", "v", "d", "q", "capacity")


def curve_rows(curves: CumulativeCurves, grid: SlotGrid) -> list[tuple]:
    return [(t, format_hhmm(grid.slot_start(t) % 1440), int(curves.v[t]), int(curves.d[t]),
             int(curves.q[t]), int(curves.capacity[t])) for t in range(grid.num_slots)]


PLAN_HEADER = ("group", "preferred_slot", "departure_slot", "assigned_slot", "assigned_start", "count")


def plan_rows(plan: AssignmentPlan, grid: SlotGrid) -> list[tuple]:
    rows = []
    for g, slots in plan.entries.items():
        group = plan.profile.groups[g]
        for t, n in slots.items():
            rows.append((g, group.preferred_slot, group.departure_slot, t,
                         format_hhmm(grid.slot_start(t) % 1440), n))
    return rows


SWEEP_HEADER = ("parameter", "value", "mean_tw", "sd_tw", "mean_missed_fraction",
                "sd_missed_fraction", "trials", "seed")


def sweep_rows(results: Sequence[ComplianceResult]) -> list[tuple]:
    return [(r.parameter, r.value, r.mean_tw, r.sd_tw, r.mean_missed_fraction,
             r.sd_missed_fraction, r.trials, r.seed) for r in results]


def trial_rows(result: ComplianceResult) -> list[tuple]:
    return [(k, float(tw), int(m)) for k, (tw, m) in enumerate(zip(result.tw, result.missed))]
