"""Command-line entry point.

Exit codes: 0 success, 2 invalid input, 3 infeasible, 4 solver failure,
5 I/O error.  Diagnostics go to stderr; results go to the output directory
(``--out``, else ``$SLOTFLOW_OUT``, else ``./slotflow-out``).
"""
from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from . import __version__, report
from .errors import InfeasibleError, SolverError, ValidationError
from .scenario import Scenario, run_capacity, run_comply, run_simulate, run_solve, run_sweep
from .schedule import ScenarioConfig, reference_day_schedule, generate_synthetic, Peak, write_schedule

EXIT_OK, EXIT_INVALID, EXIT_INFEASIBLE, EXIT_SOLVER, EXIT_IO = 0, 2, 3, 4, 5
OUT_ENV = "SLOTFLOW_OUT"
DEFAULT_OUT = "slotflow-out"

log = logging.getLogger("slotflow")


class _ArgError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _ArgError(f"{self.prog}: {message}")


def _global_flags(parser: argparse.ArgumentParser, suppress: bool) -> None:
    # Registered on the root parser and on every subparser so they may appear
    # on either side of the subcommand.  Subparsers use SUPPRESS so they do not
    # overwrite a value given before the subcommand.
    default = argparse.SUPPRESS if suppress else None
    parser.add_argument("--config", default=default, help="scenario JSON file")
    parser.add_argument("--out", default=default, help="output directory")
    parser.add_argument("--seed", type=int, default=default, help="Monte Carlo seed override")
    parser.add_argument("-v", "--verbose", action="count", default=argparse.SUPPRESS if suppress else 0)
    parser.add_argument("--backend", choices=("numba", "numpy"), default=default,
                        help="kernel backend (default: numba unless SLOTFLOW_DISABLE_NUMBA=1)")


def _scenario_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--schedule", help="schedule CSV (default: synthetic reference day)")
    p.add_argument("--synthetic-seed", type=int)
    p.add_argument("--delta", type=int, dest="delta_minutes", help="slot length in minutes")
    p.add_argument("--slots", type=int, dest="num_slots")
    p.add_argument("--start", type=int, dest="start_minute", help="grid start, minutes from midnight")
    p.add_argument("--alpha")
    p.add_argument("--beta")
    p.add_argument("--gamma")
    p.add_argument("--load-factor")


def _capacity_flags(p: argparse.ArgumentParser, optimize_only: bool = False) -> None:
    if not optimize_only:
        p.add_argument("--capacity", type=int, help="uniform capacity per slot")
        p.add_argument("--capacity-profile", help="comma-separated capacity per slot")
        p.add_argument("--optimize-capacity", action="store_true",
                       help="optimize time-varying capacity first")
    p.add_argument("--lambda1")
    p.add_argument("--lambda2")
    p.add_argument("--capacity-cap", type=int)


def _compliance_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--trials", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="slotflow", description="Security time-slot reassignment by min-cost flow.")
    parser.add_argument("--version", action="version", version=f"slotflow {__version__}")
    _global_flags(parser, suppress=False)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    gen = sub.add_parser("generate", help="write a synthetic schedule CSV")
    gen.add_argument("--flights", type=int, default=260)
    gen.add_argument("--seats", type=int, default=49_034)
    gen.add_argument("--no-peak", action="store_true", help="uniform departures over the day")
    gen.add_argument("--reference-day", action="store_true", help="the preset used when no schedule is given")

    for name, text in (("solve", "optimal reassignment vs the first-come-first-served baseline"),
                       ("simulate", "baseline queue only"),
                       ("capacity", "optimize time-varying capacity"),
                       ("comply", "Monte Carlo under one non-compliance setting"),
                       ("sweep", "Monte Carlo over a parameter grid")):
        p = sub.add_parser(name, help=text)
        _scenario_flags(p)
        _capacity_flags(p, optimize_only=name == "capacity")
        if name in ("comply", "sweep"):
            _compliance_flags(p)
        if name == "comply":
            p.add_argument("--model", choices=("gaussian", "bernoulli"))
            p.add_argument("--sigma", type=float)
            p.add_argument("--p", type=float)
        if name == "sweep":
            p.add_argument("--model", choices=("gaussian", "bernoulli"), required=True)
            p.add_argument("--values", help="comma-separated grid (default depends on model)")
    for p in sub.choices.values():
        _global_flags(p, suppress=True)
    return parser


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _config(args) -> ScenarioConfig:
    cfg = ScenarioConfig.load(args.config) if args.config else ScenarioConfig()
    data = cfg.to_dict()
    direct = ("delta_minutes", "num_slots", "start_minute", "alpha", "beta", "gamma",
              "lambda1", "lambda2", "capacity_cap", "trials", "sigma", "p", "synthetic_seed", "seed")
    for key in direct:
        value = getattr(args, key, None)
        if value is not None:
            data[key] = value
    if getattr(args, "load_factor", None) is not None:
        data["load_factor"] = args.load_factor
    if getattr(args, "schedule", None):
        if not Path(args.schedule).exists():
            raise ValidationError(f"schedule file {args.schedule} does not exist")
        data["schedule"] = str(args.schedule)
    if getattr(args, "capacity", None) is not None:
        data.update(capacity=args.capacity, capacity_mode="uniform")
    if getattr(args, "capacity_profile", None):
        data.update(capacity_profile=[int(v) for v in _floats(args.capacity_profile, "--capacity-profile")],
                    capacity_mode="profile")
    if getattr(args, "optimize_capacity", False) or args.command == "capacity":
        data["capacity_mode"] = "optimize"
    if getattr(args, "model", None):
        data["compliance_model"] = args.model
    try:
        return ScenarioConfig(**data)
    except (TypeError, ValueError) as exc:
        raise ValidationError(str(exc)) from None


def _generate(args, out: Path) -> None:
    seed = 12345 if args.seed is None else args.seed
    if args.reference_day:
        schedule = reference_day_schedule(seed)
    else:
        peaks = () if args.no_peak else (Peak(),)
        schedule = generate_synthetic(seed, args.flights, args.seats, peaks)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "schedule.csv"
    write_schedule(schedule, path)
    print(path)


def _dispatch(args, out: Path) -> None:
    if args.command == "generate":
        _generate(args, out)
        return
    cfg = _config(args)
    scn = Scenario.from_config(cfg)
    log.info("%s: %d passengers in %d groups", scn.source, scn.passengers, len(scn.profile))
    backend = args.backend
    if args.command == "solve":
        summary, tables = run_solve(scn, backend)
    elif args.command == "simulate":
        summary, tables = run_simulate(scn, backend)
    elif args.command == "capacity":
        summary, tables = run_capacity(scn, backend)
    elif args.command == "comply":
        summary, tables = run_comply(scn, backend)
    else:
        values = _floats(args.values, "--values") if args.values else None
        summary, tables = run_sweep(scn, args.model, values, backend)
    summary["parameters"]["backend"] = backend or "default"
    for path in report.write_report(out, summary, tables):
        print(path)


def run(argv: list[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except _ArgError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2), stream=sys.stderr,
                        format="%(levelname)s %(message)s")
    out = Path(args.out or os.environ.get(OUT_ENV) or DEFAULT_OUT)
    try:
        _dispatch(args, out)
    except InfeasibleError as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        if exc.critical_capacity is not None:
            print(f"critical capacity: {exc.critical_capacity}", file=sys.stderr)
        return EXIT_INFEASIBLE
    except SolverError as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    except ValidationError as exc:
        print(f"invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
