"""Compare the numba and numpy kernel backends.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Times the full-day assignment solve (successive shortest paths) and the
batched FIFO queue recurrence used by the Monte Carlo runs.  Both backends
must agree; the script exits nonzero if they do not.
"""
import argparse
import sys
import time

import numpy as np

from slotflow._accel import HAVE_NUMBA
from slotflow._kernels import fifo_departures
from slotflow.assignment import CapacityProfile, CostParams, SlotGrid, build_demand_profile, solve_assignment
from slotflow.schedule import reference_day_schedule


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--trials", type=int, default=2000)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba not installed; only the numpy backend is timed")
    backends = ["numba", "numpy"] if HAVE_NUMBA else ["numpy"]

    grid = SlotGrid()
    profile = build_demand_profile(reference_day_schedule(), grid)
    cap = CapacityProfile.uniform(900, grid.num_slots)
    params = CostParams()
    rng = np.random.default_rng(0)
    v = np.cumsum(rng.integers(0, 1200, size=(args.trials, grid.num_slots)), axis=1)
    c = np.full(grid.num_slots, 900, np.int64)

    results = {}
    for b in backends:
        # warm-up triggers compilation (or loads the on-disk cache)
        solve_assignment(profile, cap, params, grid, backend=b)
        fifo_departures(v[:2], c, backend=b)
        t_ssp, plan = best_of(lambda: solve_assignment(profile, cap, params, grid, backend=b), args.repeat)
        t_fifo, d = best_of(lambda: fifo_departures(v, c, backend=b), args.repeat)
        results[b] = (plan.objective, d)
        print(f"{b:6s} assignment solve {t_ssp * 1e3:9.1f} ms   "
              f"fifo x{args.trials} {t_fifo * 1e3:8.2f} ms")

    if len(results) == 2:
        (o1, d1), (o2, d2) = results.values()
        if o1 != o2 or not np.array_equal(d1, d2):
            print("backends disagree", file=sys.stderr)
            sys.exit(1)
        print(f"backends agree (objective {o1})")


if __name__ == "__main__":
    main()
