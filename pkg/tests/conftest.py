import math
from fractions import Fraction

import numpy as np
import pytest

from slotflow.assignment import CostParams, SlotGrid, build_demand_profile
from slotflow.flow import network_from_arrays
from slotflow.schedule import reference_day_schedule


def random_network(rng, n_nodes=5, n_arcs=8, max_upper=3, feasible=True, negative=False,
                   lower=False, cap=10**6):
    """Random balanced network whose enumeration space stays within ``cap``.

    Feasible instances take supplies from a random flow inside the bounds, so
    at least that flow is admissible; otherwise supplies are random.
    """
    while True:
        tails = rng.integers(0, n_nodes, n_arcs)
        heads = (tails + rng.integers(1, n_nodes, n_arcs)) % n_nodes
        uppers = rng.integers(0, max_upper + 1, n_arcs)
        lowers = rng.integers(0, uppers + 1) if lower else np.zeros(n_arcs, np.int64)
        lowers = np.minimum(lowers, uppers)
        if math.prod(int(u - l + 1) for u, l in zip(uppers, lowers)) <= cap:
            break
    lo = -5 if negative else 0
    costs = [Fraction(int(rng.integers(lo, 10)), int(rng.integers(1, 4))) for _ in range(n_arcs)]
    if feasible:
        x = rng.integers(lowers, uppers + 1)
        b = np.zeros(n_nodes, np.int64)
        np.add.at(b, tails, x)
        np.subtract.at(b, heads, x)
    else:
        b = rng.integers(-2, 3, n_nodes)
        b[-1] -= b.sum()
    return network_from_arrays(b, tails, heads, lowers, uppers, costs)


@pytest.fixture(scope="session")
def grid():
    return SlotGrid()


@pytest.fixture(scope="session")
def params():
    return CostParams()


@pytest.fixture(scope="session")
def day_profile(grid):
    return build_demand_profile(reference_day_schedule(), grid)


# acceptance reporting: one PASS/FAIL line per criterion at the end of the run,
# with the individual checks listed under it
_criteria: dict[int, list] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, check): acceptance criterion this test checks")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    if rep.when == "call" or (rep.when == "setup" and not rep.passed):
        number, check = mark.args
        _criteria.setdefault(number, []).append((check, rep.passed))


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        checks = _criteria[number]
        ok = all(passed for _, passed in checks)
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}")
        grouped: dict[str, list[bool]] = {}
        for check, passed in checks:
            grouped.setdefault(check, []).append(passed)
        for check, results in grouped.items():
            tag = "pass" if all(results) else "FAIL"
            runs = f" [{sum(results)}/{len(results)} cases]" if len(results) > 1 else ""
            terminalreporter.write_line(f"    {tag}  {check}{runs}")
