import numpy as np
import pytest
from scipy.optimize import linprog

from slotflow.errors import ValidationError
from slotflow.lp import LinearProgram, LPStatus, solve_lp


def test_single_lower_bound():
    res = solve_lp(LinearProgram([1.0], a_ub=[[-1.0]], b_ub=[-3.0]))
    assert res.status is LPStatus.OPTIMAL
    assert res.x[0] == pytest.approx(3.0, abs=1e-12)


def test_redundant_degenerate_rows_terminate():
    a_eq = [[1, 1, 1], [2, 2, 2], [1, 1, 1]]
    a_ub = [[1, -1, 0], [1, -1, 0], [0, 1, -1], [-1, 0, 1]]
    res = solve_lp(LinearProgram([1, 2, 3], a_eq, [3, 6, 3], a_ub, [0, 0, 0, 0]))
    assert res.optimal
    assert res.objective == pytest.approx(6.0)
    assert res.residual <= 1e-9


def test_infeasible_and_unbounded():
    assert solve_lp(LinearProgram([1, 1], a_eq=[[1, 1]], b_eq=[-1])).status is LPStatus.INFEASIBLE
    assert solve_lp(LinearProgram([-1, 0], a_ub=[[0, 1]], b_ub=[1])).status is LPStatus.UNBOUNDED


def test_upper_bounds():
    res = solve_lp(LinearProgram([-1, -2], a_ub=[[1, 1]], b_ub=[3], upper=[2, 1]))
    assert res.objective == pytest.approx(-4.0)


def test_malformed():
    with pytest.raises(ValidationError):
        LinearProgram([1, 2], a_eq=[[1, 1, 1]], b_eq=[1])
    with pytest.raises(ValidationError):
        LinearProgram([1], upper=[-1])


def test_iteration_limit_is_a_failure_not_an_answer():
    rng = np.random.default_rng(0)
    a = rng.random((6, 10))
    res = solve_lp(LinearProgram(-rng.random(10), a_ub=a, b_ub=np.ones(6)), max_iter=1)
    assert res.status is LPStatus.FAILED


@pytest.mark.parametrize("seed", range(60))
def test_matches_highs(seed):
    rng = np.random.default_rng(seed)
    n, m_eq, m_ub = rng.integers(2, 9), rng.integers(0, 3), rng.integers(1, 6)
    x0 = rng.integers(0, 4, n).astype(float)  # keeps the instance feasible
    a_eq = rng.integers(-2, 3, (m_eq, n)).astype(float)
    a_ub = rng.integers(-3, 4, (m_ub, n)).astype(float)
    b_eq, b_ub = a_eq @ x0, a_ub @ x0 + rng.integers(0, 3, m_ub)
    c = rng.integers(-3, 6, n).astype(float)
    upper = np.where(rng.random(n) < 0.5, 5.0, np.inf)
    ours = solve_lp(LinearProgram(c, a_eq if m_eq else None, b_eq if m_eq else None, a_ub, b_ub, upper))
    ref = linprog(c, A_ub=a_ub, b_ub=b_ub, A_eq=a_eq if m_eq else None, b_eq=b_eq if m_eq else None,
                  bounds=list(zip([0] * n, [None if np.isinf(u) else u for u in upper])), method="highs")
    if ref.status == 3:
        assert ours.status is LPStatus.UNBOUNDED
    else:
        assert ours.optimal
        assert ours.objective == pytest.approx(ref.fun, abs=1e-7)
        assert ours.residual <= 1e-9 * max(1.0, np.abs(np.concatenate([b_eq, b_ub, [0]])).max())


def test_deterministic():
    rng = np.random.default_rng(1)
    a = rng.random((8, 12))
    lp = LinearProgram(-rng.random(12), a_ub=a, b_ub=np.ones(8))
    assert np.array_equal(solve_lp(lp).x, solve_lp(lp).x)
