"""Two-phase revised simplex for small and medium sparse LPs.

    minimize    c @ x
    subject to  A_eq @ x == b_eq
                A_ub @ x <= b_ub
                0 <= x <= upper          (upper may be inf)

The basis inverse is kept explicitly and updated by rank-one eta steps,
with a full refactorization every ``refactor_every`` pivots.  Pricing is
Dantzig's rule; after a run of degenerate pivots it falls back to Bland's
rule until the objective moves again, which rules out cycling.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .errors import ValidationError


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    FAILED = "failed"


@dataclass
class LinearProgram:
    c: np.ndarray
    a_eq: sp.csr_matrix | None = None
    b_eq: np.ndarray | None = None
    a_ub: sp.csr_matrix | None = None
    b_ub: np.ndarray | None = None
    upper: np.ndarray | None = None

    def __post_init__(self):
        self.c = np.asarray(self.c, float)
        n = self.c.size
        self.a_eq, self.b_eq = _rows(self.a_eq, self.b_eq, n, "equality")
        self.a_ub, self.b_ub = _rows(self.a_ub, self.b_ub, n, "inequality")
        if self.upper is None:
            self.upper = np.full(n, np.inf)
        self.upper = np.asarray(self.upper, float)
        if self.upper.shape != (n,):
            raise ValidationError("upper bounds must have one entry per variable")
        if np.any(self.upper < 0) or np.any(np.isnan(self.upper)):
            raise ValidationError("upper bounds must be >= 0 (lower bounds are 0)")
        if not (np.all(np.isfinite(self.c)) and np.all(np.isfinite(self.b_eq))
                and np.all(np.isfinite(self.b_ub))):
            raise ValidationError("objective and right-hand sides must be finite")

    @property
    def num_vars(self) -> int:
        return self.c.size

    def residuals(self, x: np.ndarray) -> float:
        """Largest violation of any constraint or bound."""
        r = [0.0]
        if self.b_eq.size:
            r.append(float(np.abs(self.a_eq @ x - self.b_eq).max()))
        if self.b_ub.size:
            r.append(float(np.maximum(self.a_ub @ x - self.b_ub, 0).max()))
        r.append(float(np.maximum(-x, 0).max(initial=0)))
        r.append(float(np.maximum(x - self.upper, 0).max(initial=0)))
        return max(r)


def _rows(a, b, n, what):
    if a is None:
        return sp.csr_matrix((0, n)), np.zeros(0)
    a = sp.csr_matrix(a, dtype=float)
    b = np.asarray(b, float)
    if a.shape[1] != n or b.shape != (a.shape[0],):
        raise ValidationError(f"{what} block has inconsistent dimensions")
    return a, b


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    x: np.ndarray | None
    objective: float | None
    iterations: int
    residual: float | None = None
    message: str = ""

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


class _Tableau:
    def __init__(self, a: sp.csc_matrix, b: np.ndarray, basis: np.ndarray, tol: float, refactor_every: int):
        self.a = a
        self.at = a.T.tocsr()
        self.b = b
        self.basis = basis
        self.tol = tol
        self.refactor_every = refactor_every
        self.iterations = 0
        self.refactor()

    def refactor(self):
        bmat = self.a[:, self.basis].toarray()
        self.binv = np.linalg.inv(bmat)
        self.xb = self.binv @ self.b
        self._since = 0

    def column(self, j):
        lo, hi = self.a.indptr[j], self.a.indptr[j + 1]
        return self.binv[:, self.a.indices[lo:hi]] @ self.a.data[lo:hi]

    def pivot(self, r, q, col):
        theta = self.xb[r] / col[r]
        self.xb -= theta * col
        self.xb[r] = theta
        pr = self.binv[r] / col[r]
        self.binv -= np.outer(col, pr)
        self.binv[r] = pr
        self.basis[r] = q
        self.iterations += 1
        self._since += 1
        if self._since >= self.refactor_every:
            self.refactor()

    def run(self, cost, allowed, max_iter, degenerate_limit=50):
        """Optimize ``cost`` over the current basis; returns a status string."""
        d_tol = self.tol * max(1.0, float(np.abs(cost).max(initial=0)))
        degenerate = 0
        while True:
            if self.iterations >= max_iter:
                return "iterations"
            y = cost[self.basis] @ self.binv
            d = cost - self.at @ y
            d[self.basis] = 0.0
            d[~allowed] = 0.0
            cand = np.flatnonzero(d < -d_tol)
            if cand.size == 0:
                return "optimal"
            q = int(cand[0]) if degenerate >= degenerate_limit else int(cand[np.argmin(d[cand])])
            col = self.column(q)
            pos = np.flatnonzero(col > self.tol)
            if pos.size == 0:
                return "unbounded"
            ratios = np.maximum(self.xb[pos], 0.0) / col[pos]
            best = ratios.min()
            ties = pos[ratios <= best + self.tol]
            r = int(ties[np.argmin(self.basis[ties])])
            degenerate = degenerate + 1 if best <= self.tol else 0
            self.pivot(r, q, col)


def solve_lp(lp: LinearProgram, tol: float = 1e-9, max_iter: int = 200_000,
             refactor_every: int = 64) -> LPResult:
    """Solve ``lp`` to an optimal basic feasible solution.

    Returns ``FAILED`` rather than a wrong answer when the iteration limit is
    hit or the final residual exceeds ``tol`` after refactorization.
    """
    n = lp.num_vars
    finite = np.flatnonzero(np.isfinite(lp.upper))
    bound_rows = sp.csr_matrix((np.ones(finite.size), (np.arange(finite.size), finite)),
                               shape=(finite.size, n))
    a_ub = sp.vstack([lp.a_ub, bound_rows], format="csr")
    b_ub = np.concatenate([lp.b_ub, lp.upper[finite]])
    m_eq, m_ub = lp.b_eq.size, b_ub.size
    m = m_eq + m_ub

    a = sp.vstack([lp.a_eq, a_ub], format="csr")
    b = np.concatenate([lp.b_eq, b_ub])
    slack_sign = np.concatenate([np.zeros(m_eq), np.ones(m_ub)])
    flip = b < 0
    sign = np.where(flip, -1.0, 1.0)
    a = sp.diags(sign) @ a
    b = b * sign
    slack_sign = slack_sign * sign
    slack_rows = np.flatnonzero(slack_sign != 0)
    slacks = sp.csr_matrix((slack_sign[slack_rows], (slack_rows, np.arange(slack_rows.size))),
                           shape=(m, slack_rows.size))
    need_art = np.flatnonzero(slack_sign != 1)
    arts = sp.csr_matrix((np.ones(need_art.size), (need_art, np.arange(need_art.size))),
                         shape=(m, need_art.size))
    full = sp.hstack([a, slacks, arts], format="csc")
    n_slack = slack_rows.size
    n_total = full.shape[1]
    art_start = n + n_slack

    basis = np.empty(m, np.int64)
    slack_col = {row: n + k for k, row in enumerate(slack_rows)}
    art_col = {row: art_start + k for k, row in enumerate(need_art)}
    for row in range(m):
        basis[row] = art_col[row] if row in art_col else slack_col[row]

    if m == 0:
        if np.any(lp.c < 0):
            return LPResult(LPStatus.UNBOUNDED, None, None, 0)
        x = np.zeros(n)
        return LPResult(LPStatus.OPTIMAL, x, 0.0, 0, 0.0)

    tab = _Tableau(full, b, basis, tol, refactor_every)
    allowed = np.ones(n_total, bool)
    scale = max(1.0, float(np.abs(b).max(initial=0)))

    if need_art.size:
        cost1 = np.zeros(n_total)
        cost1[art_start:] = 1.0
        state = tab.run(cost1, allowed, max_iter)
        if state == "iterations":
            return LPResult(LPStatus.FAILED, None, None, tab.iterations, message="phase 1 iteration limit")
        tab.refactor()
        infeas = float(np.sum(tab.xb[tab.basis >= art_start]))
        if infeas > tol * scale:
            return LPResult(LPStatus.INFEASIBLE, None, None, tab.iterations,
                            message=f"phase 1 optimum {infeas:.3g} > 0")
        _drive_out_artificials(tab, art_start, tol)
        allowed[art_start:] = False

    cost2 = np.zeros(n_total)
    cost2[:n] = lp.c
    state = tab.run(cost2, allowed, max_iter)
    if state == "iterations":
        return LPResult(LPStatus.FAILED, None, None, tab.iterations, message="phase 2 iteration limit")
    if state == "unbounded":
        return LPResult(LPStatus.UNBOUNDED, None, None, tab.iterations)

    tab.refactor()
    xfull = np.zeros(n_total)
    xfull[tab.basis] = np.linalg.solve(full[:, tab.basis].toarray(), b)
    xfull[np.abs(xfull) <= tol * scale] = 0.0
    if np.any(xfull < 0):
        return LPResult(LPStatus.FAILED, None, None, tab.iterations,
                        message=f"negative basic value {xfull.min():.3g}")
    x = xfull[:n]
    residual = lp.residuals(x)
    if residual > tol * scale:
        return LPResult(LPStatus.FAILED, x, float(lp.c @ x), tab.iterations, residual,
                        message=f"constraint residual {residual:.3g} above tolerance")
    return LPResult(LPStatus.OPTIMAL, x, float(lp.c @ x), tab.iterations, residual)


def _drive_out_artificials(tab: _Tableau, art_start: int, tol: float) -> None:
    # Basic artificials sitting at zero are pivoted out where some real column
    # has a nonzero entry in their row; what remains marks redundant rows.
    for r in np.flatnonzero(tab.basis >= art_start):
        row = tab.at @ tab.binv[r]
        row[tab.basis] = 0.0
        row[art_start:] = 0.0
        nz = np.flatnonzero(np.abs(row) > tol)
        if nz.size == 0:
            continue
        q = int(nz[0])
        tab.pivot(r, q, tab.column(q))
