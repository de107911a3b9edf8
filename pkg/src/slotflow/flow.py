"""Exact integral minimum-cost network flow.

The solver is successive shortest paths with node potentials over integer
costs.  Rational costs are scaled to integers by the least common multiple
of their denominators, so objectives are exact ``Fraction`` values and the
brute-force oracle can be compared for equality.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from fractions import Fraction
from collections.abc import Hashable, Iterable, Sequence
from pathlib import Path

import numpy as np

from ._kernels import successive_shortest_paths
from .errors import EnumerationLimitError, ValidationError

NodeId = Hashable

# distances and potentials must stay well inside int64
_COST_HEADROOM = 2**60


class Status(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class Node:
    id: NodeId
    supply: int = 0


@dataclass(frozen=True)
class Arc:
    tail: NodeId
    head: NodeId
    lower: int
    upper: int
    cost: Fraction = Fraction(0)

    def __post_init__(self):
        object.__setattr__(self, "cost", Fraction(self.cost))


@dataclass(frozen=True)
class FlowNetwork:
    """Directed graph with integer supplies, integer arc bounds, rational costs.

    Positive supply is a source, negative a sink.  Construction does not
    validate; call :meth:`validate` (the solver does it for you).
    """

    nodes: tuple[Node, ...]
    arcs: tuple[Arc, ...]

    def __init__(self, nodes: Iterable[Node], arcs: Iterable[Arc]):
        object.__setattr__(self, "nodes", tuple(nodes))
        object.__setattr__(self, "arcs", tuple(arcs))

    @property
    def node_index(self) -> dict[NodeId, int]:
        return {node.id: i for i, node in enumerate(self.nodes)}

    def validate(self) -> None:
        index = {}
        for i, node in enumerate(self.nodes):
            if node.id in index:
                raise ValidationError(f"duplicate node id {node.id!r}")
            if int(node.supply) != node.supply:
                raise ValidationError(f"node {node.id!r} has non-integer supply {node.supply!r}")
            index[node.id] = i
        total = sum(int(node.supply) for node in self.nodes)
        if total != 0:
            raise ValidationError(f"unbalanced network: supplies sum to {total}")
        for k, arc in enumerate(self.arcs):
            if arc.tail not in index or arc.head not in index:
                raise ValidationError(f"arc {k} references unknown node ({arc.tail!r} -> {arc.head!r})")
            if int(arc.lower) != arc.lower or int(arc.upper) != arc.upper:
                raise ValidationError(f"arc {k} has non-integer bounds")
            if not 0 <= arc.lower <= arc.upper:
                raise ValidationError(f"arc {k} violates 0 <= lower <= upper ({arc.lower}, {arc.upper})")

    def cost_scale(self) -> int:
        """Least common denominator of all arc costs."""
        scale = 1
        for arc in self.arcs:
            scale = math.lcm(scale, arc.cost.denominator)
        return scale

    def scaled_costs(self) -> tuple[int, list[int]]:
        scale = self.cost_scale()
        return scale, [int(arc.cost * scale) for arc in self.arcs]

    def incidence(self) -> np.ndarray:
        """Node-arc incidence matrix: +1 at the tail, -1 at the head."""
        index = self.node_index
        a = np.zeros((len(self.nodes), len(self.arcs)), np.int64)
        for k, arc in enumerate(self.arcs):
            a[index[arc.tail], k] += 1
            a[index[arc.head], k] -= 1
        return a

    def supplies(self) -> np.ndarray:
        return np.array([int(node.supply) for node in self.nodes], np.int64)


@dataclass(frozen=True)
class FlowSolution:
    status: Status
    flows: tuple[int, ...] = ()
    objective: Fraction | None = None
    deficit: int = 0

    @property
    def optimal(self) -> bool:
        return self.status is Status.OPTIMAL


def solve_min_cost_flow(network: FlowNetwork, backend: str | None = None) -> FlowSolution:
    """Minimum-cost integral feasible flow, or ``Infeasible`` with the deficit.

    Arcs with negative cost start saturated so every residual arc has a
    non-negative cost, which lets the potentials start at zero.  A super
    source and super sink attach to the (adjusted) supply and demand nodes.
    """
    network.validate()
    n = len(network.nodes)
    m = len(network.arcs)
    index = network.node_index
    scale, costs = network.scaled_costs()
    max_cost = max((abs(c) for c in costs), default=0)
    if max_cost * (n + 2) * 4 >= _COST_HEADROOM:
        raise ValidationError("cost range too wide for 64-bit path arithmetic")

    supply = [int(node.supply) for node in network.nodes]
    base = [0] * m
    tails = [0] * m
    heads = [0] * m
    fwd = [0] * m
    rev = [0] * m
    for k, arc in enumerate(network.arcs):
        u, v = index[arc.tail], index[arc.head]
        tails[k], heads[k] = u, v
        lo, hi = int(arc.lower), int(arc.upper)
        start = hi if costs[k] < 0 else lo
        base[k] = start
        fwd[k] = hi - start
        rev[k] = start - lo
        supply[u] -= start
        supply[v] += start

    s, t = n, n + 1
    extra = [(s, v, b) if b > 0 else (v, t, -b) for v, b in enumerate(supply) if b != 0]
    extra_tail = [e[0] for e in extra]
    extra_head = [e[1] for e in extra]
    extra_cap = [e[2] for e in extra]
    need = sum(b for b in supply if b > 0)

    total = m + len(extra_cap)
    head = np.empty(2 * total, np.int64)
    cost = np.empty(2 * total, np.int64)
    res = np.empty(2 * total, np.int64)
    all_tail = np.array(tails + extra_tail, np.int64)
    all_head = np.array(heads + extra_head, np.int64)
    head[0::2] = all_head
    head[1::2] = all_tail
    c = np.array(costs + [0] * len(extra_cap), np.int64)
    cost[0::2] = c
    cost[1::2] = -c
    res[0::2] = np.array(fwd + extra_cap, np.int64)
    res[1::2] = np.array(rev + [0] * len(extra_cap), np.int64)

    residual_tail = head.reshape(-1, 2)[:, ::-1].ravel()
    adj = np.argsort(residual_tail, kind="stable").astype(np.int64)
    adj_start = np.searchsorted(residual_tail[adj], np.arange(n + 3)).astype(np.int64)

    fwd0 = res[0::2][:m].copy()
    pushed = successive_shortest_paths(n + 2, s, t, head, cost, res, adj_start, adj, need, backend)
    if pushed < need:
        return FlowSolution(Status.INFEASIBLE, deficit=need - pushed)

    flows = [int(b) + int(f0) - int(f1) for b, f0, f1 in zip(base, fwd0, res[0::2][:m])]
    objective = Fraction(sum(ck * xk for ck, xk in zip(costs, flows)), scale)
    return FlowSolution(Status.OPTIMAL, tuple(flows), objective)


@dataclass(frozen=True)
class FlowReport:
    conservation_violations: tuple[tuple[NodeId, int], ...] = field(default_factory=tuple)
    bound_violations: tuple[int, ...] = field(default_factory=tuple)
    non_integral: tuple[int, ...] = field(default_factory=tuple)
    objective_matches: bool = True

    @property
    def conservation_ok(self) -> bool:
        return not self.conservation_violations

    @property
    def bounds_ok(self) -> bool:
        return not self.bound_violations

    @property
    def ok(self) -> bool:
        return (self.conservation_ok and self.bounds_ok and not self.non_integral
                and self.objective_matches)


def validate_flow(network: FlowNetwork, solution: FlowSolution) -> FlowReport:
    """Check conservation, bounds, integrality and the objective of a solution.

    Conservation violations are reported as ``(node id, outflow - inflow - b)``.
    """
    flows = list(solution.flows)
    if len(flows) != len(network.arcs):
        raise ValidationError(f"solution has {len(flows)} flows for {len(network.arcs)} arcs")
    index = network.node_index
    net = [0] * len(network.nodes)
    bounds, frac = [], []
    for k, (arc, x) in enumerate(zip(network.arcs, flows)):
        if x != int(x):
            frac.append(k)
        if not arc.lower <= x <= arc.upper:
            bounds.append(k)
        net[index[arc.tail]] += x
        net[index[arc.head]] -= x
    cons = tuple((node.id, net[i] - node.supply)
                 for i, node in enumerate(network.nodes) if net[i] != node.supply)
    objective = sum((arc.cost * x for arc, x in zip(network.arcs, flows)), Fraction(0))
    matches = solution.objective is None or objective == solution.objective
    return FlowReport(cons, tuple(bounds), tuple(frac), matches)


def brute_force_min_cost(network: FlowNetwork, cap: int = 10**6, chunk: int = 1 << 16) -> FlowSolution:
    """Exhaustive enumeration of every integral flow vector within the bounds.

    Ties resolve to the first vector in mixed-radix order (arc 0 most
    significant).  Raises :class:`EnumerationLimitError` when the search space
    exceeds ``cap``.
    """
    network.validate()
    m = len(network.arcs)
    lows = np.array([a.lower for a in network.arcs], np.int64)
    radix = np.array([a.upper - a.lower + 1 for a in network.arcs], np.int64)
    size = math.prod(int(r) for r in radix)
    if size > cap:
        raise EnumerationLimitError(f"{size} flow vectors exceed the enumeration cap {cap}")
    if m == 0:
        if np.any(network.supplies() != 0):
            return FlowSolution(Status.INFEASIBLE, deficit=int(network.supplies().clip(0).sum()))
        return FlowSolution(Status.OPTIMAL, (), Fraction(0))

    scale, costs = network.scaled_costs()
    c = np.array(costs, np.int64)
    a = network.incidence()
    b = network.supplies()
    stride = np.ones(m, np.int64)
    for k in range(m - 2, -1, -1):
        stride[k] = stride[k + 1] * radix[k + 1]

    best_cost, best_x = None, None
    for lo in range(0, size, chunk):
        idx = np.arange(lo, min(size, lo + chunk), dtype=np.int64)
        x = lows + (idx[:, None] // stride) % radix
        ok = np.all(x @ a.T == b, axis=1)
        if not ok.any():
            continue
        x = x[ok]
        z = x @ c
        j = int(np.argmin(z))
        if best_cost is None or z[j] < best_cost:
            best_cost, best_x = int(z[j]), x[j]
    if best_x is None:
        return FlowSolution(Status.INFEASIBLE)
    return FlowSolution(Status.OPTIMAL, tuple(int(v) for v in best_x), Fraction(best_cost, scale))


def dump_arc_list(network: FlowNetwork, path: str | Path) -> None:
    """Write a plain-text fixture.

    ``node <id> <supply>`` lines first, then one arc per line as
    ``<tail> <head> <lower> <upper> <cost numerator> <cost denominator>``.
    Node ids are written with ``str`` and must not contain whitespace.
    """
    lines = ["# slotflow arc-list v1"]
    for node in network.nodes:
        lines.append(f"node {node.id} {node.supply}")
    for arc in network.arcs:
        lines.append(f"{arc.tail} {arc.head} {arc.lower} {arc.upper} "
                     f"{arc.cost.numerator} {arc.cost.denominator}")
    Path(path).write_text("\n".join(lines) + "\n")


def load_arc_list(path: str | Path) -> FlowNetwork:
    nodes, arcs = [], []
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        try:
            if parts[0] == "node" and len(parts) == 3:
                nodes.append(Node(parts[1], int(parts[2])))
            elif len(parts) == 6:
                tail, head, lo, hi, num, den = parts
                arcs.append(Arc(tail, head, int(lo), int(hi), Fraction(int(num), int(den))))
            else:
                raise ValueError("expected 'node <id> <supply>' or 6 arc fields")
        except (ValueError, ZeroDivisionError) as exc:
            raise ValidationError(f"{path}:{lineno}: {exc}") from None
    return FlowNetwork(nodes, arcs)


def scaled(network: FlowNetwork, factor: int) -> FlowNetwork:
    """Copy of ``network`` with every arc cost multiplied by ``factor``."""
    return FlowNetwork(network.nodes,
                       (Arc(a.tail, a.head, a.lower, a.upper, a.cost * factor) for a in network.arcs))


def network_from_arrays(supplies: Sequence[int], tails: Sequence[int], heads: Sequence[int],
                        lowers: Sequence[int], uppers: Sequence[int],
                        costs: Sequence[Fraction | int]) -> FlowNetwork:
    """Build a network over integer node ids ``0..len(supplies)-1``."""
    nodes = [Node(i, int(b)) for i, b in enumerate(supplies)]
    arcs = [Arc(int(t), int(h), int(lo), int(hi), Fraction(c))
            for t, h, lo, hi, c in zip(tails, heads, lowers, uppers, costs)]
    return FlowNetwork(nodes, arcs)
