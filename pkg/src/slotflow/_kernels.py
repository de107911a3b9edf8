"""Hot inner loops: successive shortest paths and the FIFO service recurrence.

Each kernel has a numba-compiled loop version and a numpy version that must
return identical results (same tie-breaking, same integer arithmetic).
"""
from __future__ import annotations

import numpy as np

from ._accel import njit, resolve_backend

INF = np.int64(2**62)


def _ssp_loop(n, s, t, head, cost, res, adj_start, adj, need):
    # Dense-selection Dijkstra on reduced costs; ties go to the lowest node
    # index and, per head node, to the first arc in adjacency order.
    inf = 2**62
    pot = np.zeros(n, np.int64)
    dist = np.empty(n, np.int64)
    parent = np.empty(n, np.int64)
    done = np.empty(n, np.bool_)
    pushed = 0
    while pushed < need:
        for v in range(n):
            dist[v] = inf
            parent[v] = -1
            done[v] = False
        dist[s] = 0
        while True:
            u = -1
            best = inf
            for v in range(n):
                if not done[v] and dist[v] < best:
                    best = dist[v]
                    u = v
            if u == -1:
                break
            done[u] = True
            if u == t:
                break
            du = dist[u] + pot[u]
            for k in range(adj_start[u], adj_start[u + 1]):
                e = adj[k]
                if res[e] > 0:
                    v = head[e]
                    nd = du + cost[e] - pot[v]
                    if nd < dist[v]:
                        dist[v] = nd
                        parent[v] = e
        if not done[t]:
            break
        dt = dist[t]
        for v in range(n):
            if dist[v] < dt:
                pot[v] += dist[v]
            else:
                pot[v] += dt
        f = need - pushed
        v = t
        while v != s:
            e = parent[v]
            if res[e] < f:
                f = res[e]
            v = head[e ^ 1]
        v = t
        while v != s:
            e = parent[v]
            res[e] -= f
            res[e ^ 1] += f
            v = head[e ^ 1]
        pushed += f
    return pushed


_ssp_jit = njit(cache=True)(_ssp_loop)


def _ssp_numpy(n, s, t, head, cost, res, adj_start, adj, need):
    pot = np.zeros(n, np.int64)
    pushed = 0
    while pushed < need:
        dist = np.full(n, INF, np.int64)
        parent = np.full(n, -1, np.int64)
        done = np.zeros(n, bool)
        dist[s] = 0
        while True:
            masked = np.where(done, INF, dist)
            u = int(np.argmin(masked))
            if masked[u] >= INF:
                break
            done[u] = True
            if u == t:
                break
            arcs = adj[adj_start[u]:adj_start[u + 1]]
            arcs = arcs[res[arcs] > 0]
            if arcs.size == 0:
                continue
            hv = head[arcs]
            nd = dist[u] + pot[u] + cost[arcs] - pot[hv]
            better = nd < dist[hv]
            if not better.any():
                continue
            arcs, hv, nd = arcs[better], hv[better], nd[better]
            if hv.size > 1:
                # keep the first arc reaching the minimum for each head
                order = np.lexsort((np.arange(hv.size), nd, hv))
                hs = hv[order]
                first = np.ones(hs.size, bool)
                first[1:] = hs[1:] != hs[:-1]
                sel = order[first]
                arcs, hv, nd = arcs[sel], hv[sel], nd[sel]
            dist[hv] = nd
            parent[hv] = arcs
        if not done[t]:
            break
        pot += np.minimum(dist, dist[t])
        path = []
        v = t
        while v != s:
            e = int(parent[v])
            path.append(e)
            v = int(head[e ^ 1])
        path = np.array(path, np.int64)
        f = int(min(need - pushed, res[path].min()))
        res[path] -= f
        res[path ^ 1] += f
        pushed += f
    return pushed


def successive_shortest_paths(n, s, t, head, cost, res, adj_start, adj, need, backend=None):
    """Push up to ``need`` units from ``s`` to ``t`` at minimum cost.

    Residual arcs come in pairs ``(2k, 2k+1)``; ``res`` is updated in place.
    All residual costs with positive capacity must be non-negative on entry.
    Returns the amount pushed.
    """
    if resolve_backend(backend) == "numba":
        return int(_ssp_jit(n, s, t, head, cost, res, adj_start, adj, np.int64(need)))
    return int(_ssp_numpy(n, s, t, head, cost, res, adj_start, adj, int(need)))


def _fifo_loop(v, cap):
    k, n = v.shape
    d = np.empty_like(v)
    for r in range(k):
        prev = 0
        for j in range(n):
            x = prev + cap[j]
            if v[r, j] < x:
                x = v[r, j]
            d[r, j] = x
            prev = x
    return d


_fifo_jit = njit(cache=True)(_fifo_loop)


def _fifo_numpy(v, cap):
    # closed form of d(t) = min(v(t), d(t-1) + C_t) with d(-1) = 0
    k_cum = np.cumsum(cap)
    slack = np.minimum.accumulate(v - k_cum, axis=-1)
    return k_cum + np.minimum(slack, 0)


def fifo_departures(v, cap, backend=None):
    """Cumulative security departures for one or many cumulative-arrival rows."""
    v = np.asarray(v, np.int64)
    cap = np.asarray(cap, np.int64)
    squeeze = v.ndim == 1
    v2 = np.atleast_2d(v)
    if resolve_backend(backend) == "numba":
        d = _fifo_jit(np.ascontiguousarray(v2), np.ascontiguousarray(cap))
    else:
        d = _fifo_numpy(v2, cap)
    return d[0] if squeeze else d
