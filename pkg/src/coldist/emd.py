"""Exact Earth Mover's Distance via the transportation simplex.

Sized for small dense instances: 11x11 term histograms and compass
signatures of up to a hundred or so clusters. The solver works on a copy of the problem
whose supplies are perturbed by ``EPS_PERTURB`` (and the last demand by
``n * EPS_PERTURB``) so that every basis visited is non-degenerate; the final
basis is then re-solved against the unperturbed marginals.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._jit import njit

FEAS_TOL = 1e-9
OPT_TOL = 1e-9
MASS_TOL = 1e-6
EPS_PERTURB = 1e-12


@dataclass(frozen=True)
class TransportProblem:
    supply: np.ndarray
    demand: np.ndarray
    cost: np.ndarray

    def __post_init__(self):
        supply = np.asarray(self.supply, dtype=np.float64)
        demand = np.asarray(self.demand, dtype=np.float64)
        cost = np.asarray(self.cost, dtype=np.float64)
        if supply.ndim != 1 or demand.ndim != 1 or cost.shape != (supply.size, demand.size):
            raise ValueError(
                f"shape mismatch: supply {supply.shape}, demand {demand.shape}, cost {cost.shape}")
        if supply.size == 0 or demand.size == 0:
            raise ValueError("empty transport problem")
        if np.any(supply < 0) or np.any(demand < 0):
            raise ValueError("supplies and demands must be non-negative")
        if abs(supply.sum() - 1.0) > FEAS_TOL or abs(demand.sum() - 1.0) > FEAS_TOL:
            raise ValueError(
                f"unbalanced problem: supply sums to {supply.sum():.12g}, "
                f"demand sums to {demand.sum():.12g} (both must be 1)")
        if not np.all(np.isfinite(cost)) or np.any(cost < 0):
            raise ValueError("costs must be finite and non-negative")
        object.__setattr__(self, "supply", supply)
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "cost", cost)


@dataclass(frozen=True)
class TransportPlan:
    """Optimal flows in sparse form plus the dual potentials certifying them."""

    rows: np.ndarray
    cols: np.ndarray
    amounts: np.ndarray
    objective: float
    shape: tuple
    u: np.ndarray = field(repr=False)
    v: np.ndarray = field(repr=False)

    @property
    def flows(self):
        return [(int(i), int(j), float(f)) for i, j, f in zip(self.rows, self.cols, self.amounts)]

    def dense(self):
        out = np.zeros(self.shape)
        out[self.rows, self.cols] = self.amounts
        return out

    def reduced_costs(self, cost):
        return np.asarray(cost) - self.u[:, None] - self.v[None, :]


# ---------------------------------------------------------------------------
# kernels
# ---------------------------------------------------------------------------

@njit
def _least_cost_start(s, d, cost, flow, basic, bi, bj):
    """Matrix-minimum initial basis: n + m - 1 cells forming a spanning tree."""
    n = s.shape[0]
    m = d.shape[0]
    rs = s.copy()
    rd = d.copy()
    row_on = np.ones(n, dtype=np.bool_)
    col_on = np.ones(m, dtype=np.bool_)
    rows_left = n
    cols_left = m
    k = 0
    for idx in np.argsort(cost.ravel(), kind="mergesort"):
        i = idx // m
        j = idx % m
        if not (row_on[i] and col_on[j]):
            continue
        x = min(rs[i], rd[j])
        flow[i, j] = x
        basic[i, j] = True
        bi[k] = i
        bj[k] = j
        k += 1
        rs[i] -= x
        rd[j] -= x
        if k == n + m - 1:
            break
        # cross out exactly one line so the cells stay a tree
        if cols_left == 1 or (rows_left > 1 and rs[i] <= rd[j]):
            row_on[i] = False
            rows_left -= 1
        else:
            col_on[j] = False
            cols_left -= 1


@njit
def _adjacency(n, m, bi, bj):
    """CSR adjacency of the basis tree; nodes are rows 0..n-1 then columns."""
    nodes = n + m
    start = np.zeros(nodes + 1, dtype=np.int64)
    for k in range(bi.shape[0]):
        start[bi[k] + 1] += 1
        start[n + bj[k] + 1] += 1
    for v in range(nodes):
        start[v + 1] += start[v]
    fill = start[:-1].copy()
    nbr = np.empty(2 * bi.shape[0], dtype=np.int64)
    edge = np.empty(2 * bi.shape[0], dtype=np.int64)
    for k in range(bi.shape[0]):
        a = bi[k]
        b = n + bj[k]
        nbr[fill[a]] = b
        edge[fill[a]] = k
        fill[a] += 1
        nbr[fill[b]] = a
        edge[fill[b]] = k
        fill[b] += 1
    return start, nbr, edge


@njit
def _potentials(n, cost, start, nbr, u, v):
    # u_i + v_j = c_ij on the basis tree, rooted at u_0 = 0.
    nodes = start.shape[0] - 1
    seen = np.zeros(nodes, dtype=np.bool_)
    queue = np.empty(nodes, dtype=np.int64)
    u[0] = 0.0
    seen[0] = True
    queue[0] = 0
    head = 0
    tail = 1
    while head < tail:
        a = queue[head]
        head += 1
        for t in range(start[a], start[a + 1]):
            b = nbr[t]
            if seen[b]:
                continue
            if a < n:
                v[b - n] = cost[a, b - n] - u[a]
            else:
                u[b] = cost[b, a - n] - v[a - n]
            seen[b] = True
            queue[tail] = b
            tail += 1


@njit
def _tree_path(start, nbr, edge, source, goal):
    """Basis edges along the tree path source -> goal, in order."""
    nodes = start.shape[0] - 1
    parent = np.full(nodes, -1, dtype=np.int64)
    via = np.full(nodes, -1, dtype=np.int64)
    parent[source] = source
    queue = np.empty(nodes, dtype=np.int64)
    queue[0] = source
    head = 0
    tail = 1
    while head < tail and parent[goal] < 0:
        a = queue[head]
        head += 1
        for t in range(start[a], start[a + 1]):
            b = nbr[t]
            if parent[b] < 0:
                parent[b] = a
                via[b] = edge[t]
                queue[tail] = b
                tail += 1
    length = 0
    a = goal
    while a != source:
        a = parent[a]
        length += 1
    path = np.empty(length, dtype=np.int64)
    a = goal
    for t in range(length - 1, -1, -1):
        path[t] = via[a]
        a = parent[a]
    return path


@njit
def _resolve_flows(supply, demand, basic, flow):
    # Leaf-peel the basis tree against the given marginals.
    n, m = basic.shape
    rem = np.empty(n + m)
    rem[:n] = supply
    rem[n:] = demand
    active = basic.copy()
    deg = np.zeros(n + m, dtype=np.int64)
    for i in range(n):
        for j in range(m):
            flow[i, j] = 0.0
            if active[i, j]:
                deg[i] += 1
                deg[n + j] += 1
    for _ in range(n + m - 1):
        leaf = -1
        for k in range(n + m):
            if deg[k] == 1:
                leaf = k
                break
        if leaf < 0:
            break
        if leaf < n:
            i = leaf
            j = 0
            while not active[i, j]:
                j += 1
        else:
            j = leaf - n
            i = 0
            while not active[i, j]:
                i += 1
        f = rem[leaf]
        flow[i, j] = f
        rem[i] -= f
        rem[n + j] -= f
        active[i, j] = False
        deg[i] -= 1
        deg[n + j] -= 1


@njit
def transport_simplex(supply, demand, cost):
    """Solve a balanced transportation problem.

    Returns ``(flow, basic, u, v, iterations)``. The start is the
    matrix-minimum basis. Entering cells are priced by the most negative
    reduced cost; after a degenerate pivot the rule switches to Bland's
    (first eligible cell, smallest-index leaving cell) for the rest of the
    solve.
    """
    n, m = cost.shape
    cmax = 0.0
    for i in range(n):
        for j in range(m):
            if cost[i, j] > cmax:
                cmax = cost[i, j]
    tol = 1e-11 * max(1.0, cmax)

    s = supply + EPS_PERTURB
    d = demand.copy()
    d[m - 1] += n * EPS_PERTURB
    flow = np.zeros((n, m))
    basic = np.zeros((n, m), dtype=np.bool_)
    bi = np.empty(n + m - 1, dtype=np.int64)
    bj = np.empty(n + m - 1, dtype=np.int64)
    _least_cost_start(s, d, cost, flow, basic, bi, bj)

    u = np.zeros(n)
    v = np.zeros(m)
    bland = False
    max_iter = 50 * n * m + 1000
    it = 0
    while True:
        start, nbr, edge = _adjacency(n, m, bi, bj)
        _potentials(n, cost, start, nbr, u, v)
        ei = -1
        ej = -1
        best = -tol
        for i in range(n):
            for j in range(m):
                if basic[i, j]:
                    continue
                r = cost[i, j] - u[i] - v[j]
                if r < best:
                    best = r
                    ei = i
                    ej = j
                    if bland:
                        break
            if bland and ei >= 0:
                break
        if ei < 0:
            break
        it += 1
        if it > max_iter:
            raise RuntimeError("transportation simplex failed to converge")

        path = _tree_path(start, nbr, edge, ei, n + ej)
        # Edges along the cycle alternate -, +, -, ... starting at row ei.
        theta = np.inf
        leave = -1
        for t in range(0, path.shape[0], 2):
            k = path[t]
            f = flow[bi[k], bj[k]]
            if f < theta or (f == theta and bi[k] * m + bj[k] < bi[leave] * m + bj[leave]):
                theta = f
                leave = k
        for t in range(path.shape[0]):
            k = path[t]
            if t % 2 == 0:
                flow[bi[k], bj[k]] -= theta
            else:
                flow[bi[k], bj[k]] += theta
        li = bi[leave]
        lj = bj[leave]
        basic[li, lj] = False
        flow[li, lj] = 0.0
        flow[ei, ej] = theta
        basic[ei, ej] = True
        bi[leave] = ei
        bj[leave] = ej
        if theta <= EPS_PERTURB * 1e-3:
            bland = True

    _resolve_flows(supply, demand, basic, flow)
    for i in range(n):
        for j in range(m):
            if flow[i, j] < 0.0:
                flow[i, j] = 0.0
    return flow, basic, u, v, it


@njit
def emd_kernel(p, q, cost):
    """EMD value of two mass-1 histograms, dropping empty bins first."""
    rows = np.empty(p.shape[0], dtype=np.int64)
    cols = np.empty(q.shape[0], dtype=np.int64)
    nr = 0
    nc = 0
    for i in range(p.shape[0]):
        if p[i] > 0.0:
            rows[nr] = i
            nr += 1
    for j in range(q.shape[0]):
        if q[j] > 0.0:
            cols[nc] = j
            nc += 1
    if nr == 1 or nc == 1:
        total = 0.0
        for a in range(nr):
            for b in range(nc):
                total += p[rows[a]] * q[cols[b]] * cost[rows[a], cols[b]]
        return total
    sub = np.empty((nr, nc))
    ps = np.empty(nr)
    qs = np.empty(nc)
    for a in range(nr):
        ps[a] = p[rows[a]]
        for b in range(nc):
            sub[a, b] = cost[rows[a], cols[b]]
    for b in range(nc):
        qs[b] = q[cols[b]]
    flow, basic, u, v, it = transport_simplex(ps, qs, sub)
    total = 0.0
    for a in range(nr):
        for b in range(nc):
            total += flow[a, b] * sub[a, b]
    return total


# ---------------------------------------------------------------------------
# public API
# ---------------------------------------------------------------------------

def solve_transport(prob: TransportProblem) -> TransportPlan:
    """Optimal basic feasible plan for a balanced transportation problem."""
    flow, basic, u, v, _ = transport_simplex(prob.supply, prob.demand, np.ascontiguousarray(prob.cost))
    rows, cols = np.nonzero(flow > 0.0)
    amounts = flow[rows, cols]
    objective = float(np.dot(amounts, prob.cost[rows, cols]))
    return TransportPlan(rows, cols, amounts, objective, flow.shape, u, v)


def _normalized(x, name):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError(f"{name} must be a 1-D vector")
    if np.any(x < 0):
        raise ValueError(f"{name} has negative entries")
    total = x.sum()
    if abs(total - 1.0) > MASS_TOL:
        raise ValueError(f"{name} has mass {total:.9g}, expected 1 within {MASS_TOL:g}")
    return x / total


def emd(p, q, D) -> float:
    """Earth Mover's Distance between probability vectors ``p`` and ``q``.

    ``D`` is a ground-distance matrix (or anything with a ``.d`` array, such as
    :class:`coldist.naming.GroundMatrix`) of shape ``(len(p), len(q))``.
    """
    cost = np.asarray(getattr(D, "d", D), dtype=np.float64)
    p = _normalized(p, "p")
    q = _normalized(q, "q")
    if cost.shape != (p.size, q.size):
        raise ValueError(f"dimension mismatch: p has {p.size} bins, q has {q.size}, D is {cost.shape}")
    if not np.all(np.isfinite(cost)) or np.any(cost < 0):
        raise ValueError("ground distances must be finite and non-negative")
    return float(emd_kernel(p, q, np.ascontiguousarray(cost)))
