"""Exact two-marginal discrete OT.

The workhorse is a transportation simplex on a spanning-tree basis
(north-west corner start, Dantzig pricing with a Bland fallback on
degenerate stalls). Dual potentials come straight from the basis tree.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ._lp import highs_ot_sparse, solve_lp, transport_constraints
from .errors import SolverError, ValidationError
from .measures import Coupling, CostSpec, DiscreteMeasure, Potentials

SIZE_CAP = 10 ** 6
OPT_TOL = 1e-12       # pricing tolerance, relative to max |C|
DEGEN_TOL = 1e-9      # "zero" reduced cost for the degeneracy flag
UNIQUE_TOL = 1e-7
WARM_START_SIZE = 1600

UNIQUE, NON_UNIQUE, UNDETERMINED = "unique", "non-unique", "undetermined"


@dataclass(frozen=True)
class LPSolution:
    coupling: Coupling
    potentials: Potentials
    value: float
    iterations: int
    degenerate: bool
    basis: tuple            # spanning-tree arcs (i, j), some possibly with zero flow
    flows: np.ndarray       # flow on each basis arc
    reduced: np.ndarray     # C - u - v, dense
    cost_matrix: np.ndarray

    @property
    def dual_value(self) -> float:
        c = self.coupling
        return float(c.a.weights @ self.potentials.u + c.b.weights @ self.potentials.v)

    @property
    def scale(self) -> float:
        return max(1.0, float(np.abs(self.cost_matrix).max()))


# ------------------------------------------------------------ tree helpers

def _nw_corner(a, b):
    """North-west corner basis: exactly n+m-1 arcs forming a spanning tree."""
    n, m = len(a), len(b)
    ra, rb = np.array(a, float), np.array(b, float)
    arcs = []
    i = j = 0
    while True:
        x = min(ra[i], rb[j])
        arcs.append((i, j))
        ra[i] -= x
        rb[j] -= x
        if i == n - 1 and j == m - 1:
            break
        if j == m - 1 or (i < n - 1 and ra[i] <= rb[j]):
            i += 1
        else:
            j += 1
    return arcs


def _adjacency(n, m, arcs):
    adj = [set() for _ in range(n + m)]
    for i, j in arcs:
        adj[i].add(n + j)
        adj[n + j].add(i)
    return adj


def _tree_flows(n, m, arcs, a, b):
    """Flows on a spanning tree are forced by the marginals; peel leaves."""
    adj = _adjacency(n, m, arcs)
    supply = np.concatenate([np.asarray(a, float), np.asarray(b, float)])
    deg = [len(s) for s in adj]
    flow = {}
    stack = [v for v in range(n + m) if deg[v] == 1]
    while stack:
        v = stack.pop()
        if deg[v] != 1:
            continue
        w = adj[v].pop()
        adj[w].discard(v)
        f = supply[v]
        arc = (v, w - n) if v < n else (w, v - n)
        flow[arc] = f
        supply[w] -= f
        deg[v] -= 1
        deg[w] -= 1
        if deg[w] == 1:
            stack.append(w)
    return np.array([flow[arc] for arc in arcs])


def _tree_duals(n, m, adj, C):
    """u_i + v_j = C_ij on tree arcs with v_0 = 0."""
    u = np.zeros(n)
    v = np.zeros(m)
    seen = np.zeros(n + m, bool)
    seen[n] = True
    q = deque([n])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if seen[y]:
                continue
            seen[y] = True
            if x < n:      # x row, y col
                v[y - n] = C[x, y - n] - u[x]
            else:
                u[y] = C[y, x - n] - v[x - n]
            q.append(y)
    if not seen.all():
        raise SolverError("basis is not a spanning tree")
    return u, v


def _tree_path(adj, src, dst):
    parent = {src: None}
    q = deque([src])
    while q:
        x = q.popleft()
        if x == dst:
            break
        for y in adj[x]:
            if y not in parent:
                parent[y] = x
                q.append(y)
    path = [dst]
    while path[-1] != src:
        path.append(parent[path[-1]])
    return path[::-1]


def _rooted(adj, N):
    """Parent and depth arrays of the basis tree rooted at node 0."""
    parent = np.full(N, -1)
    depth = np.zeros(N, int)
    seen = np.zeros(N, bool)
    seen[0] = True
    q = deque([0])
    while q:
        x = q.popleft()
        for y in adj[x]:
            if not seen[y]:
                seen[y] = True
                parent[y] = x
                depth[y] = depth[x] + 1
                q.append(y)
    return parent, depth


def _rooted_path(parent, depth, src, dst):
    """Tree path src -> dst by climbing both ends to their common ancestor."""
    a, b = [src], [dst]
    while depth[a[-1]] > depth[b[-1]]:
        a.append(parent[a[-1]])
    while depth[b[-1]] > depth[a[-1]]:
        b.append(parent[b[-1]])
    while a[-1] != b[-1]:
        a.append(parent[a[-1]])
        b.append(parent[b[-1]])
    return a + b[-2::-1]


def _cycle(adj, n, i, j, rooted=None):
    """Arcs of the basis path from row i to col j, with +1/-1 flow signs."""
    path = _tree_path(adj, i, n + j) if rooted is None else _rooted_path(*rooted, i, n + j)
    out = []
    for t in range(1, len(path)):
        p, q = path[t - 1], path[t]
        arc = (p, q - n) if p < n else (q, p - n)
        out.append((arc, -1 if t % 2 == 1 else 1))
    return out


# ------------------------------------------------------------------ solver

def _simplex(a, b, C, arcs=None, max_iter=None):
    n, m = C.shape
    if arcs is None:
        arcs = _nw_corner(a, b)
    fl = _tree_flows(n, m, arcs, a, b)
    flow = {arc: max(f, 0.0) for arc, f in zip(arcs, fl)}
    adj = _adjacency(n, m, arcs)
    in_basis = np.zeros((n, m), bool)
    for arc in arcs:
        in_basis[arc] = True
    scale = max(1.0, float(np.abs(C).max()))
    tol = OPT_TOL * scale
    if max_iter is None:
        max_iter = 100 * (n + m) + 1000
    bland = False
    stall = 0
    it = 0
    while True:
        u, v = _tree_duals(n, m, adj, C)
        R = C - u[:, None] - v[None, :]
        R[in_basis] = 0.0
        if bland:
            cand = np.flatnonzero(R.ravel() < -tol)
            if cand.size == 0:
                break
            e = int(cand[0])
        else:
            e = int(np.argmin(R))
            if R.flat[e] >= -tol:
                break
        if it >= max_iter:
            raise SolverError(f"transport simplex hit the iteration cap ({max_iter})")
        it += 1
        ei, ej = divmod(e, m)
        cyc = _cycle(adj, n, ei, ej)
        minus = [(arc[0] * m + arc[1], flow[arc], arc) for arc, s in cyc if s < 0]
        theta = min(f for _, f, _ in minus)
        leave = min(k for k, f, _ in minus if f <= theta)
        leave = divmod(leave, m)
        for arc, s in cyc:
            flow[arc] = max(flow[arc] + s * theta, 0.0)
        del flow[leave]
        flow[(ei, ej)] = theta
        adj[leave[0]].discard(n + leave[1])
        adj[n + leave[1]].discard(leave[0])
        adj[ei].add(n + ej)
        adj[n + ej].add(ei)
        in_basis[leave] = False
        in_basis[ei, ej] = True
        if theta <= 0.0:
            stall += 1
            if stall > n + m:
                bland = True
        else:
            stall = 0
            bland = False
    R = C - u[:, None] - v[None, :]
    arcs = tuple(sorted(flow))
    return arcs, np.array([flow[a_] for a_ in arcs]), u, v, R, in_basis, it


def _warm_arcs(a, b, C):
    """Spanning tree around a HiGHS vertex: support first, then cheapest links."""
    n, m = C.shape
    P, _, hu, hv = highs_ot_sparse(a, b, C)
    parent = list(range(n + m))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    arcs = []
    R = np.abs(C - hu[:, None] - hv[None, :])
    sup = np.argwhere(P > 1e-13)
    order = list(map(tuple, sup[np.argsort(-P[P > 1e-13], kind="stable")]))
    for e in order + [tuple(divmod(int(k), m)) for k in np.argsort(R, axis=None, kind="stable")]:
        if len(arcs) == n + m - 1:
            break
        ri, rj = find(e[0]), find(n + e[1])
        if ri != rj:
            parent[ri] = rj
            arcs.append(e)
    fl = _tree_flows(n, m, arcs, a, b)
    if fl.min() < -1e-12:
        return None
    return arcs


def _solve_arrays(a, b, C, start: str = "auto"):
    n, m = C.shape
    if n * m > SIZE_CAP:
        raise ValidationError(f"problem size {n}x{m} exceeds the cap of {SIZE_CAP} entries")
    arcs = None
    if start == "warm" or (start == "auto" and n * m > WARM_START_SIZE):
        arcs = _warm_arcs(a, b, C)
    return _simplex(a, b, C, arcs)


def _package(a, b, C, res, cost_spec=None) -> LPSolution:
    arcs, flows, u, v, R, in_basis, it = res
    n, m = C.shape
    keep = flows > 0
    rows = np.array([x[0] for x in arcs], int)[keep]
    cols = np.array([x[1] for x in arcs], int)[keep]
    mass = flows[keep]
    value = float(mass @ C[rows, cols])
    cp = Coupling(rows, cols, mass, (n, m), value, a, b, cost_spec)
    scale = max(1.0, float(np.abs(C).max()))
    degenerate = bool(np.any(R[~in_basis] < DEGEN_TOL * scale))
    R.setflags(write=False)
    C = np.array(C)
    C.setflags(write=False)
    return LPSolution(cp, Potentials(u, v), value, it, degenerate, arcs, flows, R, C)


def solve_ot(a: DiscreteMeasure, b: DiscreteMeasure, c: CostSpec = None, start: str = "auto") -> LPSolution:
    """Exact optimal plan between a (rows) and b (cols) for cost c."""
    c = c or CostSpec.quadratic()
    if a.size * b.size > SIZE_CAP:
        raise ValidationError(f"problem size {a.size}x{b.size} exceeds the cap of {SIZE_CAP} entries")
    C = c.matrix(a, b)
    return _package(a, b, C, _solve_arrays(a.weights, b.weights, C, start), c)


def ot_1d(a: DiscreteMeasure, b: DiscreteMeasure) -> LPSolution:
    """Monotone (quantile) coupling for quadratic cost on the line."""
    if a.dim != 1 or b.dim != 1:
        raise ValidationError("ot_1d needs 1-D measures")
    pa = np.argsort(a.points[:, 0], kind="stable")
    pb = np.argsort(b.points[:, 0], kind="stable")
    C = CostSpec.quadratic().matrix(a, b)
    arcs = [(int(pa[i]), int(pb[j])) for i, j in _nw_corner(a.weights[pa], b.weights[pb])]
    # the staircase is already optimal for a Monge cost; the simplex call only
    # rebuilds duals (and repairs the basis in the rare degenerate case)
    res = _simplex(a.weights, b.weights, C, arcs)
    return _package(a, b, C, res, CostSpec.quadratic())


def w2(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    if a.dim == 1:
        return float(np.sqrt(max(ot_1d(a, b).value, 0.0)))
    return float(np.sqrt(max(solve_ot(a, b).value, 0.0)))


def w2_sq_1d(xa, wa, xb, wb) -> float:
    """Squared W2 between weighted 1-D samples by quantile merging (no LP)."""
    ia, ib = np.argsort(xa, kind="stable"), np.argsort(xb, kind="stable")
    xa, wa, xb, wb = xa[ia], wa[ia], xb[ib], wb[ib]
    ca, cb = np.cumsum(wa), np.cumsum(wb)
    ca[-1] = cb[-1] = 1.0
    lv = np.union1d(ca, cb)
    lv = lv[lv > 0]
    lo = np.concatenate([[0.0], lv[:-1]])
    mid = 0.5 * (lo + lv)
    qa = xa[np.minimum(np.searchsorted(ca, mid), len(xa) - 1)]
    qb = xb[np.minimum(np.searchsorted(cb, mid), len(xb) - 1)]
    return float(((qa - qb) ** 2 * (lv - lo)).sum())


# -------------------------------------------------------------- uniqueness

def tight_set(sol: LPSolution, tol: float = DEGEN_TOL) -> np.ndarray:
    """Arcs with (numerically) zero reduced cost; every optimal plan lives here."""
    return sol.reduced <= tol * sol.scale


def is_unique_plan(sol: LPSolution, exact: bool = True) -> str:
    """Tri-state uniqueness of the optimal plan.

    The tree test is tried first. With exact=True an inconclusive outcome is
    settled by maximising the mass a plan on the optimal face can put outside
    the current support (positive iff another optimal plan exists).
    """
    n, m = sol.cost_matrix.shape
    in_basis = np.zeros((n, m), bool)
    for arc in sol.basis:
        in_basis[arc] = True
    R = sol.reduced
    near = (~in_basis) & (R <= UNIQUE_TOL * sol.scale)
    if not near.any():
        return UNIQUE
    adj = _adjacency(n, m, sol.basis)
    rooted = _rooted(adj, n + m)
    flow = dict(zip(sol.basis, sol.flows))
    for i, j in np.argwhere((~in_basis) & (R <= DEGEN_TOL * sol.scale)):
        cyc = _cycle(adj, n, int(i), int(j), rooted)
        if min(flow[arc] for arc, s in cyc if s < 0) > 1e-12:
            return NON_UNIQUE
    if not exact:
        return UNDETERMINED
    return _face_test(sol)


def _face_test(sol: LPSolution) -> str:
    cp = sol.coupling
    n, m = sol.cost_matrix.shape
    E = tight_set(sol)
    P = cp.dense()
    E |= P > 0
    idx = np.flatnonzero(E.ravel())
    outside = (P.ravel()[idx] <= 0).astype(float)
    if not outside.any():
        return UNIQUE
    A = transport_constraints(n, m)[:, idx]
    r = solve_lp(-outside, A, np.concatenate([cp.a.weights, cp.b.weights]))
    return NON_UNIQUE if -r.value > 1e-9 else UNIQUE


def c_transform(v: np.ndarray, C: np.ndarray) -> np.ndarray:
    """v^c(x_i) = min_j C_ij - v_j."""
    return (C - v[None, :]).min(axis=1)


def check_solution(sol: LPSolution) -> dict:
    """Primal/dual feasibility, duality gap and c-cyclical monotonicity numbers."""
    cp = sol.coupling
    C = sol.cost_matrix
    u, v = sol.potentials.u, sol.potentials.v
    slack = C - u[:, None] - v[None, :]
    r, c = cp.rows, cp.cols
    cyc = 0.0
    if r.size > 1:
        own = C[r, c]
        swap = C[r[:, None], c[None, :]]
        cyc = float((own[:, None] + own[None, :] - swap - swap.T).max())
    return {
        "marginal_error": cp.marginal_error(),
        "dual_infeasibility": float(max(0.0, -slack.min())),
        "slackness": float(np.abs(slack[r, c]).max()) if r.size else 0.0,
        "duality_gap": abs(sol.value - sol.dual_value),
        "cyclical_violation": max(cyc, 0.0),
    }
