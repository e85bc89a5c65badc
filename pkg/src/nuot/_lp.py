"""Thin wrapper around scipy's HiGHS for the larger constrained LPs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.optimize import linprog

from .errors import SolverError

HIGHS_OPTS = {"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10}


@dataclass
class LPResult:
    x: np.ndarray
    value: float
    eq_duals: np.ndarray
    ub_duals: np.ndarray
    reduced: np.ndarray   # reduced costs of the x >= 0 bounds
    iterations: int


def solve_lp(c, A_eq=None, b_eq=None, A_ub=None, b_ub=None, method: str = "highs-ds") -> LPResult:
    """min c.x s.t. A_eq x = b_eq, A_ub x <= b_ub, x >= 0."""
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=b_eq, bounds=(0, None),
                  method=method, options=HIGHS_OPTS)
    if res.status == 2:
        raise SolverError("LP infeasible (check the optimal-face tolerance)")
    if res.status != 0:
        raise SolverError(f"HiGHS failed: {res.message}")
    x = np.maximum(res.x, 0.0)
    eq = res.eqlin.marginals if A_eq is not None else np.zeros(0)
    ub = res.ineqlin.marginals if A_ub is not None else np.zeros(0)
    red = res.lower.marginals if res.lower is not None else np.zeros_like(x)
    return LPResult(x, float(res.fun), np.asarray(eq), np.asarray(ub), np.asarray(red), int(res.nit))


def transport_constraints(n: int, m: int) -> sp.csr_matrix:
    """Row-sum and column-sum operator for a flattened n x m plan."""
    rows = sp.kron(sp.eye(n), np.ones((1, m)))
    cols = sp.kron(np.ones((1, n)), sp.eye(m))
    return sp.vstack([rows, cols]).tocsr()


def highs_ot(a, b, C):
    """Reference transport solve; returns (plan, value, u, v)."""
    n, m = C.shape
    A = transport_constraints(n, m)
    r = solve_lp(C.ravel(), A, np.concatenate([a, b]))
    return r.x.reshape(n, m), r.value, r.eq_duals[:n], r.eq_duals[n:]


def _staircase(a, b):
    # NW-corner arcs for weights a, b in the given order (a feasible plan's support)
    i = j = 0
    ra, rb = float(a[0]), float(b[0])
    out = []
    while True:
        out.append((i, j))
        if i == len(a) - 1 and j == len(b) - 1:
            return out
        if (ra <= rb and i < len(a) - 1) or j == len(b) - 1:
            rb -= ra
            i += 1
            ra = float(a[i])
        else:
            ra -= rb
            j += 1
            rb = float(b[j])


def highs_ot_sparse(a, b, C, k_row: int = 8, k_col: int = 2, k_add: int = 4, max_rounds: int = 500):
    """Same as highs_ot, solved on a growing arc subset.

    Starts from a staircase plan (always feasible) plus the cheapest arcs of
    each row and column, then adds every arc with negative reduced cost under
    the restricted duals, capped at the k_add most negative per row and
    per column so the restricted LP stays small. Stops when the full matrix prices out, so the result
    is optimal for the dense problem.
    """
    n, m = C.shape
    keep = np.zeros((n, m), bool)
    kr, kc = min(k_row, m - 1), min(k_col, n - 1)
    if kr > 0:
        keep[np.arange(n)[:, None], np.argpartition(C, kr, axis=1)[:, :kr]] = True
    if kc > 0:
        keep[np.argpartition(C, kc, axis=0)[:kc, :], np.arange(m)[None, :]] = True
    pr, pc = np.argsort(C.argmin(1), kind="stable"), np.argsort(C.argmin(0), kind="stable")
    for i, j in _staircase(a[pr], b[pc]):
        keep[pr[i], pc[j]] = True
    scale = max(1.0, float(np.abs(C).max()))
    ab = np.concatenate([a, b])
    for _ in range(max_rounds):
        r_, c_ = np.nonzero(keep)
        e = np.arange(r_.size)
        A = sp.vstack([sp.csr_matrix((np.ones(r_.size), (r_, e)), shape=(n, r_.size)),
                       sp.csr_matrix((np.ones(r_.size), (c_, e)), shape=(m, r_.size))]).tocsr()
        r = solve_lp(C[r_, c_], A, ab)
        u, v = r.eq_duals[:n], r.eq_duals[n:]
        R = C - u[:, None] - v[None, :]
        neg = R < -1e-11 * scale
        if not neg.any():
            P = np.zeros((n, m))
            P[r_, c_] = r.x
            return P, r.value, u, v
        ka, kb = min(k_add, m - 1), min(k_add, n - 1)
        add = np.zeros_like(keep)
        if ka > 0:
            add[np.arange(n)[:, None], np.argpartition(R, ka, axis=1)[:, :ka]] = True
        else:
            add[np.arange(n), R.argmin(1)] = True
        if kb > 0:
            add[np.argpartition(R, kb, axis=0)[:kb, :], np.arange(m)[None, :]] = True
        else:
            add[R.argmin(0), np.arange(m)] = True
        keep |= add & neg
    raise SolverError("sparse transport LP did not converge")
