"""The nu-based Wasserstein distance W_nu and its relatives.

Three routes to the same number:
  * ``w_nu``          constrained three-index LP (optimal-face constraints),
  * ``w_nu_disintegration``  per-atom W2 between conditionals of fixed plans,
  * ``mm_limit``      small-eps limit of the multi-marginal problem.
Plus the coupling metric, the eps-functional and the two-level
hierarchical metric with its weighted multi-marginal approximation.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
import scipy.sparse as sp

from ._lp import solve_lp
from ._parallel import pmap
from .errors import SolverError, ValidationError
from .measures import Coupling, CostSpec, DiscreteMeasure, TriCoupling
from .ot_core import (SIZE_CAP, LPSolution, _solve_arrays, is_unique_plan,
                      solve_ot, tight_set)

FACE_TAU = 1e-9
CG_THRESHOLD = 60000     # face triples above this go through column generation
FACE_CAP = 5 * 10 ** 6
OPT_CHECK_TOL = 1e-8
DEFAULT_SCHEDULE = (1.0, 0.3, 0.1, 0.03, 0.01, 0.003, 1e-3, 3e-4, 1e-4)


@dataclass(frozen=True)
class WnuResult:
    value: float
    gamma: TriCoupling
    uniqueness: tuple
    method: str
    gaps: tuple = (0.0, 0.0)
    degenerate: bool = False
    table: Optional[list] = None
    converged: Optional[bool] = None
    warnings: tuple = ()

    @property
    def value_sq(self) -> float:
        return self.value ** 2


@dataclass(frozen=True)
class MMResult:
    gamma: TriCoupling
    objective: float
    cross: float
    term0: float
    term1: float
    eps: float


def _sqdist(X, Y):
    return ((X[:, None, :] - Y[None, :, :]) ** 2).sum(-1)


def _plan_cost(cp: Coupling, C: np.ndarray) -> float:
    return float(cp.mass @ C[cp.rows, cp.cols])


def _tri(k, i, j, x, nu, mu0, mu1, drop=1e-15) -> TriCoupling:
    keep = x > drop
    return TriCoupling(k[keep], i[keep], j[keep], x[keep], nu, mu0, mu1)


def _tri_gaps(g: TriCoupling, C0, C1, c0, c1):
    t0 = float(g.mass @ C0[g.k, g.i])
    t1 = float(g.mass @ C1[g.k, g.j])
    return t0 - c0, t1 - c1


# ------------------------------------------------------- constrained LP

def _face_pairs(E0: np.ndarray, E1: np.ndarray):
    """All (k, i, j) with (k, i) in E0 and (k, j) in E1."""
    K, I, J = [], [], []
    for k in range(E0.shape[0]):
        ii = np.flatnonzero(E0[k])
        jj = np.flatnonzero(E1[k])
        K.append(np.full(ii.size * jj.size, k))
        I.append(np.repeat(ii, jj.size))
        J.append(np.tile(jj, ii.size))
    return np.concatenate(K), np.concatenate(I), np.concatenate(J)


def _marg_matrix(index_lists, sizes):
    """Sparse equality operator: one block of rows per marginal."""
    nvar = index_lists[0].size
    rows, off = [], 0
    for idx, n in zip(index_lists, sizes):
        rows.append(idx + off)
        off += n
    r = np.concatenate(rows)
    cidx = np.tile(np.arange(nvar), len(index_lists))
    return sp.csr_matrix((np.ones(r.size), (r, cidx)), shape=(off, nvar))


def w_nu(mu0: DiscreteMeasure, mu1: DiscreteMeasure, nu: DiscreteMeasure, c: CostSpec = None,
         method: str = "lp", schedule=None, exact_uniqueness: bool = True) -> WnuResult:
    """W_nu(mu0, mu1); method in {'lp', 'disint', 'mm', 'auto'}.

    'auto' uses the disintegration formula when both plans to nu are unique
    (then it is exact) and the constrained LP otherwise.
    """
    c = c or CostSpec.quadratic()
    if mu0.dim != mu1.dim:
        raise ValidationError("mu0 and mu1 must share a dimension")
    if method == "auto":
        s0, s1 = solve_ot(nu, mu0, c.swapped()), solve_ot(nu, mu1, c.swapped())
        uq = (is_unique_plan(s0, exact_uniqueness), is_unique_plan(s1, exact_uniqueness))
        if uq == ("unique", "unique"):
            res = w_nu_disintegration(s0.coupling, s1.coupling, nu, check=False, opt_values=(s0.value, s1.value))
            return _replace(res, uniqueness=uq)
        return _constrained(mu0, mu1, nu, s0, s1, exact_uniqueness)
    if method in ("disint", "disintegration"):
        s0, s1 = solve_ot(nu, mu0, c.swapped()), solve_ot(nu, mu1, c.swapped())
        res = w_nu_disintegration(s0.coupling, s1.coupling, nu, check=False, opt_values=(s0.value, s1.value))
        uq = (is_unique_plan(s0, exact_uniqueness), is_unique_plan(s1, exact_uniqueness))
        return _replace(res, uniqueness=uq)
    if method in ("mm", "mm-limit"):
        return mm_limit(mu0, mu1, nu, c, schedule or DEFAULT_SCHEDULE)
    if method not in ("lp", "constrained-lp"):
        raise ValidationError(f"unknown method {method!r}")
    s0, s1 = solve_ot(nu, mu0, c.swapped()), solve_ot(nu, mu1, c.swapped())
    return _constrained(mu0, mu1, nu, s0, s1, exact_uniqueness)


def _replace(r: WnuResult, **kw) -> WnuResult:
    d = dict(r.__dict__)
    d.update(kw)
    return WnuResult(**d)


def _constrained(mu0, mu1, nu, s0: LPSolution, s1: LPSolution, exact_uniqueness=True) -> WnuResult:
    C0, C1 = s0.cost_matrix, s1.cost_matrix
    E0, E1 = tight_set(s0), tight_set(s1)
    face_size = int((E0.sum(1) * E1.sum(1)).sum())
    D = _sqdist(mu0.points, mu1.points)
    b_eq = np.concatenate([nu.weights, mu0.weights, mu1.weights])
    b_ub = np.array([s0.value + FACE_TAU * max(1.0, abs(s0.value)),
                     s1.value + FACE_TAU * max(1.0, abs(s1.value))])
    if face_size <= CG_THRESHOLD:
        K, I, J = _face_pairs(E0, E1)
        r = _restricted(K, I, J, D, C0, C1, nu, mu0, mu1, b_eq, b_ub)
    else:
        if face_size > FACE_CAP:
            raise ValidationError(f"optimal face has {face_size} triples (cap {FACE_CAP})")
        K, I, J, r = _column_generation(E0, E1, D, C0, C1, nu, mu0, mu1, b_eq, b_ub, s0, s1)
    g = _tri(K, I, J, r.x, nu, mu0, mu1)
    degenerate = bool(np.any((r.x <= 1e-14) & (np.abs(r.reduced) < 1e-9)))
    uq = (is_unique_plan(s0, exact_uniqueness), is_unique_plan(s1, exact_uniqueness))
    return WnuResult(float(np.sqrt(max(g.cross_cost(), 0.0))), g, uq, "constrained-lp",
                     _tri_gaps(g, C0, C1, s0.value, s1.value), degenerate)


def _restricted(K, I, J, D, C0, C1, nu, mu0, mu1, b_eq, b_ub, method="highs-ds"):
    A_eq = _marg_matrix([K, I, J], [nu.size, mu0.size, mu1.size])
    A_ub = sp.csr_matrix(np.vstack([C0[K, I], C1[K, J]]))
    return solve_lp(D[I, J], A_eq, b_eq, A_ub, b_ub, method)


def _column_generation(E0, E1, D, C0, C1, nu, mu0, mu1, b_eq, b_ub, s0, s1, max_rounds=200,
                       gap_tol=1e-11):
    """Exact LP over the optimal face by column generation.

    Starts from the slice-optimal coupling of the two solver plans and adds
    the most negative reduced-cost face triples each round; non-basic columns
    with large reduced cost are dropped to keep the restricted LP small.
    Each full pricing pass also gives a Lagrangian lower bound
    value + sum_k nu_k min(0, min reduced cost in row k), since every feasible
    gamma puts mass nu_k on row k. Stops when pricing finds nothing or the
    bound gap is below gap_tol (relative).
    """
    _, g0 = tilde_w_nu(s0.coupling, s1.coupling)
    K, I, J = np.asarray(g0.k), np.asarray(g0.i), np.asarray(g0.j)
    rows_k = [(np.flatnonzero(E0[k]), np.flatnonzero(E1[k])) for k in range(E0.shape[0])]
    n, a = nu.size, mu0.size
    nrow = n + a + mu1.size
    batch = max(20000, 3 * nrow)
    scale = max(1.0, float(D.max()))
    for _ in range(max_rounds):
        # interior point with crossover: still a vertex (reduced costs stay valid), about twice as fast
        r = _restricted(K, I, J, D, C0, C1, nu, mu0, mu1, b_eq, b_ub, "highs-ipm")
        yk, yi, yj = r.eq_duals[:n], r.eq_duals[n:n + a], r.eq_duals[n + a:]
        l0, l1 = r.ub_duals
        NK, NI, NJ, NV = [], [], [], []
        lb = r.value
        for k, (ii, jj) in enumerate(rows_k):
            if ii.size == 0 or jj.size == 0:
                continue
            R = (D[np.ix_(ii, jj)] - yk[k] - yi[ii, None] - yj[None, jj]
                 - l0 * C0[k, ii][:, None] - l1 * C1[k, jj][None, :])
            lb += nu.weights[k] * min(0.0, float(R.min()))
            neg = np.argwhere(R < -1e-11 * scale)
            if neg.size:
                NK.append(np.full(len(neg), k))
                NI.append(ii[neg[:, 0]])
                NJ.append(jj[neg[:, 1]])
                NV.append(R[neg[:, 0], neg[:, 1]])
        if not NK or r.value - lb <= gap_tol * max(1.0, abs(r.value)):
            return K, I, J, r
        NK, NI, NJ, NV = map(np.concatenate, (NK, NI, NJ, NV))
        o = np.argsort(NV, kind="stable")[:batch]
        # keep the basis and the cheaper half of the rest
        red = r.reduced
        keep = (r.x > 0) | (red <= np.median(red))
        K = np.concatenate([K[keep], NK[o]])
        I = np.concatenate([I[keep], NI[o]])
        J = np.concatenate([J[keep], NJ[o]])
    raise SolverError("column generation did not converge")


# ------------------------------------------------------- disintegration

def _line_direction(X, tol=1e-12):
    """Unit direction of the line holding every row of X, or None."""
    Z = X - X.mean(0)
    scale = float(np.abs(Z).max(initial=0.0))
    if scale == 0.0:
        return np.eye(X.shape[1])[0]
    _, s, Vt = np.linalg.svd(Z / scale, full_matrices=False)
    return Vt[0] if s.size < 2 or s[1] <= tol * s[0] else None


def _monotone_plan(t0, p0, t1, p1):
    """Quantile coupling of two weighted samples on the line."""
    i0, i1 = np.argsort(t0, kind="stable"), np.argsort(t1, kind="stable")
    c0, c1 = np.cumsum(p0[i0]), np.cumsum(p1[i1])
    c0[-1] = c1[-1] = 1.0
    lv = np.union1d(c0, c1)
    lv = lv[lv > 0]
    lo = np.concatenate([[0.0], lv[:-1]])
    mid = 0.5 * (lo + lv)
    a = i0[np.minimum(np.searchsorted(c0, mid), t0.size - 1)]
    b = i1[np.minimum(np.searchsorted(c1, mid), t1.size - 1)]
    P = np.zeros((t0.size, t1.size))
    np.add.at(P, (a, b), lv - lo)
    return P


def _slice_w2(args):
    X0, p0, X1, p1 = args
    if p0.size == 1 or p1.size == 1:
        # one side is a single atom: the product plan is the only plan
        P = np.outer(p0, p1)
        return float((P * _sqdist(X0, X1)).sum()), P
    # atoms at solver-noise mass (< 1e-12 of the slice) are ignored by the collinearity test;
    # their contribution to the cost is bounded by that mass times the squared diameter
    d = _line_direction(np.vstack([X0[p0 > 1e-12 * p0.sum()], X1[p1 > 1e-12 * p1.sum()]]))
    if d is not None:
        # collinear slice: the monotone coupling is optimal for the squared distance
        P = _monotone_plan(X0 @ d, p0 / p0.sum(), X1 @ d, p1 / p1.sum())
        return float((P * _sqdist(X0, X1)).sum()), P
    C = _sqdist(X0, X1)
    arcs, flows, *_ = _solve_arrays(p0, p1, C)
    P = np.zeros_like(C)
    for (i, j), f in zip(arcs, flows):
        P[i, j] += f
    return float((P * C).sum()), P


def tilde_w_nu(pi0: Coupling, pi1: Coupling, threads: Optional[int] = None):
    """Coupling distance: best gamma with both (y, x_i) marginals fixed to pi_i.

    Returns (value, TriCoupling). Slices are solved independently.
    """
    nu = pi0.a
    if pi1.a is None or nu is None or pi0.b is None or pi1.b is None:
        raise ValidationError("couplings must carry their marginal measures")
    if (pi0.shape[0] != pi1.shape[0] or not np.array_equal(nu.points, pi1.a.points)
            or np.abs(nu.weights - pi1.a.weights).max() > 1e-12):
        raise ValidationError("the two couplings do not share their first marginal")
    mu0, mu1 = pi0.b, pi1.b
    P0, P1 = pi0.dense(), pi1.dense()
    jobs, supports = [], []
    for k in range(nu.size):
        s0 = np.flatnonzero(P0[k] > 0)
        s1 = np.flatnonzero(P1[k] > 0)
        if s0.size == 0 or s1.size == 0:
            raise ValidationError(f"coupling row {k} is empty")
        p0 = P0[k, s0] / P0[k, s0].sum()
        p1 = P1[k, s1] / P1[k, s1].sum()
        jobs.append((mu0.points[s0], p0, mu1.points[s1], p1))
        supports.append((s0, s1))
    out = pmap(_slice_w2, jobs, threads)
    total = 0.0
    K, I, J, M = [], [], [], []
    for k, ((s0, s1), (w2sq, P)) in enumerate(zip(supports, out)):
        total += nu.weights[k] * w2sq
        r, cc = np.nonzero(P > 0)
        K.append(np.full(r.size, k))
        I.append(s0[r])
        J.append(s1[cc])
        M.append(nu.weights[k] * P[r, cc])
    g = _tri(np.concatenate(K), np.concatenate(I), np.concatenate(J), np.concatenate(M), nu, mu0, mu1)
    return float(np.sqrt(max(total, 0.0))), g


def w_nu_disintegration(pi0: Coupling, pi1: Coupling, nu: Optional[DiscreteMeasure] = None,
                        check: bool = True, threads: Optional[int] = None,
                        opt_values: Optional[tuple] = None) -> WnuResult:
    """W_nu from two optimal plans via the per-atom conditionals.

    ``opt_values`` supplies known optimal transport costs and skips re-solving them for the gaps.
    """
    if nu is not None and (pi0.a is None or pi0.a.size != nu.size
                           or np.abs(pi0.a.weights - nu.weights).max() > 1e-12):
        raise ValidationError("pi0's first marginal is not nu")
    gaps = []
    for idx, p in enumerate((pi0, pi1)):
        if p.cost_spec is None:
            if check:
                raise ValidationError("coupling has no cost attached; cannot verify optimality")
            gaps.append(float("nan"))
            continue
        C = p.cost_spec.matrix(p.a, p.b)
        opt = opt_values[idx] if opt_values is not None else solve_ot(p.a, p.b, p.cost_spec).value
        gap = _plan_cost(p, C) - opt
        if check and gap > OPT_CHECK_TOL:
            raise ValidationError(f"plan is not optimal: cost gap {gap:.3e}")
        gaps.append(gap)
    val, g = tilde_w_nu(pi0, pi1, threads)
    return WnuResult(val, g, ("undetermined", "undetermined"), "disintegration", tuple(gaps))


# ------------------------------------------------------ multi-marginal

def _full_index(*sizes):
    grids = np.meshgrid(*[np.arange(s) for s in sizes], indexing="ij")
    return [g.ravel() for g in grids]


def mm_epsilon(mu0: DiscreteMeasure, mu1: DiscreteMeasure, nu: DiscreteMeasure, c: CostSpec = None,
               eps: float = 1e-2) -> MMResult:
    """Three-marginal problem with cost eps|x0-x1|^2 + c(x0,y) + c(x1,y)."""
    if eps <= 0:
        raise ValidationError("eps must be positive")
    c = c or CostSpec.quadratic()
    n, a, b = nu.size, mu0.size, mu1.size
    if n * a * b > SIZE_CAP:
        raise ValidationError(f"multi-marginal LP has {n * a * b} variables (cap {SIZE_CAP})")
    C0 = c.matrix(mu0, nu).T
    C1 = c.matrix(mu1, nu).T
    D = _sqdist(mu0.points, mu1.points)
    K, I, J = _full_index(n, a, b)
    obj = eps * D[I, J] + C0[K, I] + C1[K, J]
    A = _marg_matrix([K, I, J], [n, a, b])
    r = solve_lp(obj, A, np.concatenate([nu.weights, mu0.weights, mu1.weights]))
    g = _tri(K, I, J, r.x, nu, mu0, mu1)
    cross = g.cross_cost()
    t0 = float(g.mass @ C0[g.k, g.i])
    t1 = float(g.mass @ C1[g.k, g.j])
    return MMResult(g, eps * cross + t0 + t1, cross, t0, t1, eps)


def gamma_functional(mu0, mu1, nu, c=None, eps: float = 1e-2, base=None) -> float:
    """(MM_eps - W(nu,mu0) - W(nu,mu1)) / eps, evaluated term by term for accuracy."""
    c = c or CostSpec.quadratic()
    if base is None:
        base = (solve_ot(nu, mu0, c.swapped()).value, solve_ot(nu, mu1, c.swapped()).value)
    r = mm_epsilon(mu0, mu1, nu, c, eps)
    return r.cross + ((r.term0 - base[0]) + (r.term1 - base[1])) / eps


def _tv(g: TriCoupling, h: TriCoupling) -> float:
    n = g.shape
    key = lambda t: (t.k * n[1] + t.i) * n[2] + t.j
    size = n[0] * n[1] * n[2]
    return 0.5 * float(np.abs(np.bincount(key(g), g.mass, size) - np.bincount(key(h), h.mass, size)).sum())


def mm_limit(mu0, mu1, nu, c=None, schedule: Sequence[float] = DEFAULT_SCHEDULE,
             reference: Optional[float] = None) -> WnuResult:
    """Run mm_epsilon down a decreasing schedule and tabulate the approach to W_nu^2."""
    c = c or CostSpec.quadratic()
    sched = [float(e) for e in schedule]
    if any(e <= 0 for e in sched) or any(x <= y for x, y in zip(sched, sched[1:])):
        raise ValidationError("eps schedule must be positive and strictly decreasing")
    if sched[-1] > 1e-4:
        raise ValidationError("eps schedule must reach 1e-4 or below")
    s0, s1 = solve_ot(nu, mu0, c.swapped()), solve_ot(nu, mu1, c.swapped())
    if reference is None:
        reference = _constrained(mu0, mu1, nu, s0, s1).value_sq
    rows, prev, warns = [], None, []
    for e in sched:
        r = mm_epsilon(mu0, mu1, nu, c, e)
        g0, g1 = r.term0 - s0.value, r.term1 - s1.value
        rows.append({"eps": e, "cross_term": r.cross, "gap0": g0, "gap1": g1,
                     "F_eps": r.cross + (g0 + g1) / e,
                     "tv_prev": _tv(r.gamma, prev.gamma) if prev is not None else float("nan")})
        prev = r
    lp_slack = 1e-8
    cross = [row["cross_term"] for row in rows]
    F = [row["F_eps"] for row in rows]
    if any(y < x - lp_slack for x, y in zip(cross, cross[1:])):
        warns.append("cross-term sequence not monotone (LP degeneracy?)")
    if any(y < x - lp_slack for x, y in zip(F, F[1:])):
        warns.append("F_eps sequence not monotone (LP degeneracy?)")
    last = rows[-1]
    converged = (max(last["gap0"], last["gap1"]) < 1e-6 and abs(last["cross_term"] - reference) < 1e-4)
    uq = (is_unique_plan(s0), is_unique_plan(s1))
    return WnuResult(float(np.sqrt(max(last["cross_term"], 0.0))), prev.gamma, uq, "mm-limit",
                     (last["gap0"], last["gap1"]), False, rows, converged, tuple(warns))


# ------------------------------------------------ hierarchical (k <= 2)

@dataclass(frozen=True)
class TensorCoupling:
    """Sparse mass on index tuples; columns follow ``measures``."""
    index: np.ndarray
    mass: np.ndarray
    measures: tuple

    def pair(self, p: int, q: int) -> np.ndarray:
        P = np.zeros((self.measures[p].size, self.measures[q].size))
        np.add.at(P, (self.index[:, p], self.index[:, q]), self.mass)
        return P


@dataclass(frozen=True)
class HierResult:
    value: float
    coupling: TensorCoupling   # columns: y1, [y2,] x0, x1
    stage_values: tuple

    def cross_plan(self) -> np.ndarray:
        d = self.coupling.index.shape[1]
        return self.coupling.pair(d - 2, d - 1)


def _costs_for(nus, c):
    if c is None or isinstance(c, CostSpec):
        return [c or CostSpec.quadratic()] * len(nus)
    if len(c) != len(nus):
        raise ValidationError("need one cost per reference measure")
    return list(c)


def hierarchical_w(mu0, mu1, nus: Sequence[DiscreteMeasure], c=None) -> HierResult:
    """Lexicographic (stage-by-stage) metric for k <= 2 reference measures.

    Stage 1 fixes both (y1, x_i) plans on their optimal faces, stage 2 minimises
    the summed (y2, x_i) costs on that face, the last stage the cross cost.
    """
    nus = list(nus)
    if not 1 <= len(nus) <= 2:
        raise ValidationError("hierarchical_w supports one or two reference measures")
    costs = _costs_for(nus, c)
    if len(nus) == 1:
        r = w_nu(mu0, mu1, nus[0], costs[0])
        g = r.gamma
        return HierResult(r.value, TensorCoupling(np.stack([g.k, g.i, g.j], 1), g.mass,
                                                  (nus[0], mu0, mu1)), (r.value_sq,))
    n1, n2 = nus
    s0, s1 = solve_ot(n1, mu0, costs[0].swapped()), solve_ot(n1, mu1, costs[0].swapped())
    K, I, J = _face_pairs(tight_set(s0), tight_set(s1))
    nb = n2.size
    if K.size * nb > SIZE_CAP:
        raise ValidationError(f"hierarchical LP has {K.size * nb} variables (cap {SIZE_CAP})")
    A_ = np.repeat(K, nb)
    B_ = np.tile(np.arange(nb), K.size)
    I_ = np.repeat(I, nb)
    J_ = np.repeat(J, nb)
    C10, C11 = s0.cost_matrix, s1.cost_matrix
    C20 = costs[1].matrix(mu0, n2).T
    C21 = costs[1].matrix(mu1, n2).T
    A_eq = _marg_matrix([A_, B_, I_, J_], [n1.size, nb, mu0.size, mu1.size])
    b_eq = np.concatenate([n1.weights, n2.weights, mu0.weights, mu1.weights])
    ub_rows = [C10[A_, I_], C11[A_, J_]]
    ub = [s0.value + FACE_TAU * max(1.0, abs(s0.value)), s1.value + FACE_TAU * max(1.0, abs(s1.value))]
    stage2 = C20[B_, I_] + C21[B_, J_]
    r2 = solve_lp(stage2, A_eq, b_eq, sp.csr_matrix(np.vstack(ub_rows)), np.array(ub))
    ub_rows.append(stage2)
    ub.append(r2.value + FACE_TAU * max(1.0, abs(r2.value)))
    D = _sqdist(mu0.points, mu1.points)
    r3 = solve_lp(D[I_, J_], A_eq, b_eq, sp.csr_matrix(np.vstack(ub_rows)), np.array(ub))
    keep = r3.x > 1e-15
    idx = np.stack([A_, B_, I_, J_], 1)[keep]
    tc = TensorCoupling(idx, r3.x[keep], (n1, n2, mu0, mu1))
    cross = float(r3.x[keep] @ D[idx[:, 2], idx[:, 3]])
    return HierResult(float(np.sqrt(max(cross, 0.0))), tc, (s0.value + s1.value, r2.value, cross))


def weighted_mm(mu0, mu1, nus: Sequence[DiscreteMeasure], c=None, eps: float = 1e-3) -> TensorCoupling:
    """Multi-marginal problem with eps-power weights on the reference levels.

    Cost: eps^k |x0-x1|^2 + sum_l eps^(l-1) (c_l(x0,y_l) + c_l(x1,y_l)).
    """
    nus = list(nus)
    if not 1 <= len(nus) <= 2:
        raise ValidationError("weighted_mm supports one or two reference measures")
    if eps <= 0:
        raise ValidationError("eps must be positive")
    costs = _costs_for(nus, c)
    sizes = [v.size for v in nus] + [mu0.size, mu1.size]
    if int(np.prod(sizes)) > SIZE_CAP:
        raise ValidationError(f"combined index space {int(np.prod(sizes))} exceeds {SIZE_CAP}")
    idx = _full_index(*sizes)
    xi, xj = idx[-2], idx[-1]
    obj = eps ** len(nus) * _sqdist(mu0.points, mu1.points)[xi, xj]
    for l, (v, cl) in enumerate(zip(nus, costs)):
        obj = obj + eps ** l * (cl.matrix(mu0, v)[xi, idx[l]] + cl.matrix(mu1, v)[xj, idx[l]])
    A = _marg_matrix(idx, sizes)
    b = np.concatenate([v.weights for v in nus] + [mu0.weights, mu1.weights])
    r = solve_lp(obj, A, b)
    keep = r.x > 1e-15
    return TensorCoupling(np.stack(idx, 1)[keep], r.x[keep], tuple(nus) + (mu0, mu1))


def weighted_mm_table(mu0, mu1, nus, c=None, schedule=(1e-1, 1e-2, 1e-3)) -> list:
    """Cross-pairing distance (total variation) of weighted_mm to the hierarchical plan."""
    h = hierarchical_w(mu0, mu1, nus, c)
    H = h.cross_plan()
    rows = []
    for e in schedule:
        t = weighted_mm(mu0, mu1, nus, c, e)
        d = t.index.shape[1]
        P = t.pair(d - 2, d - 1)
        D = _sqdist(mu0.points, mu1.points)
        rows.append({"eps": e, "cross_term": float((P * D).sum()),
                     "tv_to_hierarchical": 0.5 * float(np.abs(P - H).sum())})
    return rows
