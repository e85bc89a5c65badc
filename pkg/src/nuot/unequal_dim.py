"""Transport to a one-dimensional target: superlevel sets of c_y, mass
splitting, nestedness, the sufficient condition, conditional densities and
the dual metric.

Costs are embedded, so c_y(x, y) = g(y).x + h(y) is affine in x and the
mu-mass of {c_y >= k} over a grid cell can be integrated in closed form.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._parallel import pmap
from .errors import UnsupportedCostError, ValidationError
from .measures import CostSpec, GridMeasure, SplitFunction

BISECT_TOL = 1e-10
FLAT_TOL = 1e-8          # roots spread wider than this are a flat spot
MASS_SLACK = 1e-12       # cells lighter than this never witness a violation
RULES = ("midpoint", "exact", "auto")


# ---------------------------------------------------------------- profiles

@dataclass(frozen=True)
class _Profile:
    """below(k) = sum over nodes tau < k of c2 (k-tau)^2 + c1 (k-tau) + c0.

    Prefix sums make one evaluation a searchsorted; superlevel mass is total - below.
    """
    tau: np.ndarray
    S: np.ndarray         # (6, n+1) prefix sums of c0, c1, c1 tau, c2, c2 tau, c2 tau^2
    total: float
    lo: float
    hi: float

    def below(self, k: float) -> float:
        j = np.searchsorted(self.tau, k, side="left")
        s0, s1, s1t, s2, s2t, s2tt = self.S[:, j]
        return float(s0 + k * s1 - s1t + k * k * s2 - 2 * k * s2t + s2tt)

    def above(self, k: float) -> float:
        return self.total - self.below(k)


def _check_cost(c: CostSpec):
    if c.kind != "embedded":
        raise UnsupportedCostError(f"{c.kind} cost: superlevel sets need an analytic c_y (embedded cost)")


def _resolve_rule(mu: GridMeasure, rule: str) -> str:
    if rule not in RULES:
        raise ValidationError(f"unknown mass rule {rule!r}")
    if rule == "auto":
        return "exact" if mu.dim <= 2 else "midpoint"
    if rule == "exact" and mu.dim > 2:
        raise ValidationError("exact cell integration is implemented for m <= 2")
    return rule


def _nodes_exact(phi0, p, w):
    """Nodes of below(k) for cells phi = phi0 + p.s, s in [0,1]^m (m <= 2)."""
    p = np.atleast_2d(p)
    base = phi0 + np.minimum(p, 0).sum(1)          # reflect so the slopes are >= 0
    a = np.abs(p)
    if a.shape[1] == 1:
        a = np.hstack([a, np.zeros_like(a)])
    a = -np.sort(-a, 1)                               # a1 >= a2 >= 0
    a1, a2 = a[:, 0], a[:, 1]
    scale = max(float(a1.max(initial=0.0)), 1e-300)
    step = a1 <= 1e-14 * scale
    ramp = ~step & (a2 <= 1e-6 * a1)
    quad = ~step & ~ramp
    T, C0, C1, C2 = [], [], [], []
    # cell where c_y is (numerically) constant: a jump at its value
    b = base[step] + 0.5 * (a1[step] + a2[step])
    T.append(b); C0.append(w[step]); C1.append(0 * b); C2.append(0 * b)
    # one slope negligible: linear ramp on the mid-line
    b = base[ramp] + 0.5 * a2[ramp]
    r = w[ramp] / a1[ramp]
    for off, sg in ((0.0, 1.0), (a1[ramp], -1.0)):
        T.append(b + off); C0.append(0 * b); C1.append(sg * r); C2.append(0 * b)
    # general cell: area under a line, piecewise quadratic
    b = base[quad]
    q = w[quad] / (2 * a1[quad] * a2[quad])
    for off, sg in ((0.0, 1.0), (a1[quad], -1.0), (a2[quad], -1.0), (a1[quad] + a2[quad], 1.0)):
        T.append(b + off); C0.append(0 * b); C1.append(0 * b); C2.append(sg * q)
    return [np.concatenate(v) for v in (T, C0, C1, C2)]


def _profile(mu: GridMeasure, c: CostSpec, y: float, rule: str = "midpoint",
             weights: Optional[np.ndarray] = None) -> _Profile:
    """Distribution of c_y(., y) under mu (or under `weights` on the same cells)."""
    _check_cost(c)
    g, h = c.cy_affine(y)
    g, h = g[0], float(h[0])
    w = mu.masses() if weights is None else np.asarray(weights, float)
    keep = w > 0
    X = mu.centers()[keep]
    w = w[keep]
    phi_c = X @ g + h
    half = 0.5 * mu.widths * g
    ext = np.abs(half).sum()
    if rule == "midpoint":
        T, C0 = phi_c, w
        C1 = C2 = np.zeros_like(w)
    else:
        T, C0, C1, C2 = _nodes_exact(phi_c - half.sum(), 2 * half[None, :] + 0 * X, w)
    o = np.argsort(T, kind="stable")
    T, C0, C1, C2 = T[o], C0[o], C1[o], C2[o]
    cols = np.stack([C0, C1, C1 * T, C2, C2 * T, C2 * T * T])
    S = np.concatenate([np.zeros((6, 1)), np.cumsum(cols, 1)], 1)
    return _Profile(T, S, float(w.sum()), float(phi_c.min() - ext), float(phi_c.max() + ext))


# ---------------------------------------------------------------- level sets

@dataclass(frozen=True)
class LevelSetQuery:
    y: float
    k: float
    mass_ge: float        # mu(X_>=(y, k))
    mass_le: float        # mu(X_<=(y, k))
    hausdorff: float      # length / area of the level set X_1(y, k), slab estimate


def superlevel_mass(mu: GridMeasure, c: CostSpec, y: float, k: float, rule: str = "midpoint") -> float:
    """mu{x : c_y(x, y) >= k}. 'midpoint' counts whole cells by their centre;
    'exact' integrates the piecewise-constant density over the half-space."""
    rule = _resolve_rule(mu, rule)
    return _profile(mu, c, y, rule).above(k)


def _support_area(mu: GridMeasure) -> np.ndarray:
    return np.where(mu.masses() > 0, mu.cell_volume, 0.0)


def level_set_query(mu: GridMeasure, c: CostSpec, y: float, k: float, rule: str = "auto",
                    slab: Optional[float] = None) -> LevelSetQuery:
    """Masses on both sides of the level set and its H^{m-1} size, estimated
    as (area of the support inside a k-slab) / (slab width * |D_x c_y|)."""
    rule = _resolve_rule(mu, rule)
    P = _profile(mu, c, y, rule)
    ge = P.above(k)
    le = P.total - P.above(np.nextafter(k, np.inf)) if rule == "midpoint" else P.total - ge
    gn = float(c.grad_x_cy_norm(y)[0])
    if gn == 0:
        return LevelSetQuery(float(y), float(k), ge, le, float("nan"))
    width = slab if slab is not None else float(mu.widths.min())
    dk = width * gn
    A = _profile(mu, c, y, rule, weights=_support_area(mu))
    area = A.above(k - dk / 2) - A.above(k + dk / 2)
    return LevelSetQuery(float(y), float(k), ge, le, area / width)


# ------------------------------------------------------------- mass split

def _invert(P: _Profile, target: float):
    """k with mu(X_>=(y,k)) = target; (k, flat) where flat flags a plateau."""
    if target <= 0.0:
        return P.hi, False
    if target >= P.total:
        return P.lo, False
    span = max(P.hi - P.lo, 1.0)
    tol = BISECT_TOL * min(span, 1.0) * 0.1

    def search(pred):
        a, b = P.lo - 1.0, P.hi + 1.0          # pred(a) true, pred(b) false
        while b - a > tol:
            m = 0.5 * (a + b)
            if pred(m):
                a = m
            else:
                b = m
        return 0.5 * (a + b)

    eps = 1e-14 * P.total
    k_lo = search(lambda k: P.above(k) > target + eps)     # last k above the target
    k_hi = search(lambda k: P.above(k) >= target - eps)    # last k still reaching it
    return 0.5 * (k_lo + k_hi), bool(k_hi - k_lo > FLAT_TOL * span)


@dataclass(frozen=True)
class SplitResult:
    y: np.ndarray
    k: np.ndarray
    target: np.ndarray
    degenerate: np.ndarray   # bool per y: flat spot spanning the target mass


def y_grid_for(nu: GridMeasure, n: Optional[int] = None) -> np.ndarray:
    """Midpoints of n equal cells on nu's interval (nu's own cells by default)."""
    lo, hi = nu.ranges[0]
    n = nu.cells[0] if n is None else int(n)
    return lo + (np.arange(n) + 0.5) * (hi - lo) / n


def mass_split(mu: GridMeasure, nu: GridMeasure, c: CostSpec, y, rule: str = "auto",
               threads: Optional[int] = None, profiles=None) -> SplitResult:
    """Solve mu(X_>=(y, k)) = nu((y_lo, y)) for k at each y."""
    if nu.dim != 1:
        raise ValidationError("mass splitting needs a 1-D target")
    rule = _resolve_rule(mu, rule)
    ys = np.atleast_1d(np.asarray(y, float))
    targets = nu.cdf_at(ys)
    if profiles is None:
        profiles = pmap(lambda t: _profile(mu, c, t, rule), ys, threads)
    out = pmap(lambda i: _invert(profiles[i], targets[i]), range(ys.size), threads)
    k = np.array([o[0] for o in out])
    flat = np.array([o[1] for o in out], bool)
    return SplitResult(ys, k, targets, flat)


def cy_range(mu: GridMeasure, c: CostSpec, ys) -> tuple:
    """(min, max) of c_y over the support cells (corners included) and the y samples."""
    _check_cost(c)
    g, h = c.cy_affine(ys)
    X = mu.centers()[mu.masses() > 0]
    V = X @ g.T + h[None, :]
    ext = np.abs(0.5 * mu.widths[None, :] * g).sum(1)
    return float((V - ext).min()), float((V + ext).max())


def split_function(mu, nu, c, y_grid, rule="auto", threads=None) -> tuple:
    """mass_split packaged as a SplitFunction on nu's interval; returns (k, degenerate)."""
    r = mass_split(mu, nu, c, y_grid, rule, threads)
    lo, hi = cy_range(mu, c, r.y)
    k = SplitFunction(float(nu.ranges[0, 0]), float(nu.ranges[0, 1]), r.y, r.k, lo, hi, tol=1e-9)
    return k, r.degenerate


# ----------------------------------------------------------- nestedness

@dataclass
class NestednessReport:
    k: SplitFunction
    nested: bool
    violations: list = field(default_factory=list)   # dicts: y, y_prime, cell, x, mass
    n_violating_cells: int = 0
    margins: Optional[list] = None                   # sufficient-condition LHS per y0
    degenerate: Optional[list] = None

    def to_dict(self) -> dict:
        return {"nested": self.nested, "y": self.k.y.tolist(), "k": self.k.values.tolist(),
                "n_violating_cells": self.n_violating_cells, "violations": self.violations,
                "margins": self.margins, "degenerate": self.degenerate}


def _phi_table(mu: GridMeasure, c: CostSpec, ys):
    """c_y at support cell centres for every y: (cells, Ny), with masses and centres."""
    m = mu.masses()
    keep = m > MASS_SLACK
    X = mu.centers()[keep]
    g, h = c.cy_affine(ys)
    return X @ g.T + h[None, :], m[keep], X


def nestedness_check(mu: GridMeasure, nu: GridMeasure, c: CostSpec, y_grid=64, rule: str = "auto",
                     margins: bool = False, M_c: Optional[float] = None, max_witnesses: int = 50,
                     threads: Optional[int] = None) -> NestednessReport:
    """All-pairs inclusion test X_>=(y,k(y)) within X_>=(y',k(y')) for y < y' on the grid.

    Sets are unions of cells (centre membership). A cell that is in the set at
    some y and out of it at a later y' witnesses a violation; checking each
    cell's membership sequence for monotonicity covers every pair at once.
    """
    _check_cost(c)
    ys = y_grid_for(nu, y_grid) if np.isscalar(y_grid) else np.asarray(y_grid, float)
    lo, hi = nu.ranges[0]
    if np.any(np.diff(ys) <= 0) or ys[0] <= lo or ys[-1] >= hi:
        raise ValidationError("y-grid must be sorted and inside the open interval")
    k, flat = split_function(mu, nu, c, ys, rule, threads)
    Phi, w, X = _phi_table(mu, c, ys)
    IN = Phi >= k.values[None, :]
    # first y where the cell is in, then the first later y where it is out
    ever = IN.any(1)
    first_in = np.argmax(IN, 1)
    after = np.arange(ys.size)[None, :] > first_in[:, None]
    out_later = ~IN & after
    bad = ever & out_later.any(1)
    idx = np.flatnonzero(bad)
    order = idx[np.argsort(-w[idx], kind="stable")][:max_witnesses]
    viol = []
    for cidx in order:
        a = int(first_in[cidx])
        b = int(np.argmax(out_later[cidx]))
        viol.append({"y": float(ys[a]), "y_prime": float(ys[b]), "cell": int(cidx),
                     "x": X[cidx].tolist(), "mass": float(w[cidx])})
    rep = NestednessReport(k, not bad.any(), viol, int(bad.sum()),
                           degenerate=[bool(f) for f in flat])
    if margins:
        M = lipschitz_y(mu, c, ys) if M_c is None else float(M_c)
        rep.margins = [suff_condition_margin(mu, c, y0, ys, M, k=k, Phi=(Phi, w)) for y0 in ys]
    return rep


def lipschitz_y(mu: GridMeasure, c: CostSpec, ys) -> float:
    """M_c = sup |c_y| over the support (cell corners) and the y samples."""
    lo, hi = cy_range(mu, c, ys)
    return max(abs(lo), abs(hi))


def suff_condition_margin(mu: GridMeasure, c: CostSpec, y0: float, y_grid, M_c: float,
                          nu: Optional[GridMeasure] = None, k: Optional[SplitFunction] = None,
                          rule: str = "auto", Phi=None) -> float:
    """LHS of the sufficient condition for nestedness at y0 (negative = holds there).

    k(y0) comes from `k` (sampled split function) or from mass splitting against nu.
    k_max(y0, y1, k0) is the largest k whose superlevel set at y1 still contains
    X_>=(y0, k0) cell-wise, i.e. the minimum of c_y(., y1) over that set.
    """
    ys = np.asarray(y_grid, float)
    if k is not None:
        k0 = float(np.interp(y0, k.y, k.values))
        y_lo, y_hi = k.y_lo, k.y_hi
    elif nu is not None:
        k0 = float(mass_split(mu, nu, c, [y0], rule).k[0])
        y_lo, y_hi = nu.ranges[0]
    else:
        raise ValidationError("suff_condition_margin needs nu or a split function")
    y1s = ys[ys > y0 + 1e-15]
    if y1s.size == 0:
        return float("-inf")
    if Phi is None:
        P1, w, _ = _phi_table(mu, c, y1s)
    else:
        P1 = Phi[0][:, ys > y0 + 1e-15]
        w = Phi[1]
    g0, h0 = c.cy_affine(y0)
    X = mu.centers()[mu.masses() > MASS_SLACK]
    S0 = (X @ g0[0] + h0[0]) >= k0
    if not S0.any():
        D = np.zeros(y1s.size)
    else:
        kmax = P1[S0].min(0)
        D = ((P1 >= kmax[None, :]) & ~S0[:, None]).astype(float).T @ w
    if M_c > 1e-12:
        term = M_c * np.exp(-M_c * y1s) / (np.exp(M_c * y_hi) - np.exp(M_c * y_lo))
    else:
        term = np.full(y1s.size, 1.0 / (y_hi - y_lo))
    # the exponential term is increasing in y, so the sup over y in [y0, y1] sits at y1
    return float(np.max(D / (y1s - y0) - term - 1.0))


def estimate_level_constant(mu: GridMeasure, c: CostSpec, ys, n_levels: int = 64,
                            slab: Optional[float] = None, floor: float = 1e-3) -> dict:
    """Estimate C with H^{m-1}(X_1(y,p)) >= C min(mu(X_>=), mu(X_<=)).

    Levels p are sampled inside the c_y range; levels where the smaller side
    carries less than `floor` mass are skipped (both sides of the ratio vanish
    there and the slab estimate is dominated by discretisation).
    """
    best = np.inf
    rows = []
    for y in np.atleast_1d(ys):
        lo, hi = cy_range(mu, c, [y])
        ps = lo + (np.arange(n_levels) + 0.5) * (hi - lo) / n_levels
        for p in ps:
            q = level_set_query(mu, c, y, p, "auto", slab)
            side = min(q.mass_ge, q.mass_le)
            if side < floor or not np.isfinite(q.hausdorff):
                continue
            r = q.hausdorff / side
            rows.append((float(y), float(p), q.hausdorff, side, r))
            best = min(best, r)
    return {"C": float(best), "slab": slab if slab is not None else float(mu.widths.min()),
            "samples": rows}


# ------------------------------------------------- conditional density

def conditional_density(mu: GridMeasure, nu: GridMeasure, c: CostSpec, k: SplitFunction,
                        y: float, x) -> np.ndarray:
    """mu_bar(x) / (nu_bar(y) JT^y(x)) on the level set X_1(y, v'(y)).

    v is the antiderivative of k, so v'' is the central difference of k.
    JT^y(x) = |D_x c_y| / (c_yy(x, y) - v''(y)).
    """
    _check_cost(c)
    if mu.dim != 2:
        raise ValidationError("conditional_density is implemented for m = 2")
    x = np.atleast_2d(np.asarray(x, float))
    kp = np.gradient(k.values, k.y)
    v2 = float(np.interp(y, k.y, kp))
    v1 = float(np.interp(y, k.y, k.values))
    gn = float(c.grad_x_cy_norm(y)[0])
    slack = gn * float(np.linalg.norm(mu.widths))
    off = np.abs(c.c_y(x, y) - v1)
    if np.any(off > slack):
        raise ValidationError(f"x is off the level set X_1(y, v'(y)) by {off.max():.3g} (> one cell)")
    den = c.c_yy(x, y) - v2
    if np.any(den <= 0):
        raise ValidationError("degenerate Jacobian: c_yy - v'' <= 0, v is not a valid potential at y")
    JT = gn / den
    idx = [np.clip(((x[:, i] - mu.ranges[i, 0]) / mu.widths[i]).astype(int), 0, mu.cells[i] - 1)
           for i in range(2)]
    mbar = mu.density[tuple(idx)]
    j = int(np.clip((y - nu.ranges[0, 0]) / nu.widths[0], 0, nu.cells[0] - 1))
    nbar = float(nu.density[j])
    if nbar <= 0:
        raise ValidationError("nu has zero density at y")
    return mbar / (nbar * JT)


# ------------------------------------------------------------ dual metric

def dual_metric(nu0: GridMeasure, nu1: GridMeasure, mu: GridMeasure, c: CostSpec, p=1.0,
                y_grid: int = 256, rule: str = "auto", check: bool = True,
                threads: Optional[int] = None) -> float:
    """||k0 - k1||_{L^p(dy)} by midpoint quadrature; k_i from mass splitting.

    Outside nestedness k is not the derivative of the potential, so both
    models are checked first (check=False skips this).
    """
    if nu0.dim != 1 or nu1.dim != 1:
        raise ValidationError("dual metric needs 1-D targets")
    if not np.allclose(nu0.ranges, nu1.ranges):
        raise ValidationError("targets must live on the same interval")
    p = float(p)
    if p < 1:
        raise ValidationError("p must lie in [1, inf]")
    ys = y_grid_for(nu0, y_grid)
    if check:
        for name, nu in (("nu0", nu0), ("nu1", nu1)):
            if not nestedness_check(mu, nu, c, ys, rule, threads=threads).nested:
                raise ValidationError(f"model (c, mu, {name}) is not nested; see nestedness_check")
    k0 = mass_split(mu, nu0, c, ys, rule, threads).k
    k1 = mass_split(mu, nu1, c, ys, rule, threads).k
    d = np.abs(k0 - k1)
    if np.isinf(p):
        return float(d.max())
    hy = (nu0.ranges[0, 1] - nu0.ranges[0, 0]) / ys.size
    return float((np.sum(d ** p) * hy) ** (1.0 / p))
