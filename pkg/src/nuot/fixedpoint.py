"""Equilibrium strategy measure by fixed-point iteration k -> nu_k -> k~.

nu_k has density exp(-v_k)/Z with v_k the antiderivative of k; k~ splits
mu's mass against nu_k. A fixed point gives the minimiser of transport cost
plus entropy when the model is nested.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ._parallel import pmap
from .errors import ValidationError
from .measures import CostSpec, GridMeasure, SplitFunction, cost_from_dict, cost_to_dict, \
    measure_from_dict, measure_to_dict
from .unequal_dim import _check_cost, _profile, _resolve_rule, cy_range, estimate_level_constant, \
    lipschitz_y, mass_split, nestedness_check

LIMIT_TOL = 1e-8      # |d_hi - 2 d_lo| below this uses the analytic limit
CLAMP_TOL = 1e-9


@dataclass
class FixedPointProblem:
    mu: GridMeasure
    y_lo: float
    y_hi: float
    cost: CostSpec
    n_y: int = 256
    A: Optional[float] = None
    B: Optional[float] = None
    C: Optional[float] = None
    d_lo: Optional[float] = None
    d_hi: Optional[float] = None
    rule: str = "auto"
    _profiles: Optional[list] = field(default=None, repr=False)

    def __post_init__(self):
        _check_cost(self.cost)
        if not self.y_lo < self.y_hi:
            raise ValidationError("need y_lo < y_hi")
        if self.n_y < 2:
            raise ValidationError("need at least 2 y-grid points")
        self.rule = _resolve_rule(self.mu, self.rule)
        b = cost_y_bounds(self)
        if self.d_lo is None:
            self.d_lo = b["d_lo"]
        if self.d_hi is None:
            self.d_hi = b["d_hi"]
        if self.A is None:
            self.A = b["A"]
        if self.B is None:
            m = self.mu.density[self.mu.density > 0]
            self.B = float(m.min())
        if self.C is None:
            self.C = estimate_level_constant(self.mu, self.cost, self.ys[:: max(1, self.n_y // 8)], 32)["C"]
        if self.d_lo > self.d_hi or self.A <= 0 or self.B <= 0 or self.C <= 0:
            raise ValidationError("constants need d_lo <= d_hi and A, B, C > 0")

    @property
    def ys(self) -> np.ndarray:
        return self.y_lo + (np.arange(self.n_y) + 0.5) * self.h

    @property
    def h(self) -> float:
        return (self.y_hi - self.y_lo) / self.n_y

    def profiles(self, threads=None) -> list:
        # the c_y distributions under mu depend only on y: build them once
        if self._profiles is None:
            self._profiles = pmap(lambda y: _profile(self.mu, self.cost, y, self.rule), self.ys, threads)
        return self._profiles

    def split(self, values) -> SplitFunction:
        return SplitFunction(self.y_lo, self.y_hi, self.ys, values, self.d_lo, self.d_hi, CLAMP_TOL)

    def zero(self) -> SplitFunction:
        return self.split(np.clip(np.zeros(self.n_y), self.d_lo, self.d_hi))

    @staticmethod
    def from_dict(d: dict) -> "FixedPointProblem":
        mu = d["mu"]
        mu = measure_from_dict(mu, renormalize=bool(d.get("renormalize", False))) if isinstance(mu, dict) else mu
        if not isinstance(mu, GridMeasure):
            raise ValidationError("fixed-point problems need a grid measure mu")
        lo, hi = d["interval"]
        kw = {k: d[k] for k in ("n_y", "A", "B", "C", "d_lo", "d_hi", "rule") if d.get(k) is not None}
        return FixedPointProblem(mu, float(lo), float(hi), cost_from_dict(d["cost"]), **kw)

    def to_dict(self) -> dict:
        return {"mu": measure_to_dict(self.mu), "interval": [self.y_lo, self.y_hi],
                "cost": cost_to_dict(self.cost), "n_y": self.n_y, "A": self.A, "B": self.B,
                "C": self.C, "d_lo": self.d_lo, "d_hi": self.d_hi, "rule": self.rule}


def cost_y_bounds(problem) -> dict:
    """min/max of c_y and max |D_x c_y| over the support and a y sample.

    c_y is affine in x, so its extremes over a cell sit at corners; in y we
    sample 4 n_y + 1 points, and `y_spacing` is the resulting sampling gap.
    """
    mu, c = problem.mu, problem.cost
    ys = np.linspace(problem.y_lo, problem.y_hi, 4 * problem.n_y + 1)
    lo, hi = cy_range(mu, c, ys)
    A = float(c.grad_x_cy_norm(ys).max())
    return {"d_lo": lo, "d_hi": hi, "A": A, "y_spacing": float(ys[1] - ys[0]),
            "x_spacing": mu.widths.tolist(), "degenerate": bool(hi - lo < 1e-14)}


# ----------------------------------------------------------------- maps

def potential(k: SplitFunction) -> np.ndarray:
    """v_k at the grid points: cumulative trapezoid from y_lo (k held flat on the first half cell)."""
    first = k.values[0] * (k.y[0] - k.y_lo)
    return first + np.concatenate([[0.0], np.cumsum(0.5 * (k.values[1:] + k.values[:-1]) * np.diff(k.y))])


def k_to_density(k: SplitFunction) -> GridMeasure:
    v = potential(k)
    e = np.exp(-(v - v.min()))
    dens = e / (e.sum() * k.h)                    # midpoint normalisation
    return GridMeasure([[k.y_lo, k.y_hi]], [k.y.size], dens, renormalize=True)


def nu_to_ktilde(nu: GridMeasure, problem: FixedPointProblem, threads=None) -> SplitFunction:
    if nu.dim != 1 or not np.allclose(nu.ranges[0], [problem.y_lo, problem.y_hi]):
        raise ValidationError("nu must be a 1-D grid on the problem interval")
    r = mass_split(problem.mu, nu, problem.cost, problem.ys, problem.rule, threads,
                   profiles=problem.profiles(threads))
    k = r.k
    if np.any(k < problem.d_lo - CLAMP_TOL) or np.any(k > problem.d_hi + CLAMP_TOL):
        raise ValidationError("mass split left [d_lo, d_hi]: the bounds are not certified")
    return problem.split(np.clip(k, problem.d_lo, problem.d_hi))


def apply_F(k: SplitFunction, problem: FixedPointProblem, threads=None) -> SplitFunction:
    return nu_to_ktilde(k_to_density(k), problem, threads)


# ---------------------------------------------------------- contraction

def _g(a: float, t):
    """(e^{a t} - 1)/a, with its limit t as a -> 0."""
    t = np.asarray(t, float)
    if abs(a) < LIMIT_TOL:
        return t
    return np.expm1(a * t) / a


def contraction_factor(problem: FixedPointProblem) -> dict:
    """The contraction constant, evaluated literally with midpoint quadrature for int H.

    The |d_hi - 2 d_lo| in the prefactor is folded into H so that the
    degenerate case d_hi = 2 d_lo uses the finite limit.
    """
    dl, dh, A, B, C = problem.d_lo, problem.d_hi, problem.A, problem.B, problem.C
    L = problem.y_hi - problem.y_lo
    if dl == 0 or dh == 0:
        raise ValidationError(f"degenerate bounds d_lo={dl}, d_hi={dh}: the factor divides by both")
    a = dh - 2 * dl
    t = problem.ys - problem.y_lo
    h1 = np.abs(_g(a, t)) / np.abs(-np.expm1(-dh * t))
    h2 = np.abs(np.exp(a * t) * _g(a, L - t)) / np.abs(np.exp(-dh * t) - np.exp(-dh * L))
    Hs = np.maximum(h1, h2)                       # this is H(y) / |d_hi - 2 d_lo|
    pre = 2 * A * dh ** 3 * np.expm1(-dl * L) ** 2 / (B * C * dl ** 2 * np.expm1(-dh * L) ** 2)
    integral = float(Hs.sum() * problem.h)
    factor = float(pre * integral)
    warn = []
    if dl <= 0 < dh:
        warn.append("d_lo <= 0 < d_hi: the lower bounds on nu_k behind the factor assume d_lo > 0; "
                    "evaluated literally with absolute values")
    return {"factor": factor, "contracts": factor < 1, "prefactor": float(pre),
            "integral_H": integral * (abs(a) if abs(a) >= LIMIT_TOL else 1.0),
            "limit_used": abs(a) < LIMIT_TOL, "constants": {"A": A, "B": B, "C": C, "d_lo": dl, "d_hi": dh},
            "H": [{"y": float(y), "H": float(v * (abs(a) if abs(a) >= LIMIT_TOL else 1.0))}
                  for y, v in zip(problem.ys, Hs)],
            "warnings": warn}


# ------------------------------------------------------------ iteration

@dataclass
class IterationTrace:
    ks: list
    steps: list
    ratios: list
    converged: bool
    residual: float = float("nan")
    factor: Optional[float] = None
    warnings: list = field(default_factory=list)

    @property
    def k_fixed(self) -> SplitFunction:
        return self.ks[-1]

    def rows(self) -> list:
        return [{"iter": i + 1, "step_L1": s, "ratio": (self.ratios[i - 1] if i > 0 else float("nan"))}
                for i, s in enumerate(self.steps)]


def foc_residual(k: SplitFunction, problem: FixedPointProblem, threads=None) -> float:
    """max |v + log nu_bar - median| with v the potential of F[k] and nu_bar the density of nu_k."""
    nu = k_to_density(k)
    kt = apply_F(k, problem, threads)
    r = potential(kt) + np.log(nu.density)
    return float(np.abs(r - np.median(r)).max())


def iterate(problem: FixedPointProblem, k0: Optional[SplitFunction] = None, tol: float = 1e-9,
            max_iter: int = 200, threads=None, check_factor: bool = True) -> IterationTrace:
    k = problem.zero() if k0 is None else k0
    if k.y.size != problem.n_y or not np.allclose(k.y, problem.ys):
        raise ValidationError("k0 must live on the problem's y-grid")
    warn = []
    factor = None
    if check_factor:
        try:
            cf = contraction_factor(problem)
            factor = cf["factor"]
            warn += cf["warnings"]
            if not cf["contracts"]:
                warn.append(f"contraction factor {factor:.4g} >= 1: convergence not certified")
        except ValidationError as e:
            warn.append(str(e))
    for w in warn:
        warnings.warn(w, RuntimeWarning, stacklevel=2)
    ks, steps, ratios = [k], [], []
    converged = False
    for _ in range(max_iter):
        kn = apply_F(k, problem, threads)
        s = kn.l1(k)
        if steps:
            ratios.append(s / steps[-1] if steps[-1] > 0 else 0.0)
        steps.append(s)
        ks.append(kn)
        k = kn
        if s < tol:
            converged = True
            break
    tr = IterationTrace(ks, steps, ratios, converged, factor=factor, warnings=warn)
    if converged:
        tr.residual = foc_residual(k, problem, threads)
    else:
        tr.warnings.append(f"no convergence in {max_iter} iterations")
    return tr


def nestedness_at_solution(problem: FixedPointProblem, k_fixed: SplitFunction, y_grid: int = 64,
                           threads=None) -> dict:
    """Check the nestedness hypothesis a posteriori at nu_{k_fixed}."""
    nu = k_to_density(k_fixed)
    M = lipschitz_y(problem.mu, problem.cost, problem.ys)
    rep = nestedness_check(problem.mu, nu, problem.cost, y_grid, problem.rule, margins=True, M_c=M,
                           threads=threads)
    margins = np.array(rep.margins, float)
    suff = bool(np.all(margins < 0))
    return {"nested": rep.nested, "sufficient_condition": suff, "max_margin": float(margins.max()),
            "consistent": (not suff) or rep.nested, "M_c": M, "report": rep}
