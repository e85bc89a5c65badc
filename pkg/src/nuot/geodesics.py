"""Generalized geodesics built from a three-marginal coupling, plus scans.

mu_t is the push-forward of gamma's (x0, x1) part under (1-t) x0 + t x1.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations
from typing import Callable, Optional

import numpy as np

from ._parallel import pmap
from .errors import ValidationError
from .measures import CostSpec, DiscreteMeasure, TriCoupling
from .nu_metric import w_nu, w_nu_disintegration
from .ot_core import is_unique_plan, solve_ot

MERGE_TOL = 1e-12


def merge_atoms(points: np.ndarray, weights: np.ndarray, tol: float = MERGE_TOL):
    """Sum the mass of atoms that coincide up to tol (snapped to a tol-grid)."""
    key = np.round(points / tol)
    _, inv = np.unique(key, axis=0, return_inverse=True)
    inv = inv.ravel()
    w = np.bincount(inv, weights)
    first = np.full(w.size, -1)
    first[inv[::-1]] = np.arange(inv.size)[::-1]
    return points[first], w


@dataclass(frozen=True)
class GeodesicCurve:
    gamma: TriCoupling
    ts: np.ndarray
    measures: tuple

    def at(self, t: float) -> DiscreteMeasure:
        k = int(np.argmin(np.abs(self.ts - t)))
        if abs(self.ts[k] - t) > 1e-12:
            raise KeyError(t)
        return self.measures[k]


def _ts(ts) -> np.ndarray:
    if np.isscalar(ts):
        ts = np.linspace(0.0, 1.0, int(ts))
    ts = np.asarray(ts, float)
    if ts.min() < 0 or ts.max() > 1 or not (np.isclose(ts, 0).any() and np.isclose(ts, 1).any()):
        raise ValidationError("t-grid must lie in [0,1] and contain both endpoints")
    return ts


def geodesic(gamma: TriCoupling, ts=17) -> GeodesicCurve:
    ts = _ts(ts)
    P = gamma.pair("01")
    i, j = np.nonzero(P > 0)
    w = P[i, j]
    X0, X1 = gamma.mu0.points[i], gamma.mu1.points[j]
    out = []
    for t in ts:
        if t == 0.0:
            out.append(gamma.mu0)
        elif t == 1.0:
            out.append(gamma.mu1)
        else:
            pts, ww = merge_atoms((1.0 - t) * X0 + t * X1, w)
            out.append(DiscreteMeasure(pts, ww))
    return GeodesicCurve(gamma, ts, tuple(out))


def geodesic_check(curve: GeodesicCurve, nu: DiscreteMeasure, c: CostSpec = None, method: str = "auto",
                   threads: Optional[int] = None) -> dict:
    """Compare W_nu(mu_s, mu_t) with |t-s| W_nu(mu_0, mu_1) for every grid pair."""
    c = c or CostSpec.quadratic()
    ms, ts = curve.measures, curve.ts
    i0, i1 = int(np.argmin(ts)), int(np.argmax(ts))
    pairs = list(combinations(range(len(ts)), 2))
    sols = pmap(lambda m: solve_ot(nu, m, c.swapped()), ms, threads)
    uq = pmap(is_unique_plan, sols, threads)

    def dist(p):
        a, b = p
        if method == "auto" and uq[a] == uq[b] == "unique":
            # one solve per measure: both plans are unique, so the disintegration is exact
            return w_nu_disintegration(sols[a].coupling, sols[b].coupling, nu, check=False,
                                       opt_values=(sols[a].value, sols[b].value)).value
        return w_nu(ms[a], ms[b], nu, c, method=method).value

    w01 = dist((i0, i1))
    vals = pmap(dist, pairs, threads)
    rows = []
    for (a, b), v in zip(pairs, vals):
        rows.append({"s": float(ts[a]), "t": float(ts[b]), "w_nu": v,
                     "error": abs(v - abs(ts[b] - ts[a]) * w01)})
    max_err = max((r["error"] for r in rows), default=0.0)
    return {"w01": w01, "max_error": max_err, "pass": max_err < 1e-6 * w01 + 1e-9,
            "pairs": rows, "uniqueness": [{"t": float(t), "state": u} for t, u in zip(ts, uq)]}


# ----------------------------------------------------------- functionals

@dataclass(frozen=True)
class FunctionalSpec:
    """kind: 'wass-to-nu' | 'potential' (V) | 'interaction' (W) | 'internal' (U + grid).

    V, W act on (N, m) arrays row-wise; U acts on densities. ``grid`` is
    (ranges, cells) for the internal-energy histogram.
    """
    kind: str
    V: Optional[Callable] = None
    W: Optional[Callable] = None
    U: Optional[Callable] = None
    grid: Optional[tuple] = None
    deposit: str = "cic"
    allowance_const: float = 1.0
    name: str = ""

    def __post_init__(self):
        need = {"potential": "V", "interaction": "W", "internal": "U"}
        if self.kind not in ("wass-to-nu", "potential", "interaction", "internal"):
            raise ValidationError(f"unknown functional kind {self.kind!r}")
        if self.kind in need and getattr(self, need[self.kind]) is None:
            raise ValidationError(f"{self.kind} functional needs {need[self.kind]}")
        if self.kind == "internal" and self.grid is None:
            raise ValidationError("internal energy needs a histogram grid")

    @property
    def h_grid(self) -> float:
        if self.grid is None:
            return 0.0
        R = np.asarray(self.grid[0], float)
        return float(((R[:, 1] - R[:, 0]) / np.asarray(self.grid[1])).max())


def histogram(mu: DiscreteMeasure, ranges, cells, deposit: str = "cic") -> np.ndarray:
    """Density histogram; 'ngp' assigns each atom to its cell, 'cic' splits it
    multilinearly among the neighbouring cell centres (mass beyond the outer
    centres stays in the boundary cell)."""
    R = np.asarray(ranges, float)
    cells = tuple(int(n) for n in cells)
    h = (R[:, 1] - R[:, 0]) / np.array(cells)
    rho = np.zeros(cells)
    u = (mu.points - R[:, 0]) / h          # position in cell units
    if np.any(u < -1e-9) or np.any(u > np.array(cells) + 1e-9):
        raise ValidationError("histogram grid does not cover the measure")
    if deposit == "ngp":
        idx = np.clip(np.floor(u).astype(int), 0, np.array(cells) - 1)
        np.add.at(rho, tuple(idx.T), mu.weights)
    else:
        s = u - 0.5
        lo = np.floor(s).astype(int)
        fr = s - lo
        m = mu.dim
        for corner in range(2 ** m):
            bits = np.array([(corner >> d) & 1 for d in range(m)])
            wt = np.prod(np.where(bits, fr, 1.0 - fr), axis=1) * mu.weights
            idx = np.clip(lo + bits, 0, np.array(cells) - 1)
            np.add.at(rho, tuple(idx.T), wt)
    return rho / np.prod(h)


def evaluate_functional(f: FunctionalSpec, mu: DiscreteMeasure, nu: Optional[DiscreteMeasure] = None,
                        c: Optional[CostSpec] = None) -> float:
    if f.kind == "potential":
        return float(mu.weights @ np.asarray(f.V(mu.points), float))
    if f.kind == "interaction":
        X, w = mu.points, mu.weights
        tot = 0.0
        for s in range(0, X.shape[0], 512):   # chunked N^2 sum
            Z = (X[s:s + 512, None, :] - X[None, :, :]).reshape(-1, X.shape[1])
            Wv = np.asarray(f.W(Z), float).reshape(-1, X.shape[0])
            tot += float(w[s:s + 512] @ Wv @ w)
        return tot
    if f.kind == "wass-to-nu":
        if nu is None:
            raise ValidationError("wass-to-nu needs the reference measure")
        return solve_ot(mu, nu, c or CostSpec.quadratic()).value
    rho = histogram(mu, f.grid[0], f.grid[1], f.deposit)
    R = np.asarray(f.grid[0], float)
    vol = float(np.prod((R[:, 1] - R[:, 0]) / np.asarray(f.grid[1])))
    pos = rho[rho > 0]
    return float(np.asarray(f.U(pos), float).sum() * vol)


def convexity_scan(f: FunctionalSpec, curve: GeodesicCurve, nu: Optional[DiscreteMeasure] = None,
                   c: Optional[CostSpec] = None, threads: Optional[int] = None) -> dict:
    """Second differences of f along the curve (uniform t-grid, >= 9 points)."""
    ts = curve.ts
    if ts.size < 9 or np.abs(np.diff(ts, 2)).max() > 1e-12:
        raise ValidationError("convexity scan needs a uniform t-grid with >= 9 points")
    # for the nu-transport functional the cost to nu is the base cost
    vals = np.array(pmap(lambda m: evaluate_functional(f, m, nu, c), curve.measures, threads))
    d2 = vals[:-2] - 2 * vals[1:-1] + vals[2:]
    allowance = f.allowance_const * f.h_grid if f.kind == "internal" else 0.0
    tol = 1e-6 * float(np.abs(vals).max()) + allowance
    rep = {"kind": f.kind, "name": f.name, "t": ts.tolist(), "f": vals.tolist(),
           "second_difference": [float("nan")] + d2.tolist() + [float("nan")],
           "min_second_difference": float(d2.min()), "tolerance": tol, "allowance": allowance,
           "pass": bool(d2.min() >= -tol)}
    if f.kind == "wass-to-nu":
        w2 = curve.gamma.cross_cost()
        bound = (1 - ts) * vals[0] + ts * vals[-1] - ts * (1 - ts) * w2
        excess = vals - bound
        rep["one_convex_excess"] = float(excess.max())
        rep["one_convex_pass"] = bool(excess.max() <= tol)
        rep["pass"] = rep["pass"] and rep["one_convex_pass"]
    return rep
