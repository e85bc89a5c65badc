"""Layerwise-Wasserstein distance, its W_nu counterpart for a segment nu,
and the discrete Knothe-Rosenblatt rearrangement in the plane."""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Union

import numpy as np

from ._parallel import pmap
from .errors import ValidationError
from .measures import CostSpec, Curve, DiscreteMeasure, GridMeasure, grid_to_discrete
from .nu_metric import w_nu
from .ot_core import solve_ot, w2_sq_1d

GROUP_TOL = 1e-12


@dataclass(frozen=True)
class LayeredDecomposition:
    """Vertical marginal (atoms xs with masses), its CDF, and per-column conditionals."""
    xs: np.ndarray
    masses: np.ndarray
    cdf: np.ndarray
    conditionals: tuple     # DiscreteMeasure on R^{m-1}, one per column

    def column(self, l) -> np.ndarray:
        """Column whose CDF interval (F(c-), F(c)] contains level l."""
        return np.minimum(np.searchsorted(self.cdf, l, side="left"), self.xs.size - 1)


def _as_discrete(mu) -> DiscreteMeasure:
    return grid_to_discrete(mu) if isinstance(mu, GridMeasure) else mu


def decompose(mu) -> LayeredDecomposition:
    mu = _as_discrete(mu)
    if mu.dim < 2:
        raise ValidationError("layerwise decomposition needs dimension >= 2")
    order = np.lexsort(mu.points.T[::-1])
    x1 = mu.points[order, 0]
    brk = np.flatnonzero(np.diff(x1) > GROUP_TOL) + 1
    groups = np.split(order, brk)
    xs = np.array([mu.points[g[0], 0] for g in groups])
    masses = np.array([mu.weights[g].sum() for g in groups])
    cdf = np.cumsum(masses)
    cdf[-1] = 1.0
    conds = tuple(DiscreteMeasure(mu.points[g, 1:], mu.weights[g] / mu.weights[g].sum()) for g in groups)
    return LayeredDecomposition(xs, masses, cdf, conds)


def _w2sq(a: DiscreteMeasure, b: DiscreteMeasure) -> float:
    if a.dim == 1:
        return w2_sq_1d(a.points[:, 0], a.weights, b.points[:, 0], b.weights)
    return solve_ot(a, b).value


@dataclass(frozen=True)
class LayerwiseResult:
    value: float
    vertical_sq: float
    layer_sq: float
    table: list


def layerwise_distance(mu0, mu1, layers: Union[int, str, None] = 64,
                       threads: Optional[int] = None) -> LayerwiseResult:
    """d_LW^2 = W2^2(vertical marginals) + int_0^1 W2^2(layer conditionals) dl.

    layers=int: midpoint rule on that many levels; layers='exact': integrate
    over the common refinement of the two vertical CDFs.
    """
    d0, d1 = decompose(mu0), decompose(mu1)
    vert = w2_sq_1d(d0.xs, d0.masses, d1.xs, d1.masses)
    if layers in (None, "exact"):
        lv = np.union1d(d0.cdf, d1.cdf)
        lo = np.concatenate([[0.0], lv[:-1]])
        keep = lv > lo
        lv, lo = lv[keep], lo[keep]
        mids, wts = 0.5 * (lo + lv), lv - lo
    else:
        L = int(layers)
        if L < 1:
            raise ValidationError("need at least one layer")
        mids = (np.arange(L) + 0.5) / L
        wts = np.full(L, 1.0 / L)
    c0, c1 = d0.column(mids), d1.column(mids)
    pairs = sorted(set(zip(c0.tolist(), c1.tolist())))
    vals = dict(zip(pairs, pmap(lambda p: _w2sq(d0.conditionals[p[0]], d1.conditionals[p[1]]), pairs, threads)))
    w = np.array([vals[(a, b)] for a, b in zip(c0.tolist(), c1.tolist())])
    layer = float(wts @ w)
    table = [{"l": float(l), "weight": float(q), "col0": int(a), "col1": int(b), "w2sq": float(x)}
             for l, q, a, b, x in zip(mids, wts, c0, c1, w)]
    return LayerwiseResult(float(np.sqrt(max(vert + layer, 0.0))), float(vert), layer, table)


# ------------------------------------------------------------ equivalence

def _segment_axis_check(curve: Curve):
    if curve.kind != "segment":
        raise ValidationError("reference curve must be a line segment")
    d = np.asarray(curve.params["direction"], float)
    if d[0] == 0 or np.abs(d[1:]).max(initial=0.0) > 1e-12:
        raise ValidationError("segment must be parallel to the x1 axis (rotate first)")


def rotate_to_x1(mu: DiscreteMeasure, direction) -> DiscreteMeasure:
    """Isometry (Householder reflection) taking `direction` onto +e1."""
    d = np.asarray(direction, float)
    d = d / np.linalg.norm(d)
    e = np.zeros_like(d)
    e[0] = 1.0
    v = d - e
    if np.linalg.norm(v) < 1e-15:
        return mu
    v /= np.linalg.norm(v)
    H = np.eye(d.size) - 2.0 * np.outer(v, v)
    return DiscreteMeasure(mu.points @ H.T, mu.weights)


def layerwise_equivalence_check(mu0, mu1, segment: Curve, nu_density: GridMeasure,
                                layers: Union[int, str, None] = 64, tol: float = 0.02,
                                method: str = "lp") -> dict:
    """W_nu (segment reference, embedded cost) against d_LW on the same data."""
    _segment_axis_check(segment)
    if nu_density.dim != 1:
        raise ValidationError("nu_density must be a 1-D grid")
    m0, m1 = _as_discrete(mu0), _as_discrete(mu1)
    nu = grid_to_discrete(nu_density)
    W = w_nu(m0, m1, nu, CostSpec.embedded(segment, "sq"), method=method)
    d = layerwise_distance(m0, m1, layers)
    gap = abs(W.value - d.value)
    rel = gap / d.value if d.value > 0 else (0.0 if gap == 0 else float("inf"))
    return {"w_nu": W.value, "d_lw": d.value, "abs_gap": gap, "rel_gap": rel,
            "pass": bool(rel < tol or gap < 1e-12), "uniqueness": list(W.uniqueness)}


# ------------------------------------------------------------ KR in 2-D

def knothe_rosenblatt_2d(mu0: DiscreteMeasure, mu1: DiscreteMeasure, tie_policy: str = "error"):
    """Discrete KR rearrangement between equal-size uniform clouds in R^2.

    Returns (perm, cost) with perm[i] the index in mu1 matched to atom i of mu0.
    tie_policy='error' refuses repeated x1 values; 'lex' ranks ties by x2.
    """
    if mu0.dim != 2 or mu1.dim != 2:
        raise ValidationError("knothe_rosenblatt_2d needs planar clouds")
    n = mu0.size
    if mu1.size != n:
        raise ValidationError("clouds must have equal size")
    if np.abs(mu0.weights - 1.0 / n).max() > 1e-12 or np.abs(mu1.weights - 1.0 / n).max() > 1e-12:
        raise ValidationError("clouds must carry uniform weights")
    orders = []
    for mu in (mu0, mu1):
        o = np.lexsort((mu.points[:, 1], mu.points[:, 0]))
        x1 = mu.points[o, 0]
        ties = np.diff(x1) <= GROUP_TOL
        if ties.any():
            if tie_policy == "error":
                raise ValidationError("repeated x1 coordinates: jitter the cloud or pass tie_policy='lex'")
            x2 = mu.points[o, 1]
            if np.any(ties & (np.abs(np.diff(x2)) <= GROUP_TOL)):
                raise ValidationError("repeated points within a tie group")
        orders.append(o)
    perm = np.empty(n, int)
    perm[orders[0]] = orders[1]
    cost = float(((mu0.points - mu1.points[perm]) ** 2).sum(1).mean())
    return perm, cost
