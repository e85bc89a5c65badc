"""Measures, grids, costs and couplings, plus their JSON/CSV formats.

Everything here is immutable after construction: arrays are copied and
flagged read-only so objects can be shared across worker threads.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Optional, Sequence

import numpy as np

from .errors import UnsupportedCostError, ValidationError

MASS_TOL = 1e-12          # invariant on stored weights
GRID_MASS_TOL = 1e-10
LOAD_MASS_TOL = 1e-9      # silently renormalized below this, error above
PRUNE_TOL = 1e-15
RENORM_EPS = 1e-14        # masses this close to 1 are kept bit-for-bit


def _frozen(a, dtype=float):
    a = np.array(a, dtype=dtype, copy=True)
    a.setflags(write=False)
    return a


# ---------------------------------------------------------------- measures

@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point cloud in R^m. points has shape (N, m)."""
    points: np.ndarray
    weights: np.ndarray

    def __init__(self, points, weights=None, renormalize: bool = False, prune: bool = True):
        P = np.asarray(points, dtype=float)
        if P.ndim == 1:
            P = P[:, None]
        if P.ndim != 2 or P.shape[0] == 0:
            raise ValidationError("points must be a non-empty (N, m) array")
        if weights is None:
            w = np.full(P.shape[0], 1.0 / P.shape[0])
        else:
            w = np.asarray(weights, dtype=float).ravel()
        if w.shape[0] != P.shape[0]:
            raise ValidationError(f"{P.shape[0]} points but {w.shape[0]} weights")
        if not (np.all(np.isfinite(P)) and np.all(np.isfinite(w))):
            raise ValidationError("non-finite coordinate or weight")
        if np.any(w < 0):
            raise ValidationError(f"negative weight at index {int(np.argmin(w))}")
        if prune:
            keep = w >= PRUNE_TOL
            P, w = P[keep], w[keep]
        s = w.sum()
        if s <= 0:
            raise ValidationError("measure has zero mass")
        if abs(s - 1.0) > LOAD_MASS_TOL and not renormalize:
            raise ValidationError(f"total mass {s!r} differs from 1 (use renormalize)")
        if abs(s - 1.0) > RENORM_EPS:
            w = w / s
        object.__setattr__(self, "points", _frozen(P))
        object.__setattr__(self, "weights", _frozen(w))

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def size(self) -> int:
        return self.points.shape[0]

    def __len__(self):
        return self.size

    def mean(self):
        return self.weights @ self.points

    def translate(self, shift) -> "DiscreteMeasure":
        return DiscreteMeasure(self.points + np.asarray(shift, float), self.weights)

    def __repr__(self):
        return f"DiscreteMeasure(n={self.size}, dim={self.dim})"


@dataclass(frozen=True)
class GridMeasure:
    """Piecewise-constant density on a rectangular grid (row-major cells)."""
    ranges: np.ndarray    # (m, 2)
    cells: tuple
    density: np.ndarray   # shape == cells

    def __init__(self, ranges, cells, density, renormalize: bool = False):
        R = np.asarray(ranges, dtype=float).reshape(-1, 2)
        cells = tuple(int(c) for c in np.atleast_1d(cells))
        if len(cells) != R.shape[0]:
            raise ValidationError("ranges and cells disagree on dimension")
        if any(c < 1 for c in cells):
            raise ValidationError("cell counts must be >= 1")
        if np.any(R[:, 1] <= R[:, 0]):
            raise ValidationError("each range needs lo < hi")
        d = np.asarray(density, dtype=float)
        if d.size != int(np.prod(cells)):
            raise ValidationError(f"density has {d.size} values, expected {int(np.prod(cells))}")
        d = d.reshape(cells)
        if not np.all(np.isfinite(d)) or np.any(d < 0):
            raise ValidationError("densities must be finite and >= 0")
        vol = float(np.prod((R[:, 1] - R[:, 0]) / np.array(cells)))
        mass = d.sum() * vol
        if mass <= 0:
            raise ValidationError("grid has zero mass")
        if abs(mass - 1.0) > LOAD_MASS_TOL and not renormalize:
            raise ValidationError(f"grid mass {mass!r} differs from 1 (use renormalize)")
        if abs(mass - 1.0) > RENORM_EPS:
            d = d / mass
        object.__setattr__(self, "ranges", _frozen(R))
        object.__setattr__(self, "cells", cells)
        object.__setattr__(self, "density", _frozen(d))

    @property
    def dim(self) -> int:
        return len(self.cells)

    @property
    def widths(self) -> np.ndarray:
        return (self.ranges[:, 1] - self.ranges[:, 0]) / np.array(self.cells)

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.widths))

    def axis_centers(self, i: int) -> np.ndarray:
        lo, hi = self.ranges[i]
        n = self.cells[i]
        return lo + (np.arange(n) + 0.5) * (hi - lo) / n

    def axis_edges(self, i: int) -> np.ndarray:
        lo, hi = self.ranges[i]
        return np.linspace(lo, hi, self.cells[i] + 1)

    def centers(self) -> np.ndarray:
        """Cell midpoints, (Ncells, m), row-major order."""
        axes = [self.axis_centers(i) for i in range(self.dim)]
        mesh = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in mesh], axis=1)

    def masses(self) -> np.ndarray:
        return self.density.ravel() * self.cell_volume

    def cdf_at(self, y) -> np.ndarray:
        """CDF of a 1-D grid measure (exact for the piecewise-constant density)."""
        if self.dim != 1:
            raise ValidationError("cdf_at needs a 1-D grid")
        edges = self.axis_edges(0)
        cm = np.concatenate([[0.0], np.cumsum(self.masses())])
        return np.clip(np.interp(np.asarray(y, float), edges, cm), 0.0, 1.0)

    def __repr__(self):
        return f"GridMeasure(cells={self.cells})"


def grid_to_discrete(g: GridMeasure, drop_empty: bool = True) -> DiscreteMeasure:
    """One atom per cell midpoint with weight density * volume."""
    pts = g.centers()
    w = g.masses()
    if drop_empty:
        keep = w > 0
        pts, w = pts[keep], w[keep]
    return DiscreteMeasure(pts, w)


# ------------------------------------------------------------------ curves

@dataclass(frozen=True)
class Curve:
    """Curve f: R -> R^m with analytic first and second derivatives."""
    kind: str
    params: dict = field(default_factory=dict)
    range: Optional[tuple] = None

    def __post_init__(self):
        p = self.params
        if self.kind == "segment":
            o = np.asarray(p["origin"], float)
            d = np.asarray(p["direction"], float)
            if o.shape != d.shape or o.ndim != 1:
                raise ValidationError("segment origin/direction must be equal-length vectors")
        elif self.kind == "arc":
            if len(p.get("center", [0, 0])) != 2:
                raise ValidationError("arc curves live in R^2")
            if float(p.get("radius", 1.0)) <= 0:
                raise ValidationError("arc radius must be positive")
        elif self.kind == "poly":
            C = np.asarray(p["coeffs"], float)
            if C.ndim != 2 or C.shape[0] < 2:
                raise ValidationError("poly coeffs must be a list of >= 2 vectors")
        else:
            raise ValidationError(f"unknown curve kind {self.kind!r}")

    @property
    def dim(self) -> int:
        if self.kind == "segment":
            return len(self.params["origin"])
        if self.kind == "arc":
            return 2
        return len(self.params["coeffs"][0])

    def _deriv(self, y, order: int) -> np.ndarray:
        y = np.atleast_1d(np.asarray(y, float))
        p = self.params
        if self.kind == "segment":
            o = np.asarray(p["origin"], float)
            d = np.asarray(p["direction"], float)
            if order == 0:
                return o + y[:, None] * d
            if order == 1:
                return np.broadcast_to(d, (y.size, d.size)).copy()
            return np.zeros((y.size, d.size))
        if self.kind == "arc":
            c = np.asarray(p.get("center", [0.0, 0.0]), float)
            r = float(p.get("radius", 1.0))
            cs, sn = np.cos(y), np.sin(y)
            if order == 0:
                return c + r * np.stack([cs, sn], 1)
            if order == 1:
                return r * np.stack([-sn, cs], 1)
            return -r * np.stack([cs, sn], 1)
        C = np.asarray(p["coeffs"], float)
        out = np.zeros((y.size, C.shape[1]))
        for k in range(order, C.shape[0]):
            fac = math.factorial(k) / math.factorial(k - order)
            out += fac * np.outer(y ** (k - order), C[k])
        return out

    def f(self, y):
        return self._deriv(y, 0)

    def df(self, y):
        return self._deriv(y, 1)

    def d2f(self, y):
        return self._deriv(y, 2)

    def check(self, lo: float, hi: float, n: int = 2001):
        """Sampling checks: injective on [lo, hi] and Df of full rank."""
        ys = np.linspace(lo, hi, n)
        F = self.f(ys)
        if np.min(np.linalg.norm(self.df(ys), axis=1)) <= 1e-12:
            raise ValidationError("curve derivative vanishes (rank deficient)")
        # non-adjacent samples closer than 1e-9, or than half the smallest
        # sample step, mean the curve comes back on itself
        if n <= 3000:
            D = np.sqrt(((F[:, None, :] - F[None, :, :]) ** 2).sum(-1))
            idx = np.arange(n)
            D[np.abs(idx[:, None] - idx[None, :]) <= 2] = np.inf
            step = np.linalg.norm(np.diff(F, axis=0), axis=1).min()
            if D.min() < max(1e-9, 0.5 * step):
                i, j = np.unravel_index(np.argmin(D), D.shape)
                raise ValidationError(f"curve not injective: f({ys[i]}) ~ f({ys[j]})")


# ------------------------------------------------------------------- costs

@dataclass(frozen=True)
class CostSpec:
    """quadratic |x-y|^2, embedded (|x-f(y)|^2 or -x.f(y)), or a tabulated matrix.

    For embedded costs the second argument lives in the 1-D parameter space.
    """
    kind: str = "quadratic"
    curve: Optional[Curve] = None
    form: str = "sq"
    table: Optional[np.ndarray] = None
    swap: bool = False      # evaluate as c(b, a): reference measure in the rows

    def __post_init__(self):
        if self.kind not in ("quadratic", "embedded", "tabulated"):
            raise ValidationError(f"unknown cost type {self.kind!r}")
        if self.kind == "embedded":
            if self.curve is None:
                raise ValidationError("embedded cost needs a curve")
            if self.form not in ("sq", "dot"):
                raise ValidationError("embedded form must be 'sq' or 'dot'")
            if self.curve.range is not None:
                self.curve.check(*self.curve.range)
        if self.kind == "tabulated":
            if self.table is None:
                raise ValidationError("tabulated cost needs a matrix")
            object.__setattr__(self, "table", _frozen(self.table))

    @staticmethod
    def quadratic() -> "CostSpec":
        return CostSpec("quadratic")

    @staticmethod
    def embedded(curve: Curve, form: str = "sq") -> "CostSpec":
        return CostSpec("embedded", curve=curve, form=form)

    @staticmethod
    def segment(origin, direction, form: str = "sq", range=None) -> "CostSpec":
        return CostSpec.embedded(Curve("segment", {"origin": list(origin), "direction": list(direction)},
                                       range=range), form)

    def swapped(self) -> "CostSpec":
        """Same cost with its arguments exchanged (for plans with nu in the rows)."""
        if self.kind == "quadratic":
            return self
        return CostSpec(self.kind, self.curve, self.form, self.table, not self.swap)

    def matrix(self, a: DiscreteMeasure, b: DiscreteMeasure) -> np.ndarray:
        """Entry (i, j) = c(a_i, b_j)."""
        if self.swap:
            return self.swapped().matrix(b, a).T
        X = a.points
        if self.kind == "tabulated":
            if self.table.shape != (a.size, b.size):
                raise ValidationError(f"tabulated cost is {self.table.shape}, need {(a.size, b.size)}")
            return np.array(self.table)
        if self.kind == "quadratic":
            if a.dim != b.dim:
                raise ValidationError(f"dimension mismatch {a.dim} vs {b.dim}")
            return ((X[:, None, :] - b.points[None, :, :]) ** 2).sum(-1)
        if b.dim != 1:
            raise ValidationError("embedded cost: second measure must live in R^1")
        if a.dim != self.curve.dim:
            raise ValidationError(f"curve lives in R^{self.curve.dim}, points in R^{a.dim}")
        F = self.curve.f(b.points[:, 0])
        if self.form == "dot":
            return -X @ F.T
        return ((X[:, None, :] - F[None, :, :]) ** 2).sum(-1)

    # -- y-derivatives (embedded only); c_y(., y) is affine in x: g(y).x + h(y)
    def _need_y(self):
        if self.kind != "embedded":
            raise UnsupportedCostError(f"{self.kind} cost has no analytic y-derivative")

    def cy_affine(self, y):
        """(g, h) with c_y(x, y) = g(y).x + h(y); g: (Ny, m), h: (Ny,)."""
        self._need_y()
        y = np.atleast_1d(np.asarray(y, float))
        df = self.curve.df(y)
        if self.form == "dot":
            return -df, np.zeros(y.size)
        f = self.curve.f(y)
        return -2.0 * df, 2.0 * (f * df).sum(1)

    def c_y(self, x, y) -> np.ndarray:
        """c_y at points x (N, m) for scalar y, or all pairs if y is an array -> (N, Ny)."""
        g, h = self.cy_affine(y)
        x = np.atleast_2d(np.asarray(x, float))
        out = x @ g.T + h[None, :]
        return out[:, 0] if np.ndim(y) == 0 else out

    def c_yy(self, x, y: float) -> np.ndarray:
        self._need_y()
        x = np.atleast_2d(np.asarray(x, float))
        d2 = self.curve.d2f(y)[0]
        if self.form == "dot":
            return -x @ d2
        df = self.curve.df(y)[0]
        f = self.curve.f(y)[0]
        return -2.0 * x @ d2 + 2.0 * (df @ df + f @ d2)

    def grad_x_cy_norm(self, y) -> np.ndarray:
        g, _ = self.cy_affine(y)
        return np.linalg.norm(g, axis=1)


# --------------------------------------------------------------- couplings

@dataclass(frozen=True)
class Potentials:
    u: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class Coupling:
    """Sparse plan between a (rows) and b (cols)."""
    rows: np.ndarray
    cols: np.ndarray
    mass: np.ndarray
    shape: tuple
    cost: float = float("nan")
    a: Optional[DiscreteMeasure] = None
    b: Optional[DiscreteMeasure] = None
    cost_spec: Optional[CostSpec] = None

    def __post_init__(self):
        object.__setattr__(self, "rows", _frozen(self.rows, int))
        object.__setattr__(self, "cols", _frozen(self.cols, int))
        object.__setattr__(self, "mass", _frozen(self.mass))

    def dense(self) -> np.ndarray:
        P = np.zeros(self.shape)
        np.add.at(P, (self.rows, self.cols), self.mass)
        return P

    def row_sums(self):
        return np.bincount(self.rows, self.mass, minlength=self.shape[0])

    def col_sums(self):
        return np.bincount(self.cols, self.mass, minlength=self.shape[1])

    def marginal_error(self) -> float:
        if self.a is None or self.b is None:
            return float("nan")
        return max(np.abs(self.row_sums() - self.a.weights).max(),
                   np.abs(self.col_sums() - self.b.weights).max())

    @staticmethod
    def from_dense(P, **kw) -> "Coupling":
        r, c = np.nonzero(P > 0)
        return Coupling(r, c, P[r, c], P.shape, **kw)


@dataclass(frozen=True)
class TriCoupling:
    """Sparse mass on index triples (k, i, j) over (nu, mu0, mu1)."""
    k: np.ndarray
    i: np.ndarray
    j: np.ndarray
    mass: np.ndarray
    nu: DiscreteMeasure
    mu0: DiscreteMeasure
    mu1: DiscreteMeasure

    def __post_init__(self):
        for name in ("k", "i", "j"):
            object.__setattr__(self, name, _frozen(getattr(self, name), int))
        object.__setattr__(self, "mass", _frozen(self.mass))

    @property
    def shape(self):
        return (self.nu.size, self.mu0.size, self.mu1.size)

    def marginals(self):
        n, a, b = self.shape
        return (np.bincount(self.k, self.mass, minlength=n),
                np.bincount(self.i, self.mass, minlength=a),
                np.bincount(self.j, self.mass, minlength=b))

    def marginal_error(self) -> float:
        m = self.marginals()
        return max(np.abs(m[0] - self.nu.weights).max(), np.abs(m[1] - self.mu0.weights).max(),
                   np.abs(m[2] - self.mu1.weights).max())

    def pair(self, which: str) -> np.ndarray:
        """Dense two-fold marginal: 'y0' (nu x mu0), 'y1' (nu x mu1) or '01' (mu0 x mu1)."""
        n, a, b = self.shape
        idx = {"y0": (self.k, self.i, (n, a)), "y1": (self.k, self.j, (n, b)),
               "01": (self.i, self.j, (a, b))}[which]
        P = np.zeros(idx[2])
        np.add.at(P, (idx[0], idx[1]), self.mass)
        return P

    def cross_cost(self) -> float:
        d = self.mu0.points[self.i] - self.mu1.points[self.j]
        return float(self.mass @ (d * d).sum(1))


@dataclass(frozen=True)
class SplitFunction:
    """k: [y_lo, y_hi] -> [d_lo, d_hi] sampled on a strictly increasing grid."""
    y_lo: float
    y_hi: float
    y: np.ndarray
    values: np.ndarray
    d_lo: float
    d_hi: float
    tol: float = 1e-9

    def __post_init__(self):
        y = _frozen(self.y)
        v = _frozen(self.values)
        if y.shape != v.shape or y.ndim != 1:
            raise ValidationError("split function grid/values shape mismatch")
        if np.any(np.diff(y) <= 0):
            raise ValidationError("split function grid must be strictly increasing")
        if self.d_lo > self.d_hi:
            raise ValidationError("need d_lo <= d_hi")
        if np.any(v < self.d_lo - self.tol) or np.any(v > self.d_hi + self.tol):
            raise ValidationError("split function leaves [d_lo, d_hi]")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "values", _frozen(np.clip(v, self.d_lo, self.d_hi)))

    @property
    def h(self) -> float:
        return (self.y_hi - self.y_lo) / self.y.size

    def with_values(self, values) -> "SplitFunction":
        return SplitFunction(self.y_lo, self.y_hi, self.y, values, self.d_lo, self.d_hi, self.tol)

    def l1(self, other: "SplitFunction") -> float:
        return float(np.abs(self.values - other.values).sum() * self.h)


# --------------------------------------------------------------------- I/O

def measure_to_dict(m) -> dict:
    if isinstance(m, DiscreteMeasure):
        return {"type": "discrete", "dim": m.dim, "points": m.points.tolist(),
                "weights": m.weights.tolist()}
    return {"type": "grid", "ranges": m.ranges.tolist(), "cells": list(m.cells),
            "density": m.density.ravel().tolist()}


def measure_from_dict(d: dict, renormalize: bool = False):
    try:
        t = d["type"]
        if t == "discrete":
            pts = d["points"]
            m = DiscreteMeasure(pts, d.get("weights"), renormalize=renormalize)
            if "dim" in d and int(d["dim"]) != m.dim:
                raise ValidationError(f"field 'dim' says {d['dim']} but points have dim {m.dim}")
            return m
        if t == "grid":
            return GridMeasure(d["ranges"], d["cells"], d["density"], renormalize=renormalize)
    except KeyError as e:
        raise ValidationError(f"measure JSON missing field {e.args[0]!r}") from None
    except (TypeError, ValueError) as e:
        if isinstance(e, ValidationError):
            raise
        raise ValidationError(f"malformed measure JSON: {e}") from None
    raise ValidationError(f"field 'type': unknown measure type {t!r}")


def tri_to_dict(g: TriCoupling) -> dict:
    return {"type": "tricoupling", "nu": measure_to_dict(g.nu), "mu0": measure_to_dict(g.mu0),
            "mu1": measure_to_dict(g.mu1), "k": g.k.tolist(), "i": g.i.tolist(), "j": g.j.tolist(),
            "mass": g.mass.tolist()}


def tri_from_dict(d: dict) -> TriCoupling:
    if d.get("type") != "tricoupling":
        raise ValidationError("field 'type': expected 'tricoupling'")
    try:
        g = TriCoupling(d["k"], d["i"], d["j"], d["mass"], measure_from_dict(d["nu"]),
                        measure_from_dict(d["mu0"]), measure_from_dict(d["mu1"]))
    except KeyError as e:
        raise ValidationError(f"coupling JSON missing field {e.args[0]!r}") from None
    n = g.shape
    if g.mass.size and (min(g.k.min(), g.i.min(), g.j.min()) < 0 or g.k.max() >= n[0]
                        or g.i.max() >= n[1] or g.j.max() >= n[2]):
        raise ValidationError("coupling indices out of range")
    if g.marginal_error() > 1e-9:
        raise ValidationError(f"coupling marginals off by {g.marginal_error():.3g}")
    return g


def _read_json(path) -> Any:
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as e:
        raise ValidationError(f"{path}: parse error at line {e.lineno} col {e.colno}: {e.msg}") from None
    except OSError as e:
        raise ValidationError(f"{path}: {e.strerror}") from None


def load_measure(path, format: Optional[str] = None, renormalize: bool = False):
    path = Path(path)
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "json")
    if fmt == "json":
        return measure_from_dict(_read_json(path), renormalize)
    if fmt != "csv":
        raise ValidationError(f"unknown format {fmt!r}")
    rows, header = [], None
    try:
        with open(path, newline="") as fh:
            for lineno, row in enumerate(csv.reader(fh), 1):
                if not row or not "".join(row).strip():
                    continue
                if lineno == 1 and not _is_number(row[0]):
                    header = [h.strip() for h in row]
                    continue
                try:
                    rows.append([float(x) for x in row])
                except ValueError:
                    raise ValidationError(f"{path}: line {lineno}: non-numeric field") from None
    except OSError as e:
        raise ValidationError(f"{path}: {e.strerror}") from None
    if not rows or len({len(r) for r in rows}) != 1:
        raise ValidationError(f"{path}: empty file or ragged rows")
    A = np.array(rows)
    if header is not None and header[-1].lower() == "weight":
        return DiscreteMeasure(A[:, :-1], A[:, -1], renormalize=renormalize)
    return DiscreteMeasure(A)


def _is_number(s: str) -> bool:
    try:
        float(s)
        return True
    except ValueError:
        return False


def save_measure(m, path, format: Optional[str] = None):
    path = Path(path)
    fmt = format or ("csv" if path.suffix.lower() == ".csv" else "json")
    if fmt == "json":
        path.write_text(json.dumps(measure_to_dict(m)))
        return
    if not isinstance(m, DiscreteMeasure):
        raise ValidationError("CSV output supports point clouds only")
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{i + 1}" for i in range(m.dim)] + ["weight"])
        for p, wt in zip(m.points, m.weights):
            w.writerow([repr(float(v)) for v in p] + [repr(float(wt))])


def curve_from_dict(d: dict) -> Curve:
    d = dict(d)
    kind = d.pop("kind", None)
    rng = d.pop("range", None)
    return Curve(kind, d, tuple(rng) if rng is not None else None)


def cost_from_dict(d: dict) -> CostSpec:
    try:
        t = d["type"]
        if t == "quadratic":
            return CostSpec("quadratic")
        if t == "embedded":
            return CostSpec("embedded", curve=curve_from_dict(d["curve"]), form=d.get("form", "sq"))
        if t == "tabulated":
            return CostSpec("tabulated", table=np.asarray(d["matrix"], float))
    except KeyError as e:
        raise ValidationError(f"cost JSON missing field {e.args[0]!r}") from None
    raise ValidationError(f"field 'type': unknown cost type {t!r}")


def cost_to_dict(c: CostSpec) -> dict:
    if c.kind == "quadratic":
        return {"type": "quadratic"}
    if c.kind == "tabulated":
        return {"type": "tabulated", "matrix": c.table.tolist()}
    cd = {"kind": c.curve.kind, **c.curve.params}
    if c.curve.range is not None:
        cd["range"] = list(c.curve.range)
    return {"type": "embedded", "form": c.form, "curve": cd}


def load_cost(path) -> CostSpec:
    return cost_from_dict(_read_json(path))


def cost_matrix(a: DiscreteMeasure, b: DiscreteMeasure, c: CostSpec) -> np.ndarray:
    return c.matrix(a, b)
