"""Instance generators: random corpora and the worked-example geometries."""
from __future__ import annotations

import numpy as np

from .errors import ValidationError
from .measures import CostSpec, Curve, DiscreteMeasure, GridMeasure


def paper_triangle(eps: float = 0.5):
    """nu, mu0, mu1, mu2 of the triangle-failure example."""
    nu = DiscreteMeasure([[1.0, 0.0], [-1.0, 0.0]])
    mu0 = DiscreteMeasure([[0.0, 1.0], [0.0, -1.0]])
    mu1 = DiscreteMeasure([[eps, 1.0], [-eps, -1.0]])
    mu2 = DiscreteMeasure([[-eps, 1.0], [eps, -1.0]])
    return {"nu": nu, "mu0": mu0, "mu1": mu1, "mu2": mu2}


def sector_grid(theta_bar: float, n: int = 64) -> GridMeasure:
    """Uniform density on {0 < r < 1, 0 < theta < theta_bar}, midpoint-sampled on [-1,1]^2."""
    xs = -1 + (np.arange(n) + 0.5) * 2.0 / n
    X1, X2 = np.meshgrid(xs, xs, indexing="ij")
    r = np.hypot(X1, X2)
    th = np.mod(np.arctan2(X2, X1), 2 * np.pi)
    inside = (r < 1) & (th > 0) & (th < theta_bar)
    return GridMeasure([[-1, 1], [-1, 1]], [n, n], inside.astype(float), renormalize=True)


def uniform_interval(lo: float, hi: float, n: int = 256, density=None) -> GridMeasure:
    if density is None:
        density = np.ones(n)
    return GridMeasure([[lo, hi]], [n], density, renormalize=True)


def arc_cost(form: str = "dot") -> CostSpec:
    """c(x, y) = -x.(cos y, sin y) (form 'dot') on the unit circle."""
    return CostSpec.embedded(Curve("arc", {"center": [0.0, 0.0], "radius": 1.0}), form)


def paper_sector(theta_bar: float = 2.0, n: int = 64, ny: int = 256):
    return {"mu": sector_grid(theta_bar, n), "nu": uniform_interval(0.0, theta_bar, ny),
            "cost": arc_cost("dot")}


def grid_gaussian(n: int = 32, seed: int = 0, dim: int = 2, lo: float = -1.0, hi: float = 1.0,
                  rotate: bool = True) -> GridMeasure:
    """Gaussian bump on [lo,hi]^dim: random centre, random scales, random rotation."""
    rng = np.random.default_rng(seed)
    c = rng.uniform(0.3 * lo, 0.3 * hi, dim)
    s = rng.uniform(0.25, 0.45, dim) * (hi - lo) / 2
    Q = np.linalg.qr(rng.normal(size=(dim, dim)))[0] if rotate else np.eye(dim)
    P = Q @ np.diag(s ** -2.0) @ Q.T
    xs = lo + (np.arange(n) + 0.5) * (hi - lo) / n
    mesh = np.meshgrid(*([xs] * dim), indexing="ij")
    Z = np.stack([g - ci for g, ci in zip(mesh, c)], -1)
    q = np.einsum("...i,ij,...j->...", Z, P, Z)
    return GridMeasure([[lo, hi]] * dim, [n] * dim, np.exp(-0.5 * q), renormalize=True)


def point_cloud(n: int = 20, dim: int = 2, seed: int = 0, weights: str = "uniform") -> DiscreteMeasure:
    rng = np.random.default_rng(seed)
    pts = rng.normal(size=(n, dim))
    w = None if weights == "uniform" else rng.dirichlet(np.ones(n))
    return DiscreteMeasure(pts, w)


def column_pair(n: int = 16, seed: int = 0, shift: float = 0.0):
    """Two n x n grids with identical column masses but different column profiles.

    With nu placed on the column abscissae (weights = column masses) every plan
    to nu is unique and the geodesics are exact. ``shift`` moves mu1's grid along x1.
    Returns (mu0, mu1) as GridMeasures and the matching discrete nu on the
    parameter line of the segment {(y, 0)}.
    """
    rng = np.random.default_rng(seed)
    xs = -1 + (np.arange(n) + 0.5) * 2.0 / n
    col = np.exp(-0.5 * ((xs - rng.uniform(-0.3, 0.3)) / 0.5) ** 2)
    col /= col.sum()

    def profile(center, width):
        p = np.exp(-0.5 * ((xs - center) / width) ** 2) + 0.05
        return p / p.sum()

    d0 = np.stack([col[i] * profile(rng.uniform(-0.4, 0.4), rng.uniform(0.25, 0.5)) for i in range(n)])
    d1 = np.stack([col[i] * profile(rng.uniform(-0.4, 0.4), rng.uniform(0.25, 0.5)) for i in range(n)])
    vol = (2.0 / n) ** 2
    mu0 = GridMeasure([[-1, 1], [-1, 1]], [n, n], d0 / vol, renormalize=True)
    mu1 = GridMeasure([[-1 + shift, 1 + shift], [-1, 1]], [n, n], d1 / vol, renormalize=True)
    nu = DiscreteMeasure(xs[:, None] + 0.0, col)
    return mu0, mu1, nu


KINDS = ("grid-gaussian", "point-cloud", "arc-wedge", "paper-triangle", "paper-sector")


def generate(kind: str, seed: int = 0, **params) -> dict:
    """Named measures for the CLI's gen command."""
    if kind == "paper-triangle":
        return paper_triangle(float(params.get("eps", 0.5)))
    if kind in ("paper-sector", "arc-wedge"):
        tb = float(params.get("theta_bar", 2.0))
        if not 0 < tb < 2 * np.pi:
            raise ValidationError("theta_bar must lie in (0, 2 pi)")
        out = paper_sector(tb, int(params.get("n", 64)), int(params.get("ny", 256)))
        return {"mu": out["mu"], "nu": out["nu"]}
    if kind == "grid-gaussian":
        return {"mu": grid_gaussian(int(params.get("n", 32)), seed, int(params.get("dim", 2)))}
    if kind == "point-cloud":
        return {"mu": point_cloud(int(params.get("n", 20)), int(params.get("dim", 2)), seed,
                                  params.get("weights", "uniform"))}
    raise ValidationError(f"unknown generator kind {kind!r}; choose from {', '.join(KINDS)}")
