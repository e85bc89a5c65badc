"""Contraction factor and fixed-point iteration for the index cost on the square."""
import warnings
from dataclasses import dataclass

import numpy as np

from _config import parse, show
from nuot import FixedPointProblem, GridMeasure, contraction_factor, iterate
from nuot.fixedpoint import foc_residual
from nuot.measures import CostSpec, Curve


@dataclass
class Config:
    """Sweep the type interval length; constants A, B, C, d_lo, d_hi are held fixed."""
    ybars: tuple = (0.01, 0.05, 0.1, 0.2, 0.5)
    n_x: int = 32
    n_y: int = 256
    A: float = 1.0
    B: float = 0.25
    C: float = 4.0
    d_lo: float = -1.0
    d_hi: float = 1.0


def main(cfg: Config):
    cost = CostSpec.embedded(Curve("segment", {"origin": [0, 0], "direction": [1, 0]}), "dot")
    mu = GridMeasure([[-1, 1], [-1, 1]], [cfg.n_x, cfg.n_x], np.full(cfg.n_x ** 2, 0.25))
    rows = []
    for yb in cfg.ybars:
        p = FixedPointProblem(mu, 0.0, yb, cost, n_y=cfg.n_y, A=cfg.A, B=cfg.B, C=cfg.C,
                              d_lo=cfg.d_lo, d_hi=cfg.d_hi)
        cf = contraction_factor(p)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            tr = iterate(p, check_factor=False)
        rows.append({"ybar": yb, "factor": cf["factor"], "steps": len(tr.steps),
                     "max_ratio": max(tr.ratios) if tr.ratios else float("nan"),
                     "foc_residual": foc_residual(tr.k_fixed, p), "converged": tr.converged})
    show(rows, ["ybar", "factor", "steps", "max_ratio", "foc_residual", "converged"])


if __name__ == "__main__":
    main(parse(Config))
