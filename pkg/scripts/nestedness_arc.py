"""Nestedness of the sector-to-arc model as the sector angle grows."""
from dataclasses import dataclass

import numpy as np

from _config import parse, show
from nuot import nestedness_check
from nuot.generators import paper_sector


@dataclass
class Config:
    """Sweep the sector angle; report nestedness, max |k| and where the witnesses sit."""
    angles: tuple = (1.0, 2.0, 2.5, 3.0, 3.5, 4.0, 5.0)
    n: int = 64
    ny: int = 256
    y_grid: int = 64


def main(cfg: Config):
    rows = []
    for th in cfg.angles:
        s = paper_sector(th, cfg.n, cfg.ny)
        rep = nestedness_check(s["mu"], s["nu"], s["cost"], cfg.y_grid)
        third = sum(v["x"][0] < 0 and v["x"][1] < 0 for v in rep.violations)
        rows.append({"theta_bar": th, "nested": rep.nested, "max|k|": float(np.abs(rep.k.values).max()),
                     "bad_cells": rep.n_violating_cells, "3rd_quadrant": f"{third}/{len(rep.violations)}"})
    show(rows, ["theta_bar", "nested", "max|k|", "bad_cells", "3rd_quadrant"])


if __name__ == "__main__":
    main(parse(Config))
