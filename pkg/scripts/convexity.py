"""Convexity of the four functional families along a generalized geodesic."""
from dataclasses import dataclass

import numpy as np

from _config import parse, show
from nuot import FunctionalSpec, convexity_scan, geodesic, w_nu
from nuot.generators import column_pair
from nuot.measures import CostSpec, Curve, grid_to_discrete


@dataclass
class Config:
    """Second differences along the geodesic of a column-pair instance with a segment reference."""
    sizes: tuple = (16, 32)
    seed: int = 0
    n_t: int = 9


def main(cfg: Config):
    seg = CostSpec.embedded(Curve("segment", {"origin": [0, 0], "direction": [1, 0]}), "sq")
    rows = []
    for n in cfg.sizes:
        g0, g1, nu = column_pair(n, cfg.seed)
        cur = geodesic(w_nu(grid_to_discrete(g0), grid_to_discrete(g1), nu, seg, method="auto").gamma, cfg.n_t)
        specs = [FunctionalSpec("wass-to-nu", name="W^2(nu, .)"),
                 FunctionalSpec("potential", V=lambda X: (X ** 2).sum(1), name="V=|x|^2"),
                 FunctionalSpec("interaction", W=lambda Z: (Z ** 2).sum(1), name="W=|z|^2"),
                 FunctionalSpec("internal", U=lambda r: r * np.log(r), grid=([[-1, 1], [-1, 1]], (n, n)),
                                name="U=r log r")]
        for f in specs:
            s = convexity_scan(f, cur, nu, seg)
            rows.append({"n": n, "functional": f.name, "min_d2": s["min_second_difference"],
                         "allowance": s["allowance"], "pass": s["pass"]})
    show(rows, ["n", "functional", "min_d2", "allowance", "pass"])


if __name__ == "__main__":
    main(parse(Config))
