"""W_nu with a segment reference against the layerwise distance on Gaussian-mixture grids."""
import time
from dataclasses import dataclass

from _config import parse, show
from nuot import layerwise_equivalence_check
from nuot.generators import grid_gaussian, uniform_interval
from nuot.measures import Curve


@dataclass
class Config:
    """Relative gap |W_nu - d_LW| / d_LW as the grid is refined."""
    sizes: tuple = (8, 16, 32)
    seed0: int = 1
    seed1: int = 2
    layers: str = "exact"


def main(cfg: Config):
    seg = Curve("segment", {"origin": [0, 0], "direction": [1, 0]})
    layers = cfg.layers if cfg.layers == "exact" else int(cfg.layers)
    rows = []
    for n in cfg.sizes:
        t0 = time.perf_counter()
        rep = layerwise_equivalence_check(grid_gaussian(n, cfg.seed0), grid_gaussian(n, cfg.seed1), seg,
                                          uniform_interval(-1, 1, n), layers=layers)
        rows.append({"n": n, "w_nu": rep["w_nu"], "d_lw": rep["d_lw"], "rel_gap": rep["rel_gap"],
                     "seconds": time.perf_counter() - t0})
    show(rows, ["n", "w_nu", "d_lw", "rel_gap", "seconds"])


if __name__ == "__main__":
    main(parse(Config))
