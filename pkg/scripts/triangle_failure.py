"""W_nu on the two-atom triangle example, swept over eps."""
from dataclasses import dataclass

from _config import parse, show
from nuot import w_nu
from nuot.generators import paper_triangle


@dataclass
class Config:
    """Triangle-inequality failure of W_nu when a plan to nu is not unique."""
    eps_values: tuple = (0.1, 0.25, 0.5, 0.75, 1.0, 1.5)


def main(cfg: Config):
    rows = []
    for eps in cfg.eps_values:
        t = paper_triangle(eps)
        r01 = w_nu(t["mu0"], t["mu1"], t["nu"])
        w02 = w_nu(t["mu0"], t["mu2"], t["nu"]).value
        w12 = w_nu(t["mu1"], t["mu2"], t["nu"]).value
        rows.append({"eps": eps, "W01": r01.value, "W02": w02, "W12": w12, "violation": w12 - r01.value - w02,
                     "plan(nu,mu0)": r01.uniqueness[0]})
    show(rows, ["eps", "W01", "W02", "W12", "violation", "plan(nu,mu0)"])


if __name__ == "__main__":
    main(parse(Config))
