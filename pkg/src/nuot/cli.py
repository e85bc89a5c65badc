"""`nu` command line: one subcommand per operation, JSON reports, CSV sidecars.

Exit codes: 0 ok, 2 validation error (bad flags or inputs), 3 solver error.
"""
from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import platform
import sys
import time
from pathlib import Path

import numpy as np
import scipy

from . import __version__
from ._parallel import set_threads
from .errors import NuotError, SolverError, ValidationError
from .measures import (CostSpec, DiscreteMeasure, GridMeasure, SplitFunction, _read_json,
                       grid_to_discrete, load_cost, load_measure, measure_to_dict, save_measure,
                       tri_from_dict, tri_to_dict)


# ------------------------------------------------------------ serialisation

def _num(x) -> str:
    x = float(x)
    if not math.isfinite(x):
        return "null"
    if x == int(x) and abs(x) < 1e16:
        return repr(float(x))        # keeps 0.5 / 2.0 readable and exact
    return format(x, ".17g")


def dumps(obj, indent: int = 1, _lvl: int = 0) -> str:
    """JSON with every float written to 17 significant digits (non-finite -> null)."""
    pad = " " * (indent * (_lvl + 1))
    end = " " * (indent * _lvl)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {dumps(v, indent, _lvl + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        if all(isinstance(v, (int, float, np.integer, np.floating)) and not isinstance(v, bool) for v in obj):
            return "[" + ", ".join(dumps(v) for v in obj) + "]"
        return "[\n" + ",\n".join(pad + dumps(v, indent, _lvl + 1) for v in obj) + "\n" + end + "]"
    if isinstance(obj, np.ndarray):
        return dumps(obj.tolist(), indent, _lvl)
    if isinstance(obj, (bool, np.bool_)):
        return "true" if obj else "false"
    if isinstance(obj, (int, np.integer)):
        return str(int(obj))
    if isinstance(obj, (float, np.floating)):
        return _num(obj)
    if obj is None:
        return "null"
    return json.dumps(str(obj))


def _csv_text(rows: list) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = list(rows[0].keys())
    w.writerow(keys)
    for r in rows:
        w.writerow([_num(r[k]) if isinstance(r[k], (float, np.floating)) else r[k] for k in keys])
    return buf.getvalue()


def _sha(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


class Run:
    """Collects a RunReport: command echo, input digests, outputs, warnings, wall time."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = list(argv)
        self.inputs = {}
        self.warnings = []
        self.sidecars = {}
        self.t0 = time.perf_counter()

    def measure(self, path, grid_ok: bool = True, discrete: bool = True):
        self.inputs[str(path)] = _sha(path) if Path(path).exists() else None
        m = load_measure(path, renormalize=self.args.renormalize)
        if isinstance(m, GridMeasure) and discrete:
            return grid_to_discrete(m)
        return m

    def grid(self, path):
        m = self.measure(path, discrete=False)
        if not isinstance(m, GridMeasure):
            raise ValidationError(f"{path}: expected a grid measure")
        return m

    def cost(self, path, default=None):
        if path is None:
            return default if default is not None else CostSpec.quadratic()
        self.inputs[str(path)] = _sha(path) if Path(path).exists() else None
        return load_cost(path)

    def json_file(self, path):
        self.inputs[str(path)] = _sha(path) if Path(path).exists() else None
        return _read_json(path)

    def report(self, outputs: dict) -> dict:
        return {"command": self.argv, "inputs": self.inputs,
                "versions": {"nuot": __version__, "numpy": np.__version__, "scipy": scipy.__version__,
                             "python": platform.python_version()},
                "outputs": outputs, "warnings": self.warnings,
                "wall_time": round(time.perf_counter() - self.t0, 3)}


# ------------------------------------------------------------- commands

def _coupling_dict(cp) -> dict:
    return {"shape": list(cp.shape), "rows": cp.rows.tolist(), "cols": cp.cols.tolist(),
            "mass": cp.mass.tolist()}


def cmd_ot(run: Run, a) -> dict:
    from .ot_core import check_solution, is_unique_plan, solve_ot
    A, B = run.measure(a.a), run.measure(a.b)
    sol = solve_ot(A, B, run.cost(a.cost))
    u = is_unique_plan(sol)
    if u != "unique":
        run.warnings.append(f"optimal plan is {u}")
    return {"value": sol.value, "unique": u, "iterations": sol.iterations,
            "checks": check_solution(sol), "coupling": _coupling_dict(sol.coupling),
            "potentials": {"u": sol.potentials.u.tolist(), "v": sol.potentials.v.tolist()}}


def _schedule(s):
    if s is None:
        return None
    try:
        return [float(x) for x in s.split(",") if x.strip()]
    except ValueError:
        raise ValidationError(f"--eps-schedule: cannot parse {s!r}") from None


def cmd_dist(run: Run, a) -> dict:
    from .nu_metric import w_nu
    m0, m1, nu = run.measure(a.mu0), run.measure(a.mu1), run.measure(a.nu)
    r = w_nu(m0, m1, nu, run.cost(a.cost), method=a.method, schedule=_schedule(a.eps_schedule))
    if "unique" != r.uniqueness[0] or "unique" != r.uniqueness[1]:
        run.warnings.append(f"plans to nu: {r.uniqueness[0]}, {r.uniqueness[1]}; triangle inequality not guaranteed")
    run.warnings.extend(r.warnings)
    out = {"value": r.value, "value_sq": r.value_sq, "method": r.method, "uniqueness": list(r.uniqueness),
           "gaps": list(r.gaps), "degenerate": r.degenerate}
    if r.table is not None:
        out["converged"] = r.converged
        run.sidecars["mm_table.csv"] = r.table
    if a.coupling:
        out["coupling"] = tri_to_dict(r.gamma)
    return out


def cmd_mm_table(run: Run, a) -> dict:
    from .nu_metric import DEFAULT_SCHEDULE, mm_limit
    m0, m1, nu = run.measure(a.mu0), run.measure(a.mu1), run.measure(a.nu)
    r = mm_limit(m0, m1, nu, run.cost(a.cost), _schedule(a.eps_schedule) or DEFAULT_SCHEDULE)
    run.warnings.extend(r.warnings)
    rows = [{k: row[k] for k in ("eps", "cross_term", "gap0", "gap1", "F_eps")} for row in r.table]
    run.sidecars["mm_table.csv"] = rows
    return {"value": r.value, "converged": r.converged, "table": rows, "_csv": rows}


_FUNCS = {
    "sqnorm": lambda X: (np.asarray(X) ** 2).sum(-1),
    "norm": lambda X: np.sqrt((np.asarray(X) ** 2).sum(-1)),
    "rlogr": lambda r: np.where(r > 0, r * np.log(np.where(r > 0, r, 1.0)), 0.0),
}


def _func(name):
    if name is None:
        return None
    if name in _FUNCS:
        return _FUNCS[name]
    if isinstance(name, str) and name.startswith("power:"):
        q = float(name.split(":", 1)[1])
        if q <= 1:
            raise ValidationError("power:q needs q > 1")
        return lambda r: np.asarray(r, float) ** q
    raise ValidationError(f"unknown function {name!r}; choose from {', '.join(_FUNCS)} or power:q")


def _functional(d: dict):
    from .geodesics import FunctionalSpec
    grid = d.get("grid")
    if grid is not None:
        grid = (grid["ranges"], grid["cells"])
    return FunctionalSpec(d.get("kind"), V=_func(d.get("V")), W=_func(d.get("W")), U=_func(d.get("U")),
                          grid=grid, deposit=d.get("deposit", "cic"),
                          allowance_const=float(d.get("allowance_const", 1.0)), name=d.get("name", ""))


def cmd_geodesic(run: Run, a) -> dict:
    from .geodesics import convexity_scan, geodesic, geodesic_check
    g = tri_from_dict(run.json_file(a.gamma))
    curve = geodesic(g, a.ts)
    c = run.cost(a.cost)
    out = {"t": curve.ts.tolist()}
    if a.functional:
        f = _functional(run.json_file(a.functional))
        rep = convexity_scan(f, curve, g.nu, c)
        out["convexity"] = rep
        rows = [{"t": t, "f": v, "second_difference": d}
                for t, v, d in zip(rep["t"], rep["f"], rep["second_difference"])]
        run.sidecars["geodesic_scan.csv"] = rows
        out["_csv"] = rows
        if not rep["pass"]:
            run.warnings.append("convexity scan failed")
    if a.check or not a.functional:
        chk = geodesic_check(curve, g.nu, c)
        out["geodesic_check"] = {k: chk[k] for k in ("w01", "max_error", "pass", "uniqueness")}
        run.sidecars["geodesic_pairs.csv"] = chk["pairs"]
        out.setdefault("_csv", chk["pairs"])
    return out


def _layers(s):
    if s in (None, "exact"):
        return "exact"
    try:
        return int(s)
    except ValueError:
        raise ValidationError(f"--layers must be an integer or 'exact', got {s!r}") from None


def cmd_layerwise(run: Run, a) -> dict:
    from .layerwise import layerwise_distance
    r = layerwise_distance(run.measure(a.mu0), run.measure(a.mu1), _layers(a.layers))
    run.sidecars["layer_table.csv"] = r.table
    return {"value": r.value, "vertical_sq": r.vertical_sq, "layer_sq": r.layer_sq,
            "layer_table": r.table, "_csv": r.table}


def cmd_kr(run: Run, a) -> dict:
    from .layerwise import knothe_rosenblatt_2d
    perm, cost = knothe_rosenblatt_2d(run.measure(a.mu0), run.measure(a.mu1), a.tie_policy)
    rows = [{"i": i, "j": int(j)} for i, j in enumerate(perm)]
    run.sidecars["kr_permutation.csv"] = rows
    return {"cost": cost, "permutation": perm.tolist(), "_csv": rows}


def cmd_nested(run: Run, a) -> dict:
    from .unequal_dim import nestedness_check
    rep = nestedness_check(run.grid(a.mu), run.grid(a.nu), run.cost(a.cost), a.ygrid, a.rule,
                           margins=a.margins)
    if any(rep.degenerate):
        run.warnings.append("flat spots in mass splitting at some y")
    rows = [{"y": y, "k": k} for y, k in zip(rep.k.y.tolist(), rep.k.values.tolist())]
    run.sidecars["k.csv"] = rows
    return {**rep.to_dict(), "_csv": rows}


def cmd_dualdist(run: Run, a) -> dict:
    from .unequal_dim import dual_metric
    p = float("inf") if str(a.p).lower() in ("inf", "infinity") else float(a.p)
    v = dual_metric(run.grid(a.nu0), run.grid(a.nu1), run.grid(a.mu), run.cost(a.cost), p, a.ygrid, a.rule)
    return {"value": v, "p": p}


def cmd_fixedpoint(run: Run, a) -> dict:
    from .fixedpoint import FixedPointProblem, contraction_factor, iterate, nestedness_at_solution
    d = run.json_file(a.problem)
    if isinstance(d.get("mu"), str):
        d = dict(d, mu=measure_to_dict(run.grid(str(Path(a.problem).parent / d["mu"]))))
    if a.renormalize:
        d = dict(d, renormalize=True)
    P = FixedPointProblem.from_dict(d)
    if a.k0 in (None, "zero"):
        k0 = P.zero()
    else:
        kd = run.json_file(a.k0)
        vals = kd["k"] if isinstance(kd, dict) else kd
        k0 = P.split(np.clip(np.asarray(vals, float), P.d_lo, P.d_hi))
    cf = contraction_factor(P)
    import warnings
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        tr = iterate(P, k0, a.tol, a.max_iter)
    run.warnings.extend(tr.warnings)
    nest = nestedness_at_solution(P, tr.k_fixed, a.ygrid)
    rows = tr.rows()
    run.sidecars["trace.csv"] = rows
    return {"converged": tr.converged, "iterations": len(tr.steps),
            "k_fixed": {"y": tr.k_fixed.y.tolist(), "k": tr.k_fixed.values.tolist()},
            "trace": rows, "contraction_factor": cf["factor"], "contracts": cf["contracts"],
            "constants": cf["constants"], "nested_verdict": nest["nested"],
            "sufficient_condition": nest["sufficient_condition"], "max_margin": nest["max_margin"],
            "residual": tr.residual, "_csv": rows}


def _params(items) -> dict:
    out = {}
    for it in items or []:
        if "=" not in it:
            raise ValidationError(f"--param expects key=value, got {it!r}")
        k, v = it.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def cmd_gen(run: Run, a) -> dict:
    from .generators import generate
    ms = generate(a.kind, a.seed, **_params(a.param))
    outdir = Path(a.out or ".")
    outdir.mkdir(parents=True, exist_ok=True)
    files = {}
    for name, m in ms.items():
        p = outdir / f"{a.prefix or a.kind}-{name}.json"
        save_measure(m, p)
        files[name] = {"path": str(p), "sha256": _sha(p), "type": measure_to_dict(m)["type"]}
    return {"kind": a.kind, "seed": a.seed, "files": files}


COMMANDS = {"ot": cmd_ot, "dist": cmd_dist, "mm-table": cmd_mm_table, "geodesic": cmd_geodesic,
            "layerwise": cmd_layerwise, "kr": cmd_kr, "nested": cmd_nested, "dualdist": cmd_dualdist,
            "fixedpoint": cmd_fixedpoint, "gen": cmd_gen}


# ------------------------------------------------------------------ parser

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    glob = argparse.ArgumentParser(add_help=False)
    glob.add_argument("--threads", type=int, default=argparse.SUPPRESS, help="parallelism budget")
    glob.add_argument("--renormalize", action="store_true", default=argparse.SUPPRESS,
                      help="rescale input masses to 1 instead of rejecting them")
    glob.add_argument("--out", default=argparse.SUPPRESS, help="directory for the report and CSV sidecars")
    glob.add_argument("--format", choices=("json", "csv"), default=argparse.SUPPRESS,
                      help="stdout format (csv prints the command's table)")

    p = _Parser(prog="nu", description="nu-based Wasserstein metric toolkit", parents=[glob])
    sub = p.add_subparsers(dest="cmd", required=True, parser_class=_Parser)

    def add(name, help):
        return sub.add_parser(name, help=help, parents=[glob])

    s = add("ot", "exact two-marginal transport")
    s.add_argument("--a", required=True)
    s.add_argument("--b", required=True)
    s.add_argument("--cost")

    s = add("dist", "W_nu(mu0, mu1)")
    for f in ("--mu0", "--mu1", "--nu"):
        s.add_argument(f, required=True)
    s.add_argument("--cost")
    s.add_argument("--method", choices=("lp", "disint", "mm", "auto"), default="lp")
    s.add_argument("--eps-schedule")
    s.add_argument("--coupling", action="store_true", help="include the optimal three-way coupling")

    s = add("mm-table", "multi-marginal eps table")
    for f in ("--mu0", "--mu1", "--nu"):
        s.add_argument(f, required=True)
    s.add_argument("--cost")
    s.add_argument("--eps-schedule")

    s = add("geodesic", "geodesic from a coupling, with convexity scan")
    s.add_argument("--gamma", required=True)
    s.add_argument("--ts", type=int, default=17)
    s.add_argument("--functional")
    s.add_argument("--cost")
    s.add_argument("--check", action="store_true", help="also compare W_nu along the curve")

    s = add("layerwise", "layerwise-Wasserstein distance")
    s.add_argument("--mu0", required=True)
    s.add_argument("--mu1", required=True)
    s.add_argument("--layers", default="64")

    s = add("kr", "Knothe-Rosenblatt permutation of two planar clouds")
    s.add_argument("--mu0", required=True)
    s.add_argument("--mu1", required=True)
    s.add_argument("--tie-policy", choices=("error", "lex"), default="error")

    s = add("nested", "nestedness check for a 1-D target")
    for f in ("--mu", "--nu", "--cost"):
        s.add_argument(f, required=True)
    s.add_argument("--ygrid", type=int, default=64)
    s.add_argument("--rule", choices=("auto", "exact", "midpoint"), default="auto")
    s.add_argument("--margins", action="store_true", help="also evaluate the sufficient condition")

    s = add("dualdist", "dual metric between two 1-D targets")
    for f in ("--nu0", "--nu1", "--mu", "--cost"):
        s.add_argument(f, required=True)
    s.add_argument("--p", default="1")
    s.add_argument("--ygrid", type=int, default=256)
    s.add_argument("--rule", choices=("auto", "exact", "midpoint"), default="auto")

    s = add("fixedpoint", "fixed-point iteration for the entropic equilibrium")
    s.add_argument("--problem", required=True)
    s.add_argument("--k0", default="zero")
    s.add_argument("--tol", type=float, default=1e-9)
    s.add_argument("--max-iter", type=int, default=200)
    s.add_argument("--ygrid", type=int, default=64, help="y-grid for the nestedness check")

    s = add("gen", "write generated instances")
    s.add_argument("kind")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--param", action="append", help="key=value, repeatable")
    s.add_argument("--prefix")
    return p


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    args = build_parser().parse_args(argv)
    for k, v in (("threads", 1), ("renormalize", False), ("out", None), ("format", "json")):
        if not hasattr(args, k):
            setattr(args, k, v)
    set_threads(args.threads)
    run = Run(args, ["nu"] + argv)
    try:
        outputs = COMMANDS[args.cmd](run, args)
    except NuotError as e:
        print(f"nu {args.cmd}: error: {e}", file=sys.stderr)
        return e.exit_code
    except (OSError, KeyError, TypeError) as e:
        print(f"nu {args.cmd}: error: {e}", file=sys.stderr)
        return ValidationError.exit_code
    table = outputs.pop("_csv", None)
    rep = run.report(outputs)
    text = dumps(rep) + "\n"
    if args.out and args.cmd != "gen":
        d = Path(args.out)
        d.mkdir(parents=True, exist_ok=True)
        (d / f"{args.cmd}.json").write_text(text)
        for name, rows in run.sidecars.items():
            (d / name).write_text(_csv_text(rows))
    if args.format == "csv":
        sys.stdout.write(_csv_text(table) if table else _csv_text([_flat(outputs)]))
    else:
        sys.stdout.write(text)
    return 0


def _flat(d: dict) -> dict:
    return {k: v for k, v in d.items() if isinstance(v, (int, float, str, bool))}


if __name__ == "__main__":
    sys.exit(main())
