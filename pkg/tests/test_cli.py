import json
import subprocess
import sys

import pytest

from conftest import FIXTURES
from nuot import SolverError
from nuot.cli import dumps, main

TRI = {k: str(FIXTURES / f"triangle-{k}.json") for k in ("nu", "mu0", "mu1", "mu2")}


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def report(capsys, *argv):
    code, out, err = run(capsys, *argv)
    assert code == 0, err
    return json.loads(out)


def test_dist_triangle(capsys):
    r = report(capsys, "dist", "--mu0", TRI["mu0"], "--mu1", TRI["mu1"], "--nu", TRI["nu"])
    assert r["outputs"]["value"] == 0.5
    assert r["outputs"]["uniqueness"] == ["non-unique", "unique"]
    assert any("triangle" in w for w in r["warnings"])
    assert set(r["inputs"]) == {TRI["mu0"], TRI["mu1"], TRI["nu"]}
    r = report(capsys, "dist", "--mu0", TRI["mu1"], "--mu1", TRI["mu2"], "--nu", TRI["nu"], "--coupling")
    assert r["outputs"]["value"] == 2.0 and "coupling" in r["outputs"]


def test_deterministic_output(capsys):
    argv = ["dist", "--mu0", TRI["mu0"], "--mu1", TRI["mu2"], "--nu", TRI["nu"], "--coupling"]
    a, b = report(capsys, *argv), report(capsys, *argv)
    a.pop("wall_time"), b.pop("wall_time")
    assert a == b


def test_ot_and_csv(capsys, tmp_path):
    r = report(capsys, "ot", "--a", TRI["nu"], "--b", TRI["mu0"], "--cost", str(FIXTURES / "cost-quadratic.json"))
    assert r["outputs"]["value"] == 2.0 and r["outputs"]["unique"] == "non-unique"
    code, out, _ = run(capsys, "layerwise", "--mu0", TRI["mu0"], "--mu1", TRI["mu1"], "--format", "csv",
                       "--out", str(tmp_path))
    assert code == 0 and out.splitlines()[0].startswith("l,weight")
    assert (tmp_path / "layerwise.json").exists() and (tmp_path / "layer_table.csv").exists()


def test_nested_and_fixedpoint(capsys):
    code, out, _ = run(capsys, "nested", "--mu", str(FIXTURES / "sector4-mu.json"),
                       "--nu", str(FIXTURES / "sector4-nu.json"), "--cost", str(FIXTURES / "cost-arc.json"))
    assert code == 0 and json.loads(out)["outputs"]["nested"] is False
    r = report(capsys, "fixedpoint", "--problem", str(FIXTURES / "paper-example-ybar0.1.json"))
    o = r["outputs"]
    assert o["converged"] and o["contracts"] and o["residual"] < 1e-6 and o["nested_verdict"]


def test_gen_roundtrip(capsys, tmp_path):
    r = report(capsys, "gen", "paper-triangle", "--param", "eps=0.5", "--out", str(tmp_path))
    files = r["outputs"]["files"]
    assert set(files) == {"nu", "mu0", "mu1", "mu2"}
    r = report(capsys, "dist", "--mu0", files["mu1"]["path"], "--mu1", files["mu2"]["path"],
               "--nu", files["nu"]["path"])
    assert r["outputs"]["value"] == 2.0


@pytest.mark.parametrize("argv", [
    ["dist", "--mu0", "missing.json", "--mu1", "x", "--nu", "y"],
    ["dist", "--mu0", TRI["mu0"]],
    ["layerwise", "--mu0", TRI["mu0"], "--mu1", TRI["mu1"], "--layers", "many"],
    ["gen", "no-such-kind"],
    ["mm-table", "--mu0", TRI["mu0"], "--mu1", TRI["mu1"], "--nu", TRI["nu"], "--eps-schedule", "1,0.1"],
])
def test_validation_exit_code(capsys, argv):
    try:
        code = main(argv)
    except SystemExit as e:      # argparse usage errors
        code = e.code
    assert code == 2 and "error" in capsys.readouterr().err


def test_solver_error_exit_code(capsys, monkeypatch):
    import nuot.nu_metric as nm

    def boom(*a, **k):
        raise SolverError("HiGHS failed: forced")

    monkeypatch.setattr(nm, "_constrained", boom)
    code, _, err = run(capsys, "dist", "--mu0", TRI["mu0"], "--mu1", TRI["mu1"], "--nu", TRI["nu"])
    assert code == 3 and "forced" in err


def test_non_finite_numbers_become_null():
    assert dumps({"a": float("inf"), "b": [float("nan"), 1.5]}) == '{\n "a": null,\n "b": [null, 1.5]\n}'


def test_module_entry_point():
    p = subprocess.run([sys.executable, "-m", "nuot.cli", "kr", "--mu0", TRI["mu1"], "--mu1", TRI["mu2"]],
                       capture_output=True, text=True)
    assert p.returncode == 0 and json.loads(p.stdout)["outputs"]["permutation"] == [1, 0]
