import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nuot import CostSpec, Curve, DiscreteMeasure, GridMeasure, ValidationError, grid_to_discrete
from nuot.measures import (TriCoupling, cost_from_dict, cost_matrix, cost_to_dict, load_measure,
                           save_measure, tri_from_dict, tri_to_dict)


def test_load_json_discrete(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"type": "discrete", "dim": 1, "points": [[0], [1]], "weights": [0.5, 0.5]}))
    m = load_measure(p)
    assert m.dim == 1 and m.size == 2 and m.weights.sum() == 1.0


def test_load_csv_without_weights_is_uniform(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("0.0,1.0\n2.0,3.0\n4.0,5.0\n5.0,6.0\n")
    m = load_measure(p)
    assert m.size == 4 and np.allclose(m.weights, 0.25)


def test_load_grid_json(tmp_path):
    p = tmp_path / "g.json"
    p.write_text(json.dumps({"type": "grid", "ranges": [[-1, 1], [-1, 1]], "cells": [2, 2],
                             "density": [0.25] * 4}))
    g = load_measure(p)
    assert isinstance(g, GridMeasure)
    assert g.masses().sum() == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("payload, msg", [
    ({"type": "discrete", "points": [[0], [1]], "weights": [0.7, -0.2]}, "negative"),
    ({"type": "discrete", "points": [[0], [1]], "weights": [0.7, 0.7]}, "mass"),
    ({"type": "grid", "ranges": [[0, 1]], "cells": [2], "density": [1, 3]}, "mass"),
    ({"type": "discrete", "weights": [1.0]}, "points"),
])
def test_load_rejects(tmp_path, payload, msg):
    p = tmp_path / "bad.json"
    p.write_text(json.dumps(payload))
    with pytest.raises(ValidationError, match=msg):
        load_measure(p)


def test_load_parse_error_reports_line(tmp_path):
    p = tmp_path / "bad.json"
    p.write_text('{"type": "discrete",\n "points": [[0]\n')
    with pytest.raises(ValidationError, match="line"):
        load_measure(p)


def test_renormalize_flag(tmp_path):
    p = tmp_path / "m.json"
    p.write_text(json.dumps({"type": "discrete", "points": [[0], [1]], "weights": [1, 3]}))
    m = load_measure(p, renormalize=True)
    assert np.allclose(m.weights, [0.25, 0.75])


def test_grid_to_discrete_examples():
    g = GridMeasure([[-1, 1], [-1, 1]], [2, 2], np.full(4, 0.25))
    d = grid_to_discrete(g)
    assert sorted(map(tuple, d.points)) == [(-0.5, -0.5), (-0.5, 0.5), (0.5, -0.5), (0.5, 0.5)]
    assert np.allclose(d.weights, 0.25)
    one = grid_to_discrete(GridMeasure([[0, 2], [4, 6]], [1, 1], [0.25]))
    assert one.size == 1 and np.allclose(one.points[0], [1, 5])
    line = grid_to_discrete(GridMeasure([[0, 1]], [4], np.ones(4)))
    assert np.allclose(line.points[:, 0], [0.125, 0.375, 0.625, 0.875])
    assert np.allclose(line.weights, 0.25)


def test_cost_matrix_examples():
    q = cost_matrix(DiscreteMeasure([[0.0]]), DiscreteMeasure([[3.0]]), CostSpec.quadratic())
    assert q.tolist() == [[9.0]]
    arc = CostSpec.embedded(Curve("arc", {"center": [0, 0], "radius": 1.0}), "sq")
    assert cost_matrix(DiscreteMeasure([[1.0, 0.0]]), DiscreteMeasure([[0.0]]), arc)[0, 0] == pytest.approx(0, abs=1e-15)
    dot = CostSpec.embedded(Curve("segment", {"origin": [0, 0], "direction": [1, 0]}), "dot")
    assert cost_matrix(DiscreteMeasure([[2.0, 5.0]]), DiscreteMeasure([[3.0]]), dot)[0, 0] == -6.0


def test_cost_dimension_mismatch():
    with pytest.raises(ValidationError):
        cost_matrix(DiscreteMeasure([[0.0, 1.0]]), DiscreteMeasure([[0.0]]), CostSpec.quadratic())


def test_curve_checks():
    with pytest.raises(ValidationError, match="injective"):
        CostSpec.embedded(Curve("arc", {"radius": 1.0}, range=(0, 7.0)))
    with pytest.raises(ValidationError, match="rank"):
        CostSpec.embedded(Curve("poly", {"coeffs": [[0, 0], [0, 0], [1, 0]]}, range=(-1, 1)))
    Curve("poly", {"coeffs": [[0, 0], [1, 0], [0, 1]]}).check(-1, 1)


def test_cost_json_roundtrip():
    for d in ({"type": "quadratic"}, {"type": "tabulated", "matrix": [[1.0, 2.0]]},
              {"type": "embedded", "form": "dot", "curve": {"kind": "arc", "center": [0, 0], "radius": 2.0}}):
        assert cost_to_dict(cost_from_dict(d))["type"] == d["type"]
    assert cost_from_dict({"type": "tabulated", "matrix": [[1, 2]]}).table.tolist() == [[1, 2]]


def test_tricoupling_roundtrip_and_validation():
    nu = DiscreteMeasure([[0.0]])
    mu = DiscreteMeasure([[0.0], [1.0]])
    g = TriCoupling([0, 0], [0, 1], [1, 0], [0.5, 0.5], nu, mu, mu)
    h = tri_from_dict(json.loads(json.dumps(tri_to_dict(g))))
    assert np.array_equal(h.mass, g.mass) and h.cross_cost() == g.cross_cost() == 1.0
    bad = tri_to_dict(g)
    bad["mass"] = [0.6, 0.4]
    with pytest.raises(ValidationError, match="marginals"):
        tri_from_dict(bad)


def test_prune_tiny_atoms():
    m = DiscreteMeasure([[0.0], [1.0]], [1.0, 1e-17])
    assert m.size == 1


# --------------------------------------------------------------- properties

clouds = st.integers(0, 10 ** 6).map(lambda s: np.random.default_rng(s))


@given(clouds, st.integers(1, 12), st.integers(1, 3), st.booleans())
def test_roundtrip_bit_exact(tmp_path_factory, rng, n, dim, uniform):
    m = DiscreteMeasure(rng.normal(size=(n, dim)), None if uniform else rng.dirichlet(np.ones(n)))
    d = tmp_path_factory.mktemp("rt")
    save_measure(m, d / "m.json")
    save_measure(m, d / "m.csv")
    mj, mc = load_measure(d / "m.json"), load_measure(d / "m.csv")
    assert np.array_equal(mj.points, m.points) and np.array_equal(mj.weights, m.weights)
    assert np.abs(mc.points - m.points).max() <= 1e-15 and np.abs(mc.weights - m.weights).max() <= 1e-15


@given(clouds, st.integers(1, 6), st.integers(1, 6))
def test_grid_roundtrip_and_moments(tmp_path_factory, rng, n1, n2):
    g = GridMeasure([[-1, 2], [0, 1]], [n1, n2], rng.random(n1 * n2) + 0.01, renormalize=True)
    p = tmp_path_factory.mktemp("g") / "g.json"
    save_measure(g, p)
    h = load_measure(p)
    assert np.array_equal(h.density, g.density)
    d = grid_to_discrete(g)
    assert abs(d.weights.sum() - 1) < 1e-12
    # first moment of the piecewise-constant density, integrated cell by cell from the edges
    dens = g.density * g.cell_volume
    for ax in range(2):
        e = g.axis_edges(ax)
        moment = (dens.sum(1 - ax) * 0.5 * (e[1:] ** 2 - e[:-1] ** 2) / np.diff(e)).sum()
        assert abs(d.mean()[ax] - moment) <= 0.5 * g.widths[ax]


@given(clouds, st.integers(1, 10), st.integers(1, 3))
def test_quadratic_cost_nonneg_and_zero_diagonal(rng, n, dim):
    m = DiscreteMeasure(rng.normal(size=(n, dim)))
    C = cost_matrix(m, m, CostSpec.quadratic())
    assert C.min() >= 0 and np.all(np.diag(C) == 0) and np.array_equal(C, C.T)
