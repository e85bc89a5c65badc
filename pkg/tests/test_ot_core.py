import numpy as np
import pytest
from hypothesis import given, strategies as st

from oracles import brute_ot, sqdist
from nuot import CostSpec, DiscreteMeasure, ValidationError, check_solution, is_unique_plan, ot_1d, solve_ot, w2
from nuot._lp import highs_ot, highs_ot_sparse
from nuot.generators import paper_triangle
from nuot.ot_core import _solve_arrays, c_transform, w2_sq_1d

seeds = st.integers(0, 10 ** 6)


def D1(xs, w=None):
    return DiscreteMeasure(np.asarray(xs, float)[:, None], w)


def test_dirac_pair():
    s = solve_ot(DiscreteMeasure([[1.0, 2.0]]), DiscreteMeasure([[4.0, -2.0]]))
    assert s.value == 25.0 and s.coupling.dense().tolist() == [[1.0]]


def test_two_point_monotone():
    a, b = D1([0, 2]), D1([1, 3])
    s = solve_ot(a, b)
    assert s.value == pytest.approx(1.0, abs=1e-14)
    assert np.allclose(s.coupling.dense(), [[0.5, 0], [0, 0.5]])
    # oracle: both vertices of the 2x2 polytope
    v, plans = brute_ot(a.weights, b.weights, sqdist(a.points, b.points))
    assert v == pytest.approx(1.0) and len(plans) == 1
    assert ot_1d(a, b).value == pytest.approx(1.0, abs=1e-14)


def test_identity_on_same_support():
    a = DiscreteMeasure([[0, 0], [1, 0], [0, 3]])
    s = solve_ot(a, a)
    assert s.value == 0 and np.allclose(s.coupling.dense(), np.eye(3) / 3)


def test_ot_1d_translation():
    a = D1([0, 1, 2, 3])
    assert ot_1d(a, a).value == 0
    assert ot_1d(a, a.translate([5.0])).value == pytest.approx(25.0, abs=1e-12)
    with pytest.raises(ValidationError):
        ot_1d(DiscreteMeasure([[0, 0]]), a)


def test_size_cap():
    a = DiscreteMeasure(np.zeros((1001, 1)) + np.arange(1001)[:, None])
    with pytest.raises(ValidationError, match="cap"):
        solve_ot(a, a)


def test_uniqueness_examples():
    tri = paper_triangle(0.5)
    s = solve_ot(tri["nu"], tri["mu0"])
    assert is_unique_plan(s) == "non-unique"
    s = solve_ot(DiscreteMeasure([[0.0, 0.0]]), DiscreteMeasure(np.random.default_rng(1).normal(size=(5, 2))))
    assert is_unique_plan(s) == "unique"


@given(seeds)
def test_uniqueness_generic_3x3(seed):
    rng = np.random.default_rng(seed)
    a = DiscreteMeasure(rng.normal(size=(3, 2)), rng.dirichlet(np.ones(3)))
    b = DiscreteMeasure(rng.normal(size=(3, 2)), rng.dirichlet(np.ones(3)))
    s = solve_ot(a, b)
    _, plans = brute_ot(a.weights, b.weights, sqdist(a.points, b.points))
    # generic instance: one optimal vertex; the tri-state has to agree
    assert len(plans) == 1
    assert is_unique_plan(s) == "unique"


def test_uniqueness_matches_vertex_count():
    # equal weights on a square: two optimal vertices
    a = DiscreteMeasure([[0, 0], [1, 1]])
    b = DiscreteMeasure([[1, 0], [0, 1]])
    _, plans = brute_ot(a.weights, b.weights, sqdist(a.points, b.points))
    assert len(plans) == 2
    assert is_unique_plan(solve_ot(a, b)) == "non-unique"


@given(seeds, st.integers(1, 4), st.integers(1, 4))
def test_value_matches_vertex_enumeration(seed, n, m):
    rng = np.random.default_rng(seed)
    a = DiscreteMeasure(rng.normal(size=(n, 2)), rng.dirichlet(np.ones(n)))
    b = DiscreteMeasure(rng.normal(size=(m, 2)), rng.dirichlet(np.ones(m)))
    v, _ = brute_ot(a.weights, b.weights, sqdist(a.points, b.points))
    assert solve_ot(a, b).value == pytest.approx(v, abs=1e-10)


@given(seeds, st.integers(1, 30), st.integers(1, 30))
def test_duality_and_feasibility(seed, n, m):
    rng = np.random.default_rng(seed)
    a = DiscreteMeasure(rng.normal(size=(n, 2)), rng.dirichlet(np.ones(n)))
    b = DiscreteMeasure(rng.normal(size=(m, 2)), rng.dirichlet(np.ones(m)))
    s = solve_ot(a, b)
    chk = check_solution(s)
    assert chk["duality_gap"] <= 1e-9
    assert chk["marginal_error"] <= 1e-10
    assert chk["dual_infeasibility"] <= 1e-9
    assert chk["slackness"] <= 1e-8
    assert chk["cyclical_violation"] <= 1e-8
    # gauge: v vanishes at the first atom of the second marginal
    assert s.potentials.v[0] == 0
    # independent value from HiGHS
    assert s.value == pytest.approx(highs_ot(a.weights, b.weights, s.cost_matrix)[1], abs=1e-9)


@given(seeds, st.integers(1, 25), st.integers(1, 25))
def test_solve_ot_equals_ot_1d(seed, n, m):
    rng = np.random.default_rng(seed)
    a = D1(rng.normal(size=n), rng.dirichlet(np.ones(n)))
    b = D1(rng.normal(size=m), rng.dirichlet(np.ones(m)))
    v = solve_ot(a, b).value
    assert ot_1d(a, b).value == pytest.approx(v, abs=1e-10)
    assert w2_sq_1d(a.points[:, 0], a.weights, b.points[:, 0], b.weights) == pytest.approx(v, abs=1e-10)


@given(seeds)
def test_w2_metric_axioms(seed):
    rng = np.random.default_rng(seed)
    ms = [DiscreteMeasure(rng.normal(size=(k, 2)), rng.dirichlet(np.ones(k))) for k in (4, 5, 6)]
    d = {(i, j): w2(ms[i], ms[j]) for i in range(3) for j in range(3)}
    assert all(d[i, i] < 1e-7 for i in range(3))
    assert all(d[i, j] == pytest.approx(d[j, i], abs=1e-12) for i in range(3) for j in range(3))
    assert d[0, 2] <= d[0, 1] + d[1, 2] + 1e-9


def test_warm_start_matches_cold():
    rng = np.random.default_rng(3)
    a = rng.dirichlet(np.ones(60))
    b = rng.dirichlet(np.ones(70))
    C = sqdist(rng.normal(size=(60, 2)), rng.normal(size=(70, 2)))
    cold = _solve_arrays(a, b, C, start="nw")
    warm = _solve_arrays(a, b, C, start="warm")
    vc = sum(f * C[i, j] for (i, j), f in zip(cold[0], cold[1]))
    vw = sum(f * C[i, j] for (i, j), f in zip(warm[0], warm[1]))
    assert vc == pytest.approx(vw, abs=1e-12)


@given(seeds, st.integers(1, 12), st.integers(1, 12), st.booleans())
def test_sparse_highs_matches_dense(seed, n, m, ties):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(n)) if not ties else np.full(n, 1 / n)
    b = rng.dirichlet(np.ones(m)) if not ties else np.full(m, 1 / m)
    C = rng.integers(0, 3, (n, m)).astype(float) if ties else rng.random((n, m))
    P, v, _, _ = highs_ot_sparse(a, b, C)
    assert v == pytest.approx(highs_ot(a, b, C)[1], abs=1e-10)
    assert np.allclose(P.sum(1), a, atol=1e-10) and np.allclose(P.sum(0), b, atol=1e-10)


def test_c_transform_tight_on_support():
    rng = np.random.default_rng(0)
    a = DiscreteMeasure(rng.normal(size=(6, 2)))
    b = DiscreteMeasure(rng.normal(size=(7, 2)))
    s = solve_ot(a, b)
    vc = c_transform(s.potentials.v, s.cost_matrix)
    assert np.all(vc >= s.potentials.u - 1e-9)
    r = s.coupling.rows
    assert np.allclose(vc[r], s.potentials.u[r], atol=1e-9)


def test_tabulated_cost():
    C = CostSpec("tabulated", table=np.array([[0.0, 1.0], [1.0, 0.0]]))
    a = DiscreteMeasure([[0.0], [1.0]])
    assert solve_ot(a, a, C).value == 0.0
