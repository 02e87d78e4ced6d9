import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from greedypursuit import atoms as A
from greedypursuit import geometry as G
from greedypursuit.errors import DomainError, UnsupportedError
from greedypursuit.harness import random_quadratic
from greedypursuit.objectives import LeastSquares, LogSumExp


def breakpoint_min_width(V):
    # a positive width is a max of concave pieces, so its minimum lies where two atoms tie
    cands = []
    for a, b in itertools.combinations(V, 2):
        diff = a - b
        if np.any(diff):
            n = np.array([-diff[1], diff[0]]) / np.linalg.norm(diff)
            cands += [n, -n]
    D = np.array(cands)
    return float(np.min(np.max(D @ V.T, axis=1)))


def sweep_min_width(V, n=200_000):
    ang = np.linspace(0, 2 * np.pi, n, endpoint=False)
    D = np.column_stack([np.cos(ang), np.sin(ang)])
    return float(np.min(np.max(D @ V.T, axis=1)))


def hull_inradius(V):
    # for a full-dimensional centrally symmetric polytope the minimal width is the facet distance
    hull = ConvexHull(V)
    return float(np.min(-hull.equations[:, -1]))


# -------------------------------------------------------------- widths


def test_directional_width():
    S = A.l1_vertices(2)
    assert G.directional_width(S, [1, 1]) == pytest.approx(1 / np.sqrt(2))
    assert G.directional_width(A.AtomSet([[1.0, 0.0]]), [-1, 0]) == -1.0
    with pytest.raises(DomainError):
        G.directional_width(S, [0, 0])


@pytest.mark.parametrize("d", range(2, 11))
def test_mdw_cross_polytope(d):
    est = G.mdw(A.l1_vertices(d), restarts=200, seed=0)
    assert abs(est.value - 1 / np.sqrt(d)) <= 1e-9
    assert est.method == ("exact-2d" if d == 2 else "multistart")


@pytest.mark.parametrize("theta", [0.1, 0.4, 0.9, 1.3, np.pi / 2])
def test_mdw_theta_pairs_match_sweep(theta):
    S = A.theta_pair(theta)
    est = G.mdw(S)
    assert est.value == pytest.approx(breakpoint_min_width(S.vectors), abs=1e-12)
    assert est.value == pytest.approx(sweep_min_width(S.vectors), abs=1e-4)
    assert est.value == pytest.approx(np.sin(theta / 2), abs=1e-9)


def test_mdw_single_and_collinear():
    # a lone atom spans a line whose other direction has width -1
    assert G.mdw(A.AtomSet([[1.0, 0.0]])).value == -1.0
    assert G.mdw(A.AtomSet([[1.0, 0.0], [-1.0, 0.0]])).value == 1.0
    est = G.mdw(A.AtomSet([[2.0, 0.0, 0.0], [-1.0, 0.0, 0.0]]))
    assert est.value == 1.0 and est.method == "exact-1d"


def test_mdw_non_symmetric_negative():
    assert G.mdw(A.AtomSet([[1.0, 0.0], [0.0, 1.0]])).value < 0


def test_mdw_in_a_subspace_is_intrinsic():
    # the cross polytope of R^2 embedded in R^3 still has width 1/sqrt(2)
    V = np.array([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]], dtype=float)
    R, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((3, 3)))
    assert G.mdw(A.AtomSet(V @ R.T)).value == pytest.approx(1 / np.sqrt(2), abs=1e-9)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 4), st.integers(4, 9))
def test_mdw_matches_hull_oracle(seed, d, n_half):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((max(n_half, d), d))
    S = A.symmetrize(A.AtomSet(B))
    est = G.mdw(S, restarts=200, seed=seed)
    truth = hull_inradius(S.vectors)
    assert est.value >= truth - 1e-9
    assert est.value <= truth + 1e-7
    lo, hi = est.bracket
    assert lo <= truth + 1e-12


def test_effective_inradius():
    assert G.effective_inradius(A.l1_vertices(3)) == pytest.approx(1 / np.sqrt(3), abs=1e-9)
    with pytest.raises(UnsupportedError, match="unsupported"):
        G.effective_inradius(A.simplex_vertices(3))


# -------------------------------------------------------------- coherence


def brute_coherence(B, m):
    n = B.shape[0]
    best = 0.0
    for i in range(n):
        others = [j for j in range(n) if j != i]
        for sub in itertools.combinations(others, m):
            best = max(best, sum(abs(B[i] @ B[j]) for j in sub))
    return best


def test_coherence_examples():
    assert G.cumulative_coherence(A.HalfDictionary(np.eye(3)), 1) == 0.0
    c = np.sqrt(0.5)
    B = np.array([[1.0, 0.0], [c, c]])
    assert G.cumulative_coherence(A.HalfDictionary(B), 1) == pytest.approx(c)
    with pytest.raises(DomainError):
        G.cumulative_coherence(A.HalfDictionary([[2.0, 0.0], [0.0, 1.0]]), 1)
    with pytest.raises(DomainError):
        G.cumulative_coherence(A.HalfDictionary(np.eye(3)), 3)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(3, 7), st.integers(2, 5))
def test_coherence_matches_enumeration(seed, n, d):
    rng = np.random.default_rng(seed)
    B = rng.standard_normal((n, d))
    B /= np.linalg.norm(B, axis=1, keepdims=True)
    half = A.HalfDictionary(B)
    for m in range(1, n):
        assert G.cumulative_coherence(half, m) == pytest.approx(brute_coherence(B, m), abs=1e-12)


def test_coherence_width_relation_on_random_dictionaries():
    rng = np.random.default_rng(3)
    for _ in range(10):
        d = int(rng.integers(2, 6))
        n = int(rng.integers(2, 8))
        B = rng.standard_normal((n, d))
        B /= np.linalg.norm(B, axis=1, keepdims=True)
        half = A.HalfDictionary(B)
        w = G.mdw(half.to_atom_set()).value
        assert G.cumulative_coherence(half, n - 1) >= 1 - n * w**2 - 1e-12


# -------------------------------------------------------------- curvature


def test_Cf_for_quadratics_is_pairwise_max():
    obj = random_quadratic(4, 2)
    S = A.AtomSet(np.random.default_rng(1).standard_normal((6, 4)))
    V = S.vectors
    brute = max((a - b) @ obj.Q @ (a - b) for a in V for b in V)
    est = G.curvature_Cf(obj, S)
    assert est.exact and est.value == pytest.approx(brute)
    assert est.value <= est.ceiling + 1e-12


def test_Cf_least_squares_cross_polytope():
    est = G.curvature_Cf(LeastSquares([1.0, 1.0]), A.l1_vertices(2))
    assert est.value == pytest.approx(4.0)


def test_Cf_sampled_below_ceiling():
    obj = LogSumExp(np.random.default_rng(0).standard_normal((5, 3)), 0.2)
    est = G.curvature_Cf(obj, A.l1_vertices(3), samples=200)
    assert not est.exact
    assert 0 < est.value <= est.ceiling


def test_CfMP_for_quadratics():
    obj = random_quadratic(3, 4)
    S = A.l1_vertices(3)
    est = G.curvature_CfMP(obj, S, rho=2.0)
    assert est.value == pytest.approx(4.0 * np.max(np.diag(obj.Q)))
    with pytest.raises(DomainError):
        G.curvature_CfMP(obj, S, rho=0.0)


def test_muFMP_bounds():
    obj = random_quadratic(3, 5)
    S = A.l1_vertices(3)
    est = G.strong_convexity_muFMP(obj, S, rho=2.0, samples=2000)
    assert est.floor == pytest.approx(obj.mu * 4.0 / 3.0)
    assert est.extra["floor_unscaled"] == pytest.approx(obj.mu / 3.0)
    assert est.value >= est.floor - 1e-12


# -------------------------------------------------------------- atomic norm


def test_atomic_norm_cross_polytope_is_l1():
    S = A.l1_vertices(4)
    X = np.random.default_rng(0).standard_normal((20, 4))
    np.testing.assert_allclose(G.atomic_norms(S, X), np.abs(X).sum(axis=1), rtol=1e-9)
    assert G.atomic_norm(S, np.zeros(4)) == 0.0


def test_atomic_norm_outside_span_is_infinite():
    S = A.AtomSet([[1.0, 0.0], [-1.0, 0.0]])
    assert G.atomic_norm(S, [0.0, 1.0]) == np.inf
    assert G.atomic_norm(A.AtomSet([[1.0, 0.0]]), [-1.0, 0.0]) == np.inf


def dual_gauge(V, x):
    # max <u, x> subject to <u, a> <= 1 for every atom
    res = linprog(-x, A_ub=V, b_ub=np.ones(V.shape[0]), bounds=(None, None), method="highs")
    return -res.fun


def test_atomic_norm_matches_dual_program():
    S = A.random_unit_sphere(6, 3, seed=2)
    for x in np.random.default_rng(1).standard_normal((8, 3)):
        assert G.atomic_norm(S, x) == pytest.approx(dual_gauge(S.vectors, x), rel=1e-9)


def test_atomic_norm_matches_bisection():
    S = A.random_unit_sphere(6, 3, seed=2)
    for x in np.random.default_rng(1).standard_normal((3, 3)):
        assert G.atomic_norm(S, x) == pytest.approx(G.atomic_norm_bisection(S, x), rel=1e-6)


def test_atomic_norm_homogeneous_and_subadditive():
    S = A.random_unit_sphere(8, 4, seed=3)
    rng = np.random.default_rng(4)
    for _ in range(10):
        x, y = rng.standard_normal((2, 4))
        nx, ny, nxy = G.atomic_norms(S, np.vstack([x, y, x + y]))
        assert G.atomic_norm(S, 3 * x) == pytest.approx(3 * nx, rel=1e-9)
        assert nxy <= nx + ny + 1e-9


# -------------------------------------------------------------- rate bounds


def test_rate_bound_values():
    b = G.rate_bound("thm1", L=1, diam=2, eps0=1)
    assert b.value(0) == pytest.approx(5.0)
    assert b.value(8) == pytest.approx(1.0)
    b = G.rate_bound("thm1", L=1, diam=2, eps0=1, delta=0.5)
    assert b.value(0) == pytest.approx(9.0)
    b = G.rate_bound("thm2", L=1, rho=1, radius=1, eps0=0)
    assert b.value(4) == pytest.approx(1.0)
    b = G.rate_bound("thm3", L=1, mu=1, mdw=0.5, radius=1)
    assert b.factor() == pytest.approx(0.75)
    b = G.rate_bound("thm6", Cf=4, eps0=1)
    assert b.value(0) == pytest.approx(5.0)
    assert G.rate_bound("thm7", CfMP=1, eps0=0).value(0) == pytest.approx(2.0)
    assert G.rate_bound("thm8", muFMP=1, CfMP=4).factor() == pytest.approx(0.75)
    assert G.rate_bound("cor2", d=10).factor(t=0) == pytest.approx(0.9)
    lower = G.rate_bound("thm4", L=1, mu=1)
    assert lower.factor(width=0.5, atom_norm=1.0) == pytest.approx(0.75)


def test_rate_bound_categories_and_errors():
    assert G.rate_bound("sublinear_fw", Cf=1, eps0=0).kind == "thm6"
    assert G.rate_bound("sublinear_fw", L=1, diam=1, eps0=0).kind == "thm1"
    assert G.rate_bound("linear_mp", L=1, mu=1, mdw=1, radius=1).is_linear
    assert G.rate_bound("lower_bound", L=1, mu=1).is_lower
    with pytest.raises(DomainError, match="mdw"):
        G.rate_bound("thm3", L=1, mu=1, radius=1)
    with pytest.raises(DomainError):
        G.rate_bound("thm9")
    with pytest.raises(DomainError):
        G.rate_bound("thm1", L=1, diam=1, eps0=0, delta=0)
    with pytest.raises(DomainError):
        G.rate_bound("thm3", L=1, mu=1, mdw=1, radius=1).value(1)


def test_sublinear_envelope_decreases():
    b = G.rate_bound("thm2", L=2, rho=1.5, radius=1, eps0=3, delta=0.5)
    vals = [b.value(t) for t in range(50)]
    assert all(a > c for a, c in zip(vals, vals[1:]))


# -------------------------------------------------------------- report


def test_analyze_reports_everything():
    S = A.l1_vertices(3)
    rep = G.analyze(S, random_quadratic(3, 0), rho=1.5, samples=200)
    d = rep.to_dict()
    assert d["mdw"]["value"] == pytest.approx(1 / np.sqrt(3), abs=1e-9)
    assert d["effective_inradius"] == pytest.approx(d["mdw"]["value"])
    assert set(d["coherence_profile"]) == {"1", "2"}
    assert d["Cf"]["exact"] and d["CfMP"]["exact"]
    assert d["muFMP"]["floor"] > 0
    with pytest.raises(UnsupportedError):
        G.analyze(A.simplex_vertices(3), inradius=True)
