import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from greedypursuit.errors import ConvergenceError
from greedypursuit.subproblems import (
    golden_section,
    least_squares_over_span,
    project_onto_convex_hull,
    project_simplex,
    span_coefficients,
)


def test_simplex_projection_matches_small_qp_oracle():
    rng = np.random.default_rng(0)
    for _ in range(30):
        v = rng.standard_normal(3) * 2
        w = project_simplex(v)
        # brute force on a fine grid of the 2-simplex
        g = np.linspace(0, 1, 401)
        a, b = np.meshgrid(g, g)
        mask = a + b <= 1
        P = np.column_stack([a[mask], b[mask], 1 - a[mask] - b[mask]])
        best = P[np.argmin(np.sum((P - v) ** 2, axis=1))]
        assert np.sum((w - v) ** 2) <= np.sum((best - v) ** 2) + 1e-12
        assert w.sum() == pytest.approx(1.0) and np.all(w >= 0)


def test_hull_projection_of_member_is_member():
    M = np.array([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
    p, w = project_onto_convex_hull(M, M[1])
    np.testing.assert_allclose(p, M[1], atol=1e-10)
    np.testing.assert_allclose(w, [0, 1, 0], atol=1e-9)


def test_hull_projection_nearest_vertex():
    p, w = project_onto_convex_hull(np.eye(2), [2.0, 0.0])
    np.testing.assert_allclose(p, [1, 0], atol=1e-10)


def test_hull_projection_segment_midpoint():
    p, w = project_onto_convex_hull(np.eye(2), [0.3, 0.3])
    np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-10)
    np.testing.assert_allclose(w, [0.5, 0.5], atol=1e-10)


def segment_oracle(a, b, target, n=200_001):
    s = np.linspace(0, 1, n)[:, None]
    P = (1 - s) * a + s * b
    return P[np.argmin(np.sum((P - target) ** 2, axis=1))]


def test_hull_projection_matches_segment_grid():
    rng = np.random.default_rng(1)
    for _ in range(10):
        a, b, t = rng.standard_normal((3, 3))
        p, _ = project_onto_convex_hull([a, b], t)
        np.testing.assert_allclose(p, segment_oracle(a, b, t), atol=1e-4)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 10_000), st.integers(2, 8), st.integers(2, 5))
def test_hull_projection_optimality(seed, k, d):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((k, d))
    b = 2 * rng.standard_normal(d)
    p, w = project_onto_convex_hull(M, b)
    assert w.sum() == pytest.approx(1.0, abs=1e-12) and np.all(w >= 0)
    np.testing.assert_allclose(w @ M, p, atol=1e-12)
    # variational inequality: <b - p, m - p> <= 0 for every member
    assert np.max((M - p) @ (b - p)) <= 1e-8


def test_hull_projection_with_duplicates():
    M = np.array([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    p, w = project_onto_convex_hull(M, [0.3, 0.3])
    np.testing.assert_allclose(p, [0.5, 0.5], atol=1e-10)
    assert w.sum() == pytest.approx(1.0)


def test_hull_projection_iteration_cap():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((30, 10))
    with pytest.raises(ConvergenceError) as exc:
        project_onto_convex_hull(M, 5 * rng.standard_normal(10), max_iter=2)
    assert exc.value.residual is not None


def test_span_projection_examples():
    np.testing.assert_allclose(least_squares_over_span(np.eye(2), [3.0, -1.0]), [3, -1], atol=1e-14)
    np.testing.assert_allclose(least_squares_over_span([[1.0, 0.0]], [1.0, 2.0]), [1, 0], atol=1e-14)
    np.testing.assert_allclose(least_squares_over_span([[1.0, 0.0], [1.0, 0.0]], [3.0, 1.0]), [3, 0], atol=1e-14)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6), st.integers(2, 6))
def test_span_residual_orthogonal(seed, k, d):
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((k, d))
    M = np.vstack([M, M[:1]])  # force rank deficiency
    b = rng.standard_normal(d)
    p = least_squares_over_span(M, b)
    assert np.max(np.abs(M @ (b - p))) <= 1e-10
    c = span_coefficients(M, b)
    np.testing.assert_allclose(c @ M, p, atol=1e-10)


def test_golden_section():
    assert golden_section(lambda s: (s - 0.3) ** 2) == pytest.approx(0.3, abs=1e-9)
    assert golden_section(lambda s: (s - 2.0) ** 2) == 1.0
    assert golden_section(lambda s: s) == 0.0
