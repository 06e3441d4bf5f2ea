import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from atrx.errors import InvalidInputError
from atrx.linalg import Point2D, convex_hull_2d, hull_contains, orthogonality_error, svd
from oracles import eigs_sym2, eigs_sym3, point_in_polygon


def _check_factors(m, f, tol=1e-9):
    m = np.asarray(m, dtype=float)
    assert len(f.singular_values) == min(m.shape)
    assert orthogonality_error(f.left) <= tol
    assert orthogonality_error(f.right) <= tol
    assert np.linalg.norm(f.reconstruct() - m) <= tol
    assert np.all(f.singular_values >= 0)
    assert np.all(np.diff(f.singular_values) <= 0)


class TestSvd:
    def test_identity(self):
        f = svd(np.eye(2))
        np.testing.assert_allclose(f.singular_values, [1.0, 1.0])
        _check_factors(np.eye(2), f)

    def test_single_row(self):
        f = svd([[1.0, 1.0]])
        np.testing.assert_allclose(f.singular_values, [math.sqrt(2)], rtol=1e-15)
        _check_factors([[1.0, 1.0]], f)

    def test_random_tall_reconstruction(self):
        m = np.random.default_rng(11).normal(size=(3, 2))
        _check_factors(m, svd(m))

    @pytest.mark.parametrize("shape", [(1, 1), (1, 4), (4, 1), (2, 3), (3, 3), (5, 2), (8, 8)])
    def test_shapes(self, shape):
        m = np.random.default_rng(sum(shape)).normal(size=shape)
        _check_factors(m, svd(m))

    def test_rank_deficient_keeps_zero(self):
        m = np.array([[1.0, 2.0], [2.0, 4.0]])
        f = svd(m)
        assert f.singular_values[1] == 0.0
        _check_factors(m, f)

    def test_zero_matrix(self):
        f = svd(np.zeros((2, 3)))
        np.testing.assert_array_equal(f.singular_values, [0.0, 0.0])
        _check_factors(np.zeros((2, 3)), f)

    def test_sign_convention(self):
        m = np.random.default_rng(5).normal(size=(3, 3))
        f = svd(m)
        for row in f.right:
            first = row[np.abs(row) > 1e-12][0]
            assert first > 0

    def test_non_finite_rejected(self):
        with pytest.raises(InvalidInputError):
            svd([[1.0, np.nan]])
        with pytest.raises(InvalidInputError):
            svd([[np.inf]])

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_characteristic_polynomial_2x2(self, seed):
        rng = np.random.default_rng(seed)
        for shape in [(2, 2), (3, 2), (2, 3)]:
            m = rng.normal(size=shape)
            gram = m.T @ m if shape[0] >= shape[1] else m @ m.T
            expected = np.sqrt(np.maximum(eigs_sym2(gram), 0))
            np.testing.assert_allclose(svd(m).singular_values, expected, atol=1e-8)

    @pytest.mark.parametrize("seed", range(10))
    def test_matches_characteristic_polynomial_3x3(self, seed):
        m = np.random.default_rng(100 + seed).normal(size=(3, 3))
        expected = np.sqrt(np.maximum(eigs_sym3(m.T @ m), 0))
        np.testing.assert_allclose(svd(m).singular_values, expected, atol=1e-8)

    @settings(max_examples=60, deadline=None)
    @given(
        st.integers(1, 5),
        st.integers(1, 5),
        st.integers(0, 2**32 - 1),
    )
    def test_property_reconstruction(self, r, c, seed):
        m = np.random.default_rng(seed).normal(size=(r, c)) * 10 ** np.random.default_rng(seed).uniform(-3, 3)
        f = svd(m)
        scale = max(1.0, np.linalg.norm(m))
        assert np.linalg.norm(f.reconstruct() - m) <= 1e-9 * scale
        assert orthogonality_error(f.left) <= 1e-9
        assert orthogonality_error(f.right) <= 1e-9


def _pts(seq):
    return [Point2D(*p) for p in seq]


class TestConvexHull:
    def test_square(self):
        hull = convex_hull_2d([(0, 0), (1, 0), (0, 1), (1, 1)])
        assert hull == _pts([(0, 0), (1, 0), (1, 1), (0, 1)])

    def test_interior_point_dropped(self):
        pts = [(0, 0), (2, 0), (1, 0.5), (0, 2)]
        hull = convex_hull_2d(pts)
        assert hull == _pts([(0, 0), (2, 0), (0, 2)])
        poly = [(p.x, p.y) for p in hull]
        assert point_in_polygon((1, 0.5), poly)
        assert hull_contains(hull, (1, 0.5))

    def test_single_point(self):
        assert convex_hull_2d([(0.3, 0.7)]) == [Point2D(0.3, 0.7)]

    def test_collinear_points_reduce_to_segment(self):
        assert convex_hull_2d([(0, 0), (1, 1), (2, 2)]) == _pts([(0, 0), (2, 2)])

    def test_counterclockwise(self):
        hull = convex_hull_2d([(0, 0), (3, 0), (3, 1), (1, 2), (0, 1)])
        area = sum(a.x * b.y - b.x * a.y for a, b in zip(hull, hull[1:] + hull[:1]))
        assert area > 0

    def test_empty_rejected(self):
        with pytest.raises(InvalidInputError):
            convex_hull_2d([])

    def test_negative_rate_rejected(self):
        with pytest.raises(InvalidInputError):
            Point2D(-1.0, 0.0)

    @settings(max_examples=100, deadline=None)
    @given(st.lists(st.tuples(st.floats(0, 10), st.floats(0, 10)), min_size=1, max_size=30))
    def test_idempotent_and_contains_inputs(self, pts):
        hull = convex_hull_2d(pts)
        assert convex_hull_2d(hull) == hull
        for p in pts:
            assert hull_contains(hull, p, 1e-12)
        if len(hull) >= 3:
            poly = [(p.x, p.y) for p in hull]
            for p in pts:
                assert point_in_polygon(p, poly)
