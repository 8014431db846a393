import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cellular_attractors.geometry import (FilledEllipsoid, RadialProfile, as_cloud, cloud_from_json,
                                          cloud_to_json, grid_points, hausdorff_semidist,
                                          nearest_distance, pad_zeros, profile_eval, rng,
                                          sample_annulus, sample_ball, sample_sphere)


def brute_semidist(A, B):
    """Pure-Python O(n^2) oracle, accumulating squares coordinate by coordinate."""
    worst = 0.0
    for a in A:
        best = math.inf
        for b in B:
            s = 0.0
            for i in range(len(a)):
                d = float(a[i]) - float(b[i])
                s += d * d
            best = min(best, math.sqrt(s))
        worst = max(worst, best)
    return worst


def test_profile_prepends_origin_and_interpolates():
    p = RadialProfile([(1.0, 2.0), (2.0, 3.0)], tail_slope=0.5)
    assert p(0.0) == 0.0
    assert p(0.5) == pytest.approx(1.0)
    assert p(1.5) == pytest.approx(2.5)
    assert p(4.0) == pytest.approx(4.0)
    np.testing.assert_allclose(p.slopes(), [2.0, 1.0, 0.5])


@pytest.mark.parametrize("bad", [[(1.0, 1.0), (0.5, 2.0)], [(1.0, 1.0), (2.0, 1.0)], [(0.0, 1.0)]])
def test_profile_rejects_non_monotone(bad):
    with pytest.raises(ValueError):
        RadialProfile(bad)


def test_profile_rejects_bad_tail_and_negative_radius():
    with pytest.raises(ValueError):
        RadialProfile([(1.0, 1.0)], tail_slope=0.0)
    with pytest.raises(ValueError):
        profile_eval(RadialProfile.identity(), -1.0)


def test_profile_serialization_round_trip():
    p = RadialProfile([(0.3, 0.1), (1.0, 2.0)], 3.0)
    q = RadialProfile.from_dict(p.to_dict())
    np.testing.assert_array_equal(p.breakpoints, q.breakpoints)
    assert q.tail_slope == 3.0


@st.composite
def profiles(draw):
    n = draw(st.integers(1, 6))
    dr = draw(st.lists(st.floats(0.01, 2.0), min_size=n, max_size=n))
    dv = draw(st.lists(st.floats(0.01, 2.0), min_size=n, max_size=n))
    tail = draw(st.floats(0.05, 5.0))
    return RadialProfile(np.column_stack([np.cumsum(dr), np.cumsum(dv)]), tail)


@settings(max_examples=60, deadline=None)
@given(profiles(), st.lists(st.floats(0.0, 50.0), min_size=1, max_size=30))
def test_profile_inverse_round_trip(p, rs):
    r = np.asarray(rs)
    np.testing.assert_allclose(p.inverse()(p(r)), r, rtol=1e-12, atol=1e-12)


@settings(max_examples=60, deadline=None)
@given(profiles())
def test_profile_strictly_increasing(p):
    r = np.linspace(0, 3 * p.radii[-1], 400)
    assert np.all(np.diff(p(r)) > 0)


def test_semidist_is_asymmetric():
    A = np.array([[0.0, 0.0]])
    B = np.array([[0.0, 0.0], [3.0, 4.0]])
    assert hausdorff_semidist(A, B) == 0.0
    assert hausdorff_semidist(B, A) == 5.0


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 12), st.integers(1, 12), st.integers(1, 4), st.integers(0, 10**6))
def test_semidist_matches_oracle(na, nb, dim, seed):
    g = rng(seed)
    A, B = g.standard_normal((na, dim)), g.standard_normal((nb, dim))
    assert hausdorff_semidist(A, B, chunk=3) == brute_semidist(A, B)


def test_nearest_distance_agrees_with_semidist():
    g = rng(3)
    A, B = g.standard_normal((40, 3)), g.standard_normal((25, 3))
    assert nearest_distance(A, B).max() == pytest.approx(hausdorff_semidist(A, B), rel=1e-12)


def test_samplers_respect_radii():
    s = sample_sphere(4, 2.0, 500, 0)
    np.testing.assert_allclose(np.linalg.norm(s, axis=1), 2.0, rtol=1e-14)
    b = sample_ball(3, 1.5, 500, 1)
    assert np.linalg.norm(b, axis=1).max() < 1.5
    a = sample_annulus(2, 0.5, 1.0, 500, 2)
    n = np.linalg.norm(a, axis=1)
    assert n.min() >= 0.5 and n.max() <= 1.0
    np.testing.assert_array_equal(sample_ball(3, 1.0, 10, 7), sample_ball(3, 1.0, 10, 7))
    assert np.linalg.norm(grid_points(3, 1.0, 64), axis=1).max() <= 1.0


def test_cloud_helpers():
    c = as_cloud([1.0, 2.0])
    assert c.shape == (1, 2)
    with pytest.raises(ValueError):
        as_cloud([[1.0, 2.0]], dim=3)
    np.testing.assert_array_equal(cloud_from_json(cloud_to_json([[1.0, 2.5]])), [[1.0, 2.5]])
    np.testing.assert_array_equal(pad_zeros([[1.0, 2.0]]), [[1.0, 2.0, 0.0]])
    np.testing.assert_array_equal(pad_zeros([[1.0, 2.0]], 2), [[1.0, 2.0, 0.0, 0.0]])


def segment_distance(p, a, b):
    t = np.clip(((p - a) @ (b - a)) / ((b - a) @ (b - a)), 0, 1)
    return np.linalg.norm(p - (a + t[:, None] * (b - a)), axis=1)


def test_ellipsoid_distance_segment_oracle():
    c = np.array([0.1, -0.2, 0.3])
    v = np.array([0.3, 0.4, 0.0])
    E = FilledEllipsoid(c, v)
    p = rng(4).standard_normal((300, 3))
    np.testing.assert_allclose(E.distance(p), segment_distance(p, c - v, c + v), atol=1e-12)


def test_ellipsoid_distance_disk_oracle():
    # oracle: dense boundary parametrization of a planar ellipse, points outside it
    frame = np.array([[0.8, 0.0], [0.0, 0.3], [0.0, 0.0]])
    E = FilledEllipsoid(np.zeros(3), frame)
    theta = np.linspace(0, 2 * np.pi, 200001)
    rim = np.column_stack([0.8 * np.cos(theta), 0.3 * np.sin(theta), 0 * theta])
    p = rng(5).uniform(-2, 2, (20, 3))
    p = p[(p[:, 0] / 0.8) ** 2 + (p[:, 1] / 0.3) ** 2 > 1]
    oracle = np.array([np.linalg.norm(rim - q, axis=1).min() for q in p])
    np.testing.assert_allclose(E.distance(p), oracle, atol=1e-5)


def test_ellipsoid_inside_and_point():
    E = FilledEllipsoid(np.zeros(2), np.eye(2))
    assert E.distance([[0.3, 0.4]])[0] == 0.0
    P = FilledEllipsoid([1.0, 1.0])
    assert P.rank == 0 and P.distance([[4.0, 5.0]])[0] == 5.0
    assert E.padded(2).dim == 4 and E.padded(2).max_norm() == pytest.approx(1.0)
    Q = FilledEllipsoid.from_dict(E.mapped(2 * np.eye(2), [1.0, 0.0]).to_dict())
    assert Q.max_norm() == pytest.approx(3.0)
    with pytest.raises(ValueError):
        FilledEllipsoid(np.zeros(2), np.array([[1.0, 2.0], [2.0, 4.0]]))
