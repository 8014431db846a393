import numpy as np
import pytest

from cellular_attractors.dynamics import SampledSystem
from cellular_attractors.geometry import sample_ball, sample_sphere
from cellular_attractors.klee import (KleeExtension, build_compress, klee_extend, klee_from_extensions,
                                     klee_inverse_eval)
from cellular_attractors.maps import AffineMap


def rotation_system(n=2, count=24):
    ang = 2 * np.pi * np.arange(count) / count
    dom = 0.5 * np.column_stack([np.cos(ang), np.sin(ang)])
    img = np.roll(dom, -3, axis=0)
    return SampledSystem(dom, img)


def identity_system():
    x = np.array([[0.0, 0.0], [0.3, 0.1], [-0.2, 0.4]])
    return SampledSystem(x, x)


def test_compress_examples():
    c = build_compress(0.5, 1.0, 2)
    p = sample_ball(2, 0.5, 500, 0)
    np.testing.assert_array_equal(c(p), p)
    np.testing.assert_allclose(c([4.0, 0.0]), [2.0, 0.0])
    q = sample_ball(2, 3.0, 1000, 1)
    assert np.linalg.norm(c(q), axis=1).max() <= 1.5
    with pytest.raises(ValueError):
        build_compress(1.0, 1.0, 2)


class IdentityExtension:
    dim = 2

    def __call__(self, p):
        return np.array(p, dtype=float)


def test_identity_f_hand_composition():
    ext = klee_from_extensions(IdentityExtension(), IdentityExtension(), 1.0, 0.75)
    x = np.array([[0.3, 0.1]])
    y = np.array([[0.05, -0.02]])
    # with phi = psi = id near these points: g(x, y) = (x + y, -y/2)
    np.testing.assert_allclose(ext.g(np.hstack([x, y])), np.hstack([x + y, -y / 2]), atol=1e-15)
    np.testing.assert_array_equal(ext.g(np.hstack([x, 0 * y])), np.hstack([x, 0 * y]))
    np.testing.assert_allclose(ext.g.inverse(np.hstack([x + y, -y / 2])), np.hstack([x, y]), atol=1e-15)
    # the sampled identity system is reproduced exactly at its anchors
    s = identity_system()
    sampled = klee_extend(s, 1.0)
    z = np.hstack([s.domain, np.zeros_like(s.domain)])
    np.testing.assert_array_equal(sampled(z), z)


def test_anchor_conjugation_exact():
    s = rotation_system()
    ext = klee_extend(s, 1.0)
    z = np.zeros_like(s.domain)
    np.testing.assert_array_equal(ext(np.hstack([s.domain, z])), np.hstack([s.image, z]))


def test_component_inverses():
    ext = klee_extend(rotation_system(), 1.0)
    p = np.hstack([sample_ball(2, 2.0, 1000, 2), sample_ball(2, 2.0, 1000, 3)])
    for m in (ext.f1, ext.f2, ext.g, ext.fhat):
        assert m.round_trip_error(p) < 1e-12
    c2 = np.hstack([ext.c(p[:, :2]), ext.c(p[:, 2:])])
    np.testing.assert_allclose(np.hstack([ext.c.inverse(c2[:, :2]), ext.c.inverse(c2[:, 2:])]), p, atol=1e-14)
    np.testing.assert_allclose(klee_inverse_eval(ext, ext(p)), p, atol=1e-12)
    with pytest.raises(ValueError):
        klee_inverse_eval(ext, np.zeros(3))


@pytest.mark.parametrize("r", [1.0, 2.0, 4.0])
def test_ball_invariance_and_chain(r):
    ext = klee_extend(rotation_system(), 1.0)
    p = np.vstack([np.hstack([sample_sphere(2, r, 250, 4), sample_sphere(2, r, 250, 5)]),
                   np.hstack([sample_ball(2, r, 250, 6), sample_ball(2, r, 250, 7)])])
    bx, by = ext.blocks(ext(p))
    assert bx.max() <= r + 1e-9 and by.max() <= r + 1e-9
    if r <= 2.0:
        fx, fy = ext.blocks(ext.f1(p))
        assert fx.max() <= r + 1e-9 and fy.max() <= 2 * r + 1e-9
        gx, gy = ext.blocks(ext.g(p))
        assert gx.max() <= 2 * r + 1e-9 and gy.max() <= 2 * r + 1e-9


def test_rejects_escaping_samples():
    s = SampledSystem([[0.0, 0.0]], [[1.2, 0.0]])
    with pytest.raises(ValueError):
        klee_extend(s, 1.0)


def test_serialization():
    ext = klee_extend(rotation_system(), 1.0)
    back = KleeExtension.from_dict(ext.to_dict())
    p = sample_ball(4, 2.0, 200, 8)
    np.testing.assert_array_equal(back(p), ext(p))
    assert ext.R_star == pytest.approx(0.75)
    assert isinstance(ext.c.profile.tail_slope, float) and not isinstance(ext.c, AffineMap)
