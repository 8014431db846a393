import numpy as np
import pytest

from cellular_attractors.cells import (CellSequence, NestingError, StarMap, angular_shape,
                                       cells_from_dict, ellipsoid_cells, geometric_round_cells,
                                       homeomorphism_cells, neighbourhood_cells, round_cells,
                                       sample_directions, star_cells)
from cellular_attractors.geometry import FilledEllipsoid, sample_ball
from cellular_attractors.maps import AffineMap, _bisect_extent


def test_round_cells_extents_and_membership():
    c = round_cells([0.5, 0.25], 2)
    xi = sample_directions(2, 10, 0)
    np.testing.assert_allclose(c.extents(xi), np.tile([0.5, 0.25], (len(xi), 1)))
    assert c.contains(0, [[0.3, 0.3]])[0] and not c.contains(1, [[0.3, 0.3]])[0]
    assert c.outer_radius(0) == pytest.approx(0.5)
    c.check_nesting()


def test_nesting_error_reports_index():
    c = round_cells([0.5, 0.25, 0.4], 2)
    with pytest.raises(NestingError) as info:
        c.check_nesting()
    assert info.value.index == 2


def test_ellipsoid_extent_closed_form_vs_bisection():
    c = ellipsoid_cells([np.array([[0.6, 0.1], [0.0, 0.3]])])
    xi = sample_directions(2, 20, 1)
    closed = c.extents(xi)[:, 0]
    np.testing.assert_allclose(closed, _bisect_extent(c[0], xi, 1.0), rtol=1e-10)


def test_neighbourhood_cells_hug_the_body():
    body = FilledEllipsoid(np.zeros(3), np.array([[0.4], [0.0], [0.0]]))
    t = [0.2, 0.1, 0.05]
    c = neighbourhood_cells(body, t)
    for j, tj in enumerate(t):
        bnd = c.boundary_samples(j, 400, j)
        assert body.distance(bnd).max() <= tj * (1 + 1e-12)
    c.check_nesting()
    assert np.all(c.contains(2, body.sample(200, 3)))
    again = cells_from_dict(c.to_dict())
    np.testing.assert_allclose(again[1].matrix, c[1].matrix)
    with pytest.raises(ValueError):
        neighbourhood_cells(FilledEllipsoid(np.ones(3)), t)
    with pytest.raises(ValueError):
        neighbourhood_cells(body, [0.1, 0.2])


def test_star_cells_and_scaling():
    shape = angular_shape([1.0, 0.5, 0.8, 0.6])
    c = star_cells(shape, [0.5, 0.25], 2)
    p = sample_ball(2, 1.0, 300, 2)
    assert c[0].round_trip_error(p) < 1e-14
    s = c.scaled(2.0)
    xi = sample_directions(2, 10, 0)
    np.testing.assert_allclose(s.extents(xi), 2 * c.extents(xi))
    assert isinstance(c[0], StarMap)


def test_geometric_and_homeomorphism_cells():
    g = geometric_round_cells(0.5, 0.5, 4, 2)
    assert g.outer_radius(3) == pytest.approx(0.0625)
    h = homeomorphism_cells(AffineMap.scaling(0.5, 2), 1, 3, 1.0)
    assert h.outer_radius(2) == pytest.approx(0.125, rel=2e-3)
    h.check_nesting()
    assert scaled_dict_roundtrip(round_cells([0.5], 2).scaled(3.0))


def scaled_dict_roundtrip(seq: CellSequence) -> bool:
    back = cells_from_dict(seq.to_dict())
    xi = sample_directions(seq.dim, 8, 0)
    return np.allclose(back.extents(xi), seq.extents(xi))
