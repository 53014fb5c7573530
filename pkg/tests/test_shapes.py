import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from robin_shapes.geometry import area, generalized_perimeter
from robin_shapes.shapes import (
    InfeasibleShapeError,
    MultiComponent,
    PolygonVertices,
    RadialFourier,
    SlitFamily,
    params_from_dict,
    params_to_dict,
    perturbed_circle,
    random_star,
    realize,
)

SQUARE = PolygonVertices(((0, 0), (1, 0), (1, 1), (0, 1)))


def test_circle_family():
    dom = realize(RadialFourier((1.0,), n_vertices=256))
    assert math.isclose(area(dom), 0.5 * 256 * math.sin(2 * math.pi / 256), rel_tol=1e-13)


def test_vector_roundtrip():
    p = perturbed_circle(3)
    x, lo, hi = p.vector()
    assert len(x) == 4 and np.all(lo < x) and np.all(x < hi)
    assert p.with_vector(x) == p


def test_default_search_skips_modes_zero_and_one():
    p = RadialFourier((1.0, 0.1, 0.2), (0.3, 0.4))
    assert_allclose(p.vector()[0], [0.2, 0.4])


def test_nonpositive_radius():
    with pytest.raises(InfeasibleShapeError, match="nonpositive radius"):
        realize(RadialFourier((1.0, 0.0, 1.5)))


def test_bowtie_polygon_infeasible():
    with pytest.raises(InfeasibleShapeError):
        realize(PolygonVertices(((0, 0), (1, 1), (1, 0), (0, 1))))


def test_multi_component():
    p = MultiComponent((SQUARE, SQUARE), ((0, 0), (3, 0)))
    dom = realize(p)
    assert len(dom.components) == 2 and area(dom) == 2.0
    assert p.with_vector(p.vector()[0]) == p
    with pytest.raises(InfeasibleShapeError):
        realize(MultiComponent((SQUARE, SQUARE), ((0, 0), (0.5, 0))))


def test_slit_family():
    p = SlitFamily(SQUARE, (((0.25, 0.5), (0.75, 0.5)),))
    dom = realize(p)
    assert generalized_perimeter(dom) == 5.0
    assert p.with_vector(p.vector()[0]) == p


def test_scaled_realizes_scaled_domain():
    p = perturbed_circle(1)
    assert math.isclose(area(realize(p.scaled(2.0))), 4 * area(realize(p)), rel_tol=1e-12)


@pytest.mark.parametrize("p", [perturbed_circle(0), SQUARE, MultiComponent((SQUARE,), ((1, 2),)),
                               SlitFamily(SQUARE, (((0.25, 0.5), (0.75, 0.5)),))])
def test_dict_roundtrip(p):
    assert params_from_dict(params_to_dict(p)) == p


def test_random_star_seeded():
    assert random_star(5) == random_star(5)
    assert random_star(5) != random_star(6)
    for s in range(20):
        realize(random_star(s))
