import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from robin_shapes.geometry import (
    PlanarDomain,
    PolygonComponent,
    disjoint_union,
    rectangle,
    regular_polygon_disk,
    square_with_slit,
    unit_square,
    with_cracks,
)
from robin_shapes.mesh import (
    CRACK_LEFT,
    CRACK_RIGHT,
    OUTER,
    NodeBudgetError,
    mesh_from_text,
    mesh_quality,
    mesh_to_text,
    refine,
    triangle_adjacency_components,
    triangulate,
)


def test_square_mesh_basics(square_mesh):
    q = mesh_quality(square_mesh)
    assert q.min_angle >= 20.0 - 1e-9
    assert q.max_edge <= 0.1 + 1e-12
    assert math.isclose(square_mesh.triangle_areas().sum(), 1.0, rel_tol=1e-13)
    assert math.isclose(square_mesh.edge_lengths(OUTER).sum(), 4.0, rel_tol=1e-13)
    assert np.all(square_mesh.triangle_areas() > 0)


def test_slit_duplication(slit_mesh):
    m = slit_mesh
    left, right = m.edges_of(CRACK_LEFT), m.edges_of(CRACK_RIGHT)
    assert len(left) == len(right)
    assert_allclose(m.edge_lengths(CRACK_LEFT).sum(), 0.5, rtol=1e-13)
    assert_allclose(m.edge_lengths(CRACK_RIGHT).sum(), 0.5, rtol=1e-13)
    # interior crack nodes are duplicated, tips are not
    l, r = m.crack_pairs.T
    assert_allclose(m.nodes[l], m.nodes[r])
    assert len(m.crack_pairs) == len(left) - 1
    tips = {tuple(p) for p in [(0.25, 0.5), (0.75, 0.5)]}
    for node in set(left.ravel()) & set(right.ravel()):
        assert tuple(m.nodes[node]) in tips
    # no triangle uses both copies of a pair
    for a, b in m.crack_pairs:
        assert not np.any(np.isin(m.triangles, a).any(axis=1) & np.isin(m.triangles, b).any(axis=1))
    # left edges see the domain above (domain on the left of a -> b)
    d = m.nodes[left[:, 1]] - m.nodes[left[:, 0]]
    assert np.all(np.abs(d[:, 0]) > 0)
    assert triangle_adjacency_components(m) == 1


def test_boundary_orientation_keeps_domain_left(slit_mesh):
    m = slit_mesh
    centroid = m.nodes[m.triangles].mean(axis=1)
    for a, b in m.boundary_edges[:20]:
        mid = 0.5 * (m.nodes[a] + m.nodes[b])
        t = m.nodes[b] - m.nodes[a]
        normal = np.array([-t[1], t[0]])
        nearest = centroid[np.argmin(np.hypot(*(centroid - mid).T))]
        assert normal @ (nearest - mid) > 0


def test_hole_and_union():
    outer = np.array([[0, 0], [2, 0], [2, 2], [0, 2]], float)
    hole = np.array([[0.5, 0.5], [0.5, 1.5], [1.5, 1.5], [1.5, 0.5]], float)
    dom = disjoint_union(PlanarDomain((PolygonComponent(outer, (hole,)),)), unit_square(), (3.0, 0.0))
    mesh = triangulate(dom, 0.2)
    assert math.isclose(mesh.triangle_areas().sum(), 4.0, rel_tol=1e-12)
    assert math.isclose(mesh.edge_lengths(OUTER).sum(), 16.0, rel_tol=1e-12)
    assert triangle_adjacency_components(mesh) == 2


def test_polyline_crack_and_two_cracks():
    dom = with_cracks(rectangle(2.0, 1.0), [[[0.2, 0.3], [0.6, 0.6], [0.9, 0.3]], [[1.2, 0.5], [1.8, 0.5]]])
    mesh = triangulate(dom, 0.08)
    total = mesh.edge_lengths(CRACK_LEFT).sum()
    assert math.isclose(total, 0.5 + math.hypot(0.3, 0.3) + 0.6, rel_tol=1e-12)
    assert math.isclose(mesh.edge_lengths(CRACK_RIGHT).sum(), total, rel_tol=1e-12)
    assert triangle_adjacency_components(mesh) == 1


def test_deterministic():
    a = triangulate(square_with_slit(), 0.07)
    b = triangulate(square_with_slit(), 0.07)
    assert np.array_equal(a.nodes, b.nodes) and np.array_equal(a.triangles, b.triangles)


def test_coarse_h_clamped():
    mesh = triangulate(unit_square(), 10.0)
    assert mesh.n_triangles >= 2


def test_node_budget():
    with pytest.raises(NodeBudgetError):
        triangulate(unit_square(), 0.001, node_budget=1000)
    with pytest.raises(ValueError):
        triangulate(unit_square(), 0.0)


def test_refine_keeps_crack_structure(slit_mesh):
    fine = refine(slit_mesh)
    assert fine.n_triangles == 4 * slit_mesh.n_triangles
    assert math.isclose(fine.triangle_areas().sum(), 1.0, rel_tol=1e-13)
    assert len(fine.crack_pairs) == len(fine.edges_of(CRACK_LEFT)) - 1
    l, r = fine.crack_pairs.T
    assert_allclose(fine.nodes[l], fine.nodes[r])
    assert fine.h_target == slit_mesh.h_target / 2


def test_text_roundtrip(slit_mesh):
    values = np.arange(slit_mesh.n_nodes, dtype=float) / 7
    text = mesh_to_text(slit_mesh, values)
    assert text.startswith(f"nodes {slit_mesh.n_nodes} triangles {slit_mesh.n_triangles} bedges ")
    assert " CrackLeft " in text and " Outer " in text
    back, vals = mesh_from_text(text)
    assert np.array_equal(back.nodes, slit_mesh.nodes)
    assert np.array_equal(back.triangles, slit_mesh.triangles)
    assert np.array_equal(back.edge_kind, slit_mesh.edge_kind)
    assert np.array_equal(np.sort(back.crack_pairs, axis=0), np.sort(slit_mesh.crack_pairs, axis=0))
    assert_allclose(vals.ravel(), values)


def test_disk_polygon_mesh_size():
    mesh = triangulate(regular_polygon_disk(radius=1.0, sides=128).domain, 0.05)
    assert mesh_quality(mesh).max_edge <= 0.05 + 1e-12
