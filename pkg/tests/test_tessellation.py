from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import cKDTree

from defectforge.errors import NoBoundaryVertex, TooFewGenerators
from defectforge.geometry import cross2, points_in_convex, polygon_area
from defectforge.rng import RandomStream, uniform_points
from defectforge.tessellation import Window, boundary_vertices, build_voronoi, voronoi_from_generators

W = Window(0.0, 1.0, 0.0, 1.0)


def test_two_generators_split_into_half_squares():
    t = voronoi_from_generators([[0.0, 0.5], [1.0, 0.5]], W)
    assert t.m == 2
    assert t.cell_area(0) == pytest.approx(0.5, abs=1e-12)
    assert t.cell_area(1) == pytest.approx(0.5, abs=1e-12)
    assert len(t.edges) == 1
    a, b = t.vertices[t.edges[0]]
    assert a[0] == pytest.approx(0.5) and b[0] == pytest.approx(0.5)
    # the vertical bisector meets only the bottom and top borders
    with pytest.raises(NoBoundaryVertex):
        boundary_vertices(t, "left")


def test_stacked_generators_give_horizontal_bisector():
    t = voronoi_from_generators([[0.5, 0.25], [0.5, 0.75]], W)
    left = boundary_vertices(t, "left")
    right = boundary_vertices(t, "right")
    assert len(left) == 1 and len(right) == 1
    assert np.allclose(t.vertices[left[0]], [0.0, 0.5])
    assert np.allclose(t.vertices[right[0]], [1.0, 0.5])


def test_too_few_generators():
    with pytest.raises(TooFewGenerators):
        voronoi_from_generators([[0.5, 0.5]], W)
    with pytest.raises(TooFewGenerators):
        build_voronoi(RandomStream(0), W, 0.1, 1)


def test_seed42_areas_match_monte_carlo():
    t = build_voronoi(RandomStream(42), W, 0.1, 10)
    total = sum(t.cell_area(i) for i in t.nonempty)
    assert total == pytest.approx(1.0, abs=1e-6)
    pts = uniform_points(RandomStream(1), W, 100_000)
    owner = cKDTree(t.generators).query(pts)[1]
    for i in t.nonempty:
        frac = np.mean(owner == i)
        # binomial standard error is below 0.0016 for any cell
        assert abs(frac - t.cell_area(i)) < 0.008


def test_fig5_configuration_has_border_vertices():
    t = build_voronoi(RandomStream(42), W, 0.1, 1000)
    left = boundary_vertices(t, "left")
    right = boundary_vertices(t, "right")
    assert len(left) > 0 and len(right) > 0
    assert np.allclose(t.vertices[left, 0], 0.0)
    assert np.allclose(t.vertices[right, 0], 1.0)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 60))
def test_cells_tile_window_convex_and_nearest(seed, n):
    t = build_voronoi(RandomStream(seed), W, 0.1, n)
    total = 0.0
    for i in t.nonempty:
        poly = t.cell_polygon(i)
        a = polygon_area(poly)
        assert a > 0  # counter-clockwise
        e = np.roll(poly, -1, axis=0) - poly
        assert np.all(cross2(e, np.roll(e, -1, axis=0)) >= -1e-12)
        total += a
    assert total == pytest.approx(1.0, abs=1e-9)
    # nearest-generator property: random points fall in their owner's cell
    pts = uniform_points(RandomStream(seed).child("probe"), W, 200)
    owner = cKDTree(t.generators).query(pts)[1]
    for p, o in zip(pts, owner):
        assert len(t.cells[o]) >= 3
        assert points_in_convex(p, t.cell_polygon(o), tol=1e-9)[0]


def test_shared_vertices_are_global():
    t = build_voronoi(RandomStream(3), W, 0.1, 40)
    # every interior Voronoi edge borders exactly two cells
    count = {}
    for i in t.nonempty:
        c = t.cells[i]
        for a, b in zip(c, c[1:] + c[:1]):
            k = (min(a, b), max(a, b))
            count[k] = count.get(k, 0) + 1
    for a, b in t.edges:
        assert count[(a, b)] == 2
    for a, b in t.border_edges:
        assert count[(a, b)] == 1
