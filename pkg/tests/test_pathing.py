from __future__ import annotations

from itertools import product
from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.interpolate import CubicSpline
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra
from scipy.stats import chisquare

from defectforge.errors import Disconnected, InvalidDiscretization, InvalidPath
from defectforge.pathing import (
    Path,
    PathGraph,
    SplineSpec,
    filter_short_arcs,
    max_turning_angle,
    minimal_path,
    natural_cubic_eval,
    natural_cubic_second_derivatives,
    pick_endpoints,
    shortest_path,
    spline_path,
)
from defectforge.rng import RandomStream
from defectforge.tessellation import LEFT, RIGHT, Window, build_voronoi

W = Window(0.0, 1.0, 0.0, 1.0)


def test_single_edge():
    g = PathGraph([[0, 0], [1, 0]], [[0, 1]])
    p = shortest_path(g, 0, 1)
    assert list(p.ids) == [0, 1]
    assert g.weight(p.ids) == 1.0


def test_square_with_short_diagonal():
    V = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    g = PathGraph(V, [[0, 1], [1, 2], [2, 3], [3, 0]])
    # diagonal with weight 1.2 instead of its Euclidean length
    g.adj[0].append((2, 1.2))
    g.adj[2].append((0, 1.2))
    p = shortest_path(g, 0, 2)
    assert list(p.ids) == [0, 2]
    assert g.weight(p.ids) == 1.2


def test_same_start_and_end_rejected():
    g = PathGraph([[0, 0], [1, 0]], [[0, 1]])
    with pytest.raises(InvalidPath):
        shortest_path(g, 0, 0)


def test_disconnected():
    g = PathGraph([[0, 0], [1, 0], [2, 0], [3, 0]], [[0, 1], [2, 3]])
    with pytest.raises(Disconnected):
        shortest_path(g, 0, 3)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(5, 40))
def test_dijkstra_matches_scipy(seed, n):
    rng = np.random.default_rng(seed)
    V = rng.random((n, 2))
    E = {(i, j) for i in range(n) for j in range(i + 1, n) if rng.random() < 0.2} | {(i, i + 1) for i in range(n - 1)}
    E = np.array(sorted(E))  # csr_matrix would sum duplicate entries
    g = PathGraph(V, E)
    w = np.hypot(*(V[E[:, 0]] - V[E[:, 1]]).T)
    M = csr_matrix((np.r_[w, w], (np.r_[E[:, 0], E[:, 1]], np.r_[E[:, 1], E[:, 0]])), shape=(n, n))
    ref = dijkstra(M, indices=0)
    p = shortest_path(g, 0, n - 1)
    assert g.weight(p.ids) == pytest.approx(ref[n - 1], rel=1e-12)
    assert len(set(p.ids.tolist())) == len(p.ids)


def test_pick_endpoints_is_uniform_over_pairs():
    keys = [("x", 0, 1, LEFT), ("x", 1, 2, LEFT), ("x", 2, 3, LEFT), ("x", 3, 4, RIGHT), ("x", 4, 5, RIGHT)]
    verts = np.array([[0, 0.2], [0, 0.5], [0, 0.8], [1, 0.3], [1, 0.7]])
    fake = SimpleNamespace(vertex_keys=keys, vertices=verts)
    counts = {pair: 0 for pair in product(range(3), range(3, 5))}
    N = 10_000
    for s in range(N):
        counts[pick_endpoints(RandomStream(s), fake)] += 1
    freq = np.array(list(counts.values())) / N
    sigma = np.sqrt(1 / 6 * 5 / 6 / N)
    assert np.all(np.abs(freq - 1 / 6) < 3 * sigma)
    assert chisquare(list(counts.values())).pvalue > 1e-3


def test_pick_endpoints_singletons():
    fake = SimpleNamespace(vertex_keys=[("x", 0, 1, LEFT), ("v", 3), ("x", 4, 5, RIGHT)], vertices=np.array([[0, 0.5], [0.5, 0.5], [1, 0.5]]))
    assert pick_endpoints(RandomStream(9), fake) == (0, 2)


def test_minimal_path_spans_window():
    t = build_voronoi(RandomStream(42), W, 0.1, 1000)
    p = minimal_path(RandomStream(42).child("endpoints"), t)
    again = minimal_path(RandomStream(42).child("endpoints"), t)
    assert np.array_equal(p.vertices, again.vertices)
    assert p.vertices[0, 0] == 0.0 and p.vertices[-1, 0] == 1.0
    assert len(set(p.ids.tolist())) == len(p.ids)
    # chained arcs: arc i ends where arc i+1 starts
    assert np.allclose(p.vertices[:-1] + p.arcs, p.vertices[1:])


def test_filter_short_arcs_keeps_endpoints():
    V = np.array([[0, 0], [0.3, 0.0], [0.3001, 0.0], [0.6, 0.1], [1.0, 0.0]])
    p = filter_short_arcs(Path(V, np.arange(5)), 0.01)
    assert len(p.vertices) == 4
    assert np.array_equal(p.vertices[0], V[0]) and np.array_equal(p.vertices[-1], V[-1])
    assert np.all(p.arc_lengths >= 0.01 * np.mean(Path(V).arc_lengths))


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(3, 15))
def test_natural_spline_matches_scipy(seed, n):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.random(n)) * 10
    if np.min(np.diff(x)) < 1e-3:
        x = np.linspace(0, 10, n)
    y = rng.normal(size=n)
    m = natural_cubic_second_derivatives(x, y)
    xs = np.linspace(x[0], x[-1], 200)
    ref = CubicSpline(x, y, bc_type="natural")
    assert np.allclose(natural_cubic_eval(x, y, m, xs), ref(xs), atol=1e-8 * max(1, np.abs(y).max()))
    assert np.allclose(m, ref(x, 2), atol=1e-6 * max(1, np.abs(m).max()))


def test_two_control_points_give_a_straight_spline():
    p = spline_path(RandomStream(4), W, SplineSpec(2, 10))
    v = p.vertices
    assert len(v) == 10
    d = v[-1] - v[0]
    assert np.allclose((v[:, 0] - v[0, 0]) * d[1] - (v[:, 1] - v[0, 1]) * d[0], 0, atol=1e-12)
    assert max_turning_angle(p) == pytest.approx(0.0, abs=1e-9)


@pytest.mark.parametrize("spec", [SplineSpec(5, 50), SplineSpec(10, 100)])
def test_spline_discretisation(spec):
    p = spline_path(RandomStream(8), W, spec)
    assert len(p.vertices) == spec.discretization_count
    assert p.vertices[0, 0] == 0.0 and p.vertices[-1, 0] == 1.0
    assert np.all(np.diff(p.vertices[:, 0]) > 0)


def test_invalid_discretisation():
    with pytest.raises(InvalidDiscretization):
        spline_path(RandomStream(0), W, SplineSpec(5, 24))
    with pytest.raises(InvalidDiscretization):
        spline_path(RandomStream(0), W, SplineSpec(1, 10))
