from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull, Delaunay

from defectforge.delaunay import delaunay_convex, incircle, lawson_flip, orient
from defectforge.geometry import ear_clip, polygon_area


def _areas(P, T):
    A = P[T]
    return 0.5 * ((A[:, 1, 0] - A[:, 0, 0]) * (A[:, 2, 1] - A[:, 0, 1]) - (A[:, 1, 1] - A[:, 0, 1]) * (A[:, 2, 0] - A[:, 0, 0]))


def _empty_circles(P, T, tol=1e-9):
    bad = 0
    for a, b, c in T:
        ctr_r = _circumcircle(P[a], P[b], P[c])
        if ctr_r is None:
            continue
        ctr, r = ctr_r
        d = np.hypot(*(P - ctr).T)
        d[[a, b, c]] = np.inf
        bad += int(np.any(d < r * (1 - tol)))
    return bad


def _circumcircle(a, b, c):
    d = 2 * (a[0] * (b[1] - c[1]) + b[0] * (c[1] - a[1]) + c[0] * (a[1] - b[1]))
    if d == 0:
        return None
    ux = ((a @ a) * (b[1] - c[1]) + (b @ b) * (c[1] - a[1]) + (c @ c) * (a[1] - b[1])) / d
    uy = ((a @ a) * (c[0] - b[0]) + (b @ b) * (a[0] - c[0]) + (c @ c) * (b[0] - a[0])) / d
    ctr = np.array([ux, uy])
    return ctr, np.hypot(*(a - ctr))


def test_predicates():
    assert orient([0, 0], [1, 0], [0, 1]) > 0
    assert incircle([0, 0], [1, 0], [0, 1], [0.5, 0.5]) > 0
    assert incircle([0, 0], [1, 0], [0, 1], [2, 2]) < 0


def test_flip_fixes_a_bad_diagonal():
    # flat kite: only the short diagonal 1-3 is Delaunay
    K = np.array([[0, 0], [1, -0.2], [2, 0], [1, 0.2]], dtype=float)
    T = np.array([[0, 1, 3], [1, 2, 3]])
    assert lawson_flip(K, T).tolist() == T.tolist()
    T2 = np.array([[0, 1, 2], [0, 2, 3]])  # long diagonal gets flipped
    out = lawson_flip(K, T2)
    assert {frozenset(t) for t in out.tolist()} == {frozenset((0, 1, 3)), frozenset((1, 2, 3))}
    # a fixed edge is never flipped
    assert {frozenset(t) for t in lawson_flip(K, T2, [(0, 2)]).tolist()} == {frozenset((0, 1, 2)), frozenset((0, 2, 3))}


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10_000), r=st.integers(1, 30))
def test_convex_cell_triangulation_is_delaunay(seed, r):
    rng = np.random.default_rng(seed)
    pts = rng.random((10, 2))
    poly = pts[ConvexHull(pts).vertices]
    c = poly.mean(axis=0)
    # interior points as convex combinations of the corners
    w = rng.dirichlet(np.ones(len(poly)), r)
    inner = w @ poly
    P, T = delaunay_convex(poly, c, inner)
    a = _areas(P, T)
    assert np.all(a > 0)
    assert a.sum() == pytest.approx(polygon_area(poly), rel=1e-12)
    assert _empty_circles(P, T) == 0
    # same triangle count as an independent Delaunay (general position)
    assert len(T) == len(Delaunay(P).simplices)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(5, 20))
def test_lawson_on_ear_clipped_star_keeps_ring(seed, n):
    rng = np.random.default_rng(seed)
    ang = np.sort(rng.uniform(0, 2 * np.pi, n))
    rad = rng.uniform(0.4, 1.0, n)
    poly = np.column_stack([rad * np.cos(ang), rad * np.sin(ang)])
    if polygon_area(poly) <= 0:
        return
    T = ear_clip(poly)
    ring = [(k, (k + 1) % n) for k in range(n)]
    out = lawson_flip(poly, T, ring)
    assert len(out) == n - 2
    assert np.all(_areas(poly, out) > 0)
    assert _areas(poly, out).sum() == pytest.approx(polygon_area(poly), rel=1e-12)
    edges = {frozenset((t[k], t[(k + 1) % 3])) for t in out.tolist() for k in range(3)}
    assert all(frozenset(e) in edges for e in ring)
