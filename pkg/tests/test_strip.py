from __future__ import annotations

from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defectforge.dilation import LEFT, RIGHT, TOP, dilate
from defectforge.errors import DegenerateContour
from defectforge.geometry import ear_clip, polygon_area
from defectforge.mesh import validate
from defectforge.pathing import Path
from defectforge.strip import assemble_trench, cover_top, end_caps, sweep_band, triangulate_side


def _area(P, tris):
    A = P[tris]
    return 0.5 * np.sum(
        (A[:, 1, 0] - A[:, 0, 0]) * (A[:, 2, 1] - A[:, 0, 1]) - (A[:, 1, 1] - A[:, 0, 1]) * (A[:, 2, 0] - A[:, 0, 0])
    )


def test_single_arc_gives_two_case1_triangles():
    s = triangulate_side(2, [(0, TOP)])
    assert len(s.triangles) == 2 and s.cases == [1, 1]


def test_swallowed_middle_arc_gets_a_case4_fan():
    s = triangulate_side(4, [(0, TOP), (2, TOP)])
    assert s.cases == [1, 1, 4, 1, 1]
    assert len(s.triangles) == 2 * 2 + 1


def test_swallowed_middle_arc_from_a_real_dilation():
    # short bottom arc of a sharp V: on the inner (upper) side its quad is
    # buried under both neighbours and leaves no trace on the contour
    P = np.array([[0.0, 0.8], [0.48, 0.2], [0.52, 0.2], [1.0, 0.8]])
    dp = dilate(Path(P), [0.1, 0.1, 0.1], 0.0, 1.0)
    assert [i for i, _ in dp.upper.origins] == [0, 2]
    s = triangulate_side(4, dp.upper.origins)
    assert s.cases == [1, 1, 4, 1, 1]
    # the fan triangle joins the buried arc to the contour corner
    assert s.triangles[2].tolist() == [1, 2, 5]
    assert set(triangulate_side(4, dp.lower.origins).cases) == {1}


def test_lateral_edges_are_case3():
    s = triangulate_side(3, [(0, TOP), (0, RIGHT), (1, TOP)])
    assert s.cases.count(3) == 1
    s = triangulate_side(3, [(0, TOP), (1, LEFT), (1, TOP)])
    assert s.cases.count(3) == 1


@settings(max_examples=40, deadline=None)
@given(k=st.integers(0, 30), seed=st.integers(0, 1000))
def test_straight_path_is_all_case1(k, seed):
    rng = np.random.default_rng(seed)
    P = np.column_stack([np.linspace(0, 1, k + 2), np.zeros(k + 2)])
    l = np.full(k + 1, rng.uniform(0.01, 0.1))
    dp = dilate(Path(P), l, 0.0, 1.0)
    for side in (dp.upper, dp.lower):
        s = triangulate_side(k + 2, side.origins)
        assert len(s.triangles) == 2 * (k + 1)
        assert set(s.cases) == {1}


def _brute_sweeps(A, B):
    """Every monotone sweep with positive, empty triangles, and its cost."""
    na, nb = len(A), len(B)
    V = np.vstack([A, B])
    out = []
    for steps in combinations(range(na + nb - 2), na - 1):
        i = j = 0
        tris, cost = [], 0.0
        for s in range(na + nb - 2):
            if s in steps:
                tris.append((i, i + 1, na + j))
                i += 1
                cost += np.hypot(*(A[i] - B[j]))
            else:
                tris.append((i, na + j + 1, na + j))
                j += 1
                cost += np.hypot(*(A[i] - B[j]))
        good = True
        for t in tris:
            a, b, c = V[list(t)]
            if _area(V, np.array([t])) <= 0:
                good = False
                break
            others = np.delete(V, list(t), axis=0)
            M = np.column_stack([b - a, c - a])
            lam = np.linalg.solve(M, (others - a).T).T
            if np.any((lam[:, 0] >= 0) & (lam[:, 1] >= 0) & (lam.sum(axis=1) <= 1)):
                good = False
                break
        if good:
            out.append((cost, tris))
    return out


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10_000), n=st.integers(2, 6), m=st.integers(2, 6))
def test_sweep_band_against_enumeration(seed, n, m):
    rng = np.random.default_rng(seed)
    xa = np.concatenate([[0], np.sort(rng.uniform(0.02, 0.98, n - 2)), [1]])
    xb = np.concatenate([[0], np.sort(rng.uniform(0.02, 0.98, m - 2)), [1]])
    A = np.column_stack([xa, rng.uniform(-0.05, 0.05, n)])
    B = np.column_stack([xb, rng.uniform(0.2, 0.3, m)])
    ref = _brute_sweeps(A, B)
    if not ref:
        with pytest.raises(DegenerateContour):
            sweep_band(A, B)
        return
    t = sweep_band(A, B)
    V = np.vstack([A, B])
    assert len(t) == n + m - 2
    assert np.all(np.array([_area(V, tri[None]) for tri in t]) > 0)
    assert _area(V, t) == pytest.approx(abs(polygon_area(np.vstack([A, B[::-1]]))), rel=1e-12)
    # the diagonal a step adds: (a_i+1, b_j) on a path step, (a_i, b_j+1) on a contour step
    cost = sum(np.hypot(*(V[tri[1]] - V[tri[2] if tri[1] < n else tri[0]])) for tri in t)
    assert cost == pytest.approx(min(c for c, _ in ref), rel=1e-12)


def test_sweep_band_on_parallel_chains():
    A = np.column_stack([np.linspace(0, 1, 6), np.zeros(6)])
    B = np.column_stack([np.linspace(0, 1, 4), np.full(4, 0.1)])
    t = sweep_band(A, B)
    assert len(t) == 8
    assert _area(np.vstack([A, B]), t) == pytest.approx(0.1)


def test_ear_clip_rectangle_and_reflex_polygon():
    rect = np.array([[0, 0], [2, 0], [2, 1], [0, 1]], dtype=float)
    assert len(ear_clip(rect)) == 2
    arrow = np.array([[0, 0], [2, 0], [2, 2], [1, 0.5], [0, 2]], dtype=float)
    t = ear_clip(arrow)
    assert len(t) == 3
    assert abs(_area(arrow, t)) == pytest.approx(abs(polygon_area(arrow)), abs=1e-9)


def test_cover_area_matches_footprint():
    P = np.array([[0.0, 0.5], [0.3, 0.55], [0.5, 0.45], [0.7, 0.6], [1.0, 0.5]])
    dp = dilate(Path(P), [0.02, 0.05, 0.01, 0.04], 0.0, 1.0)
    poly, tris = cover_top(dp)
    assert abs(_area(poly, tris)) == pytest.approx(abs(polygon_area(poly)), abs=1e-12)


def test_end_caps():
    assert end_caps(10, 11, 12, 0) == [(0, 10, 11), (0, 11, 12)]
    assert end_caps(10, 0, 12, 0) == []


@pytest.mark.parametrize("depth_ends", [0.01, 0.0])
def test_assembled_trench_is_closed(depth_ends):
    P = np.column_stack([np.linspace(0, 1, 8), 0.5 + 0.05 * np.sin(np.linspace(0, 6, 8))])
    dp = dilate(Path(P), np.full(7, 0.02), 0.0, 1.0)
    z = 1.0 - np.r_[depth_ends, np.full(6, 0.05), depth_ends]
    tm = assemble_trench(dp, z, 1.0)
    rep = validate(tm.mesh)
    assert rep.ok, rep.to_dict()
    caps = sum(t == "end" for t in tm.mesh.tags)
    assert caps == (4 if depth_ends else 0)
    assert tm.planar_ok
