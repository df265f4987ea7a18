from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from defectforge.defects import width_profile_values
from defectforge.dilation import TOP, dilate, upward_normals
from defectforge.errors import InvalidPath, InvalidWidths
from defectforge.geometry import points_in_polygon, polygon_area, polygon_is_simple
from defectforge.pathing import Path, minimal_path
from defectforge.rng import RandomStream
from defectforge.tessellation import Window, build_voronoi

W = Window(0.0, 1.0, 0.0, 1.0)


def _line_intersection(p, d, q, e):
    s = np.linalg.solve(np.column_stack([d, -e]), q - p)
    return p + s[0] * d


def test_single_arc_is_a_rectangle():
    dp = dilate(Path(np.array([[0.0, 0.0], [1.0, 0.0]])), [0.2], 0.0, 1.0)
    assert np.allclose(dp.upper.points, [[0, 0.2], [1, 0.2]])
    assert np.allclose(dp.lower.points, [[0, -0.2], [1, -0.2]])
    assert dp.upper.origins == [(0, TOP)] and dp.lower.origins == [(0, TOP)]
    assert abs(polygon_area(dp.footprint())) == pytest.approx(0.4)


def test_collinear_arcs_give_one_straight_run():
    dp = dilate(Path(np.array([[0.0, 0.0], [0.5, 0.0], [1.0, 0.0]])), [0.2, 0.2], 0.0, 1.0)
    assert np.allclose(dp.upper.points[:, 1], 0.2)
    assert np.allclose(dp.lower.points[:, 1], -0.2)
    assert dp.degenerate_corners == 0


def test_v_path_corner_is_the_offset_line_intersection():
    P = np.array([[0.0, 0.0], [1.0, -1.0], [2.0, 0.0]])
    dp = dilate(Path(P), [0.1, 0.1], 0.0, 2.0)
    n = upward_normals(P)
    d = np.diff(P, axis=0)
    for sign, contour in ((1, dp.upper), (-1, dp.lower)):
        X = _line_intersection(P[0] + sign * 0.1 * n[0], d[0], P[1] + sign * 0.1 * n[1], d[1])
        assert np.allclose(contour.points[1], X, atol=1e-12)
    # and by symmetry the corner sits on the bisector x = 1
    assert dp.upper.points[1, 0] == pytest.approx(1.0)
    assert dp.upper.points[1, 1] == pytest.approx(-1 + 0.1 * np.sqrt(2))
    assert dp.lower.points[1, 1] == pytest.approx(-1 - 0.1 * np.sqrt(2))


def test_right_angle_kink_with_unequal_widths():
    P = np.array([[0.0, 0.0], [0.5, 0.5], [1.0, 0.0]])
    dp = dilate(Path(P), [0.1, 0.3], 0.0, 1.0)
    n = upward_normals(P)
    # perpendicular arcs: the offset lines meet at w + l_i n_i + l_{i+1} n_{i+1}
    X = P[1] + 0.1 * n[0] + 0.3 * n[1]
    q0, q1 = dp.upper_quads[0], dp.upper_quads[1]
    assert np.allclose(q0[2], X) and np.allclose(q1[3], X)


def test_gentle_turn_elongates_onto_wider_lateral_side():
    # thin arc after a wide one: the offset rays miss, the thin top edge is
    # extended back to the wide rectangle's right side x = 0.5
    P = np.array([[0.0, 0.0], [0.5, 0.0], [1.0, -0.05]])
    dp = dilate(Path(P), [0.3, 0.05], 0.0, 1.0)
    n = upward_normals(P)
    d1 = P[2] - P[1]
    X = _line_intersection(P[1] + 0.05 * n[1], d1, P[1], n[0])
    q0, q1 = dp.upper_quads[0], dp.upper_quads[1]
    assert np.allclose(q1[3], X, atol=1e-12)
    assert 0 <= (X - P[1]) @ n[0] <= 0.3
    assert np.allclose(q0[2], P[1] + 0.3 * n[0])


def test_bad_inputs():
    P = np.array([[0.0, 0.0], [1.0, 0.0]])
    with pytest.raises(InvalidWidths):
        dilate(Path(P), [0.0], 0, 1)
    with pytest.raises(InvalidWidths):
        dilate(Path(P), [0.1, 0.1], 0, 1)
    with pytest.raises(InvalidPath):
        dilate(Path(np.array([[0.1, 0.0], [1.0, 0.0]])), [0.1], 0, 1)


def _random_dilation(seed):
    st_ = RandomStream(seed)
    for a in range(20):
        try:
            path = minimal_path(st_.child("p", a), build_voronoi(st_.child("t", a), W, 0.1, 200))
            break
        except Exception:
            continue
    l = width_profile_values(st_.child("w"), path, (0.01, 0.03), 1)
    return path, l, dilate(path, l, 0.0, 1.0)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 5000))
def test_quads_contain_their_rectangles(seed):
    path, l, dp = _random_dilation(seed)
    P = path.vertices
    n = dp.widths.normals
    for quads, sgn in ((dp.upper_quads, 1), (dp.lower_quads, -1)):
        for i, q in enumerate(quads):
            # interior sample points of the rectangle half, clipped to the strip
            s = np.linspace(0.05, 0.95, 5)
            pts = np.array([P[i] + a * (P[i + 1] - P[i]) + b * sgn * l[i] * n[i] for a in s for b in s])
            pts = pts[(pts[:, 0] > 0) & (pts[:, 0] < 1)]
            if len(pts):
                assert np.all(points_in_polygon(pts, q))


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 5000))
def test_contours_span_the_strip(seed):
    path, l, dp = _random_dilation(seed)
    for c in (dp.upper, dp.lower):
        assert c.points[0, 0] == 0.0 and c.points[-1, 0] == 1.0
        assert len(c.origins) == len(c.points) - 1
    foot = dp.footprint()
    assert abs(polygon_area(foot)) > 0
    assert polygon_is_simple(foot, tol=1e-12)
