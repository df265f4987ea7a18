from __future__ import annotations

from dataclasses import replace

import numpy as np
import pytest

from defectforge.defects import (
    ElongatedDefectParams,
    add_branch,
    assemble_coat_lift,
    default_params,
    generate_bulge,
    generate_coat_lift,
    generate_crack,
    generate_open_buckle,
    height_profile_values,
    moving_average3,
    width_profile_values,
)
from defectforge.dilation import dilate
from defectforge.errors import InvalidParams
from defectforge.mesh import signed_volume, validate
from defectforge.pathing import Path, SplineSpec
from defectforge.rng import RandomStream


@pytest.mark.parametrize(
    "kind, change, field",
    [
        ("crack", {"depth_or_height_range": (0.0, 0.0)}, "depth_or_height_range"),
        ("crack", {"depth_or_height_range": (0.05, 1.0)}, "depth_or_height_range"),
        ("crack", {"width_range": (0.0, 0.01)}, "width_range"),
        ("buckle_open", {"inner_width_ratio": 1.0}, "inner_width_ratio"),
        ("coat_lift", {"layer_thickness": 0.0}, "layer_thickness"),
        ("coat_lift", {"depth_or_height_range": (0.0, 0.0)}, "depth_or_height_range"),
        ("cold_shut", {"spline": SplineSpec(5, 20)}, "discretization_count"),
    ],
)
def test_invalid_params_name_the_field(kind, change, field):
    p = replace(default_params(kind), **change)
    with pytest.raises(InvalidParams) as ei:
        p.validate()
    assert field in str(ei.value)


def test_params_round_trip_through_dict():
    p = default_params("cold_shut")
    q = ElongatedDefectParams.from_dict(p.to_dict())
    assert q == p
    with pytest.raises(InvalidParams):
        ElongatedDefectParams.from_dict({"colour": "red"})


def test_moving_average_ends_use_available_neighbours():
    assert np.allclose(moving_average3([3.0, 0.0, 0.0, 6.0]), [1.5, 1.0, 2.0, 3.0])


def test_profiles_taper_towards_the_ends():
    path = Path(np.column_stack([np.linspace(0, 1, 41), np.zeros(41)]))
    l = width_profile_values(RandomStream(2), path, (0.02, 0.02), 1.0)
    mid = len(l) // 2
    assert l[0] < l[mid] and l[-1] < l[mid]
    # constant draws: the envelope alone, sin(pi s) at the arc midpoints
    assert np.allclose(l, 0.02 * np.sin(np.pi * path.arc_midpoint_params()))
    d = height_profile_values(RandomStream(2), path.vertex_params(), (0.5, 0.5), 1.0, 0.1)
    assert d[0] == pytest.approx(0.05) and d[-1] == pytest.approx(0.05)
    assert d[20] == pytest.approx(0.5)


def test_seeded_crack_is_a_closed_sphere():
    c = generate_crack(42, default_params("crack"))
    rep = validate(c.mesh)
    assert rep.ok and rep.euler == 2 and rep.components == 1
    z = c.spines[0][:, 2]
    assert np.all((z > 0) & (z < 1.0))
    # everything that is not spine sits on the surface
    spine_z = set(z.tolist())
    others = [v for v in c.mesh.vertices[:, 2] if v not in spine_z]
    assert np.all(np.asarray(others) == 1.0)
    assert signed_volume(c.mesh) > 0


def test_crack_is_deterministic():
    a = generate_crack(5, default_params("crack"))
    b = generate_crack(5, default_params("crack"))
    assert np.array_equal(a.mesh.vertices, b.mesh.vertices)
    assert np.array_equal(a.mesh.triangles, b.mesh.triangles)


def test_branch_volume_is_monotone():
    p = default_params("crack")
    vols = []
    for b in range(3):
        c = generate_crack(7, replace(p, branches=b))
        assert validate(c.mesh).ok
        assert len(c.spines) == b + 1
        vols.append(signed_volume(c.mesh))
    assert vols[0] <= vols[1] <= vols[2]


def test_branch_rooted_on_a_branch_and_at_an_endpoint():
    p = default_params("crack")
    c1 = generate_crack(7, replace(p, branches=1))
    on_branch = int(c1.context["paths"][1].ids[2])
    c2 = add_branch(RandomStream(3), c1, p, start=on_branch)
    assert validate(c2.mesh).ok
    assert signed_volume(c2.mesh) >= signed_volume(c1.mesh)
    c0 = generate_crack(7, p)
    end = int(c0.context["paths"][0].ids[-1])
    assert validate(add_branch(RandomStream(1), c0, p, start=end).mesh).ok
    with pytest.raises(InvalidParams):
        add_branch(RandomStream(1), c0, p, start=-5)


def test_bulge_is_eye_shaped_and_above_the_surface():
    b = generate_bulge(11, default_params("bulge"))
    assert validate(b.mesh).ok
    z = b.spines[0][:, 2]
    assert np.all(z > 1.0)
    assert b.extras["end_width_ratio"] <= 0.1
    assert b.sign == "positive"


def test_open_buckle_is_lighter_than_its_closed_counterpart():
    p = default_params("buckle_open")
    o = generate_open_buckle(4, p)
    assert validate(o.mesh).ok
    closed = generate_bulge(4, replace(p, defect_type="buckle_closed"))
    assert signed_volume(o.mesh) < signed_volume(closed.mesh)
    assert signed_volume(o.mesh) < o.extras["closed_volume"]


def test_coat_lift_constant_elevation_reaches_exactly_h_plus_e():
    P = np.column_stack([np.linspace(0, 1, 12), np.linspace(0.45, 0.55, 12)])
    path = Path(P)
    # constant widths: no lateral contour steps, which a sweep cannot cover
    dp = dilate(path, np.full(11, 0.02), 0.0, 1.0)
    e = 0.01
    mesh, zc, foot = assemble_coat_lift(dp, np.full(len(dp.upper.points), e), 1.0, 0.01)
    assert validate(mesh).ok
    assert mesh.vertices[:, 2].max() == 1.0 + e
    assert np.all(zc < 1.0 + e)


def test_coat_lift_generator_with_constant_elevation():
    e = 2.0**-7  # exact under the smoothing average
    p = replace(default_params("coat_lift"), depth_or_height_range=(e, e), end_ratio=1.0)
    c = generate_coat_lift(2, p)
    assert validate(c.mesh).ok
    assert c.mesh.vertices[:, 2].max() == 1.0 + e
    # the shifted copy of the spine lies on the surface
    low = np.asarray(c.extras["lower_contour"])
    V = c.mesh.vertices
    for q in low:
        hit = np.nonzero(np.all(V[:, :2] == q, axis=1))[0]
        assert len(hit) and np.all(V[hit, 2] == 1.0)


@pytest.mark.parametrize("spec", [SplineSpec(5, 50), SplineSpec(10, 100)])
def test_cold_shut_discretisations(spec):
    c = generate_crack(1, replace(default_params("cold_shut"), spline=spec))
    assert validate(c.mesh).ok
    assert c.extras["path_k"] + 2 <= spec.discretization_count
    assert c.extras["max_turn_deg"] <= 60.0


def test_more_control_points_curve_more():
    turn = {}
    for spec in (SplineSpec(5, 50), SplineSpec(10, 100)):
        p = replace(default_params("cold_shut"), spline=spec)
        turn[spec.control_count] = np.mean([generate_crack(s, p).extras["max_turn_deg"] for s in range(8)])
    assert turn[10] > turn[5]


def test_two_control_points_give_a_straight_groove():
    c = generate_crack(3, replace(default_params("cold_shut"), spline=SplineSpec(2, 10)))
    assert validate(c.mesh).ok
    assert c.extras["max_turn_deg"] == pytest.approx(0.0, abs=1e-9)
