from __future__ import annotations

import json

import numpy as np
import pytest

from defectforge.boolean import Slab, boolean, box_mesh, imprint_into_slab
from defectforge.defects import default_params, generate_bulge, generate_crack
from defectforge.errors import MeshFormatError, NotClosed, OutOfBounds
from defectforge.io import annotation, annotation_bytes, as_written, export_mesh, load_mesh, mesh_bytes
from defectforge.mesh import SurfaceMesh, orient_outward, signed_volume, validate, weld
from defectforge.tessellation import Window

TET = SurfaceMesh([[0, 0, 0], [1, 0, 0], [0, 1, 0], [0, 0, 1]], [[0, 2, 1], [0, 1, 3], [1, 2, 3], [0, 3, 2]])


def test_tetrahedron_is_closed():
    rep = validate(TET)
    assert rep.ok and rep.euler == 2 and rep.components == 1
    assert signed_volume(TET) == pytest.approx(1 / 6)


def test_open_tetrahedron():
    m = SurfaceMesh(TET.vertices, TET.triangles[:3])
    rep = validate(m)
    assert not rep.closed and rep.boundary_edges == 3
    with pytest.raises(NotClosed):
        signed_volume(m)


def test_cube_volume_and_winding():
    cube = box_mesh((0, 0, 0), (1, 1, 1))
    assert signed_volume(cube) == pytest.approx(1.0)
    flipped = SurfaceMesh(cube.vertices, cube.triangles[:, ::-1])
    assert signed_volume(flipped) == pytest.approx(-1.0)
    assert signed_volume(orient_outward(flipped)) == pytest.approx(1.0)


def test_weld_merges_duplicates():
    v = np.vstack([TET.vertices, TET.vertices[:1] + 1e-13])
    t = TET.triangles.copy()
    t[0, 0] = 4
    w = weld(SurfaceMesh(v, t))
    assert len(w.vertices) == 4 and validate(w).ok


def test_booleans_on_cubes():
    a = box_mesh((0, 0, 0), (1, 1, 1))
    far = box_mesh((3, 0, 0), (4, 1, 1))
    u = boolean(a, far, "union")
    rep = validate(u)
    assert rep.components == 2 and signed_volume(u) == pytest.approx(2.0, abs=1e-9)
    assert boolean(a, a, "difference").is_empty
    b = box_mesh((0.5, 0, 0), (1.5, 1, 1))
    assert signed_volume(boolean(a, b, "union")) == pytest.approx(1.5, abs=1e-6)
    assert signed_volume(boolean(a, b, "intersection")) == pytest.approx(0.5, abs=1e-6)
    assert signed_volume(boolean(a, b, "difference")) == pytest.approx(0.5, abs=1e-6)


def test_slab_imprints():
    slab = Slab.around(Window(0, 1, 0, 1), top=1.0, thickness=0.5)
    base = slab.mesh()
    assert mesh_bytes(imprint_into_slab([], slab), "obj") == mesh_bytes(base, "obj")
    bulge = generate_bulge(3, default_params("bulge"))
    out = imprint_into_slab([(bulge.mesh, "positive")], slab)
    # the whole bulge lies above the surface, so the slab grows by its volume
    assert signed_volume(out) - signed_volume(base) == pytest.approx(signed_volume(bulge.mesh), rel=1e-6)
    crack = generate_crack(3, default_params("crack"))
    cut = imprint_into_slab([(crack.mesh, "negative")], slab)
    inside = boolean(base, crack.mesh, "intersection")
    assert signed_volume(cut) == pytest.approx(signed_volume(base) - signed_volume(inside), rel=1e-9)
    with pytest.raises(OutOfBounds):
        imprint_into_slab([(crack.mesh.translated([5, 0, 0]), "negative")], slab)


def test_tetrahedron_files(tmp_path):
    obj = mesh_bytes(TET, "obj").decode()
    lines = obj.splitlines()
    assert sum(l.startswith("v ") for l in lines) == 4
    assert sum(l.startswith("f ") for l in lines) == 4
    assert len(mesh_bytes(TET, "stl")) == 84 + 4 * 50
    with pytest.raises(MeshFormatError):
        mesh_bytes(TET, "vrml")


@pytest.mark.parametrize("fmt", ["obj", "ply", "stl"])
def test_round_trip(tmp_path, fmt):
    crack = generate_crack(42, default_params("crack"))
    f = tmp_path / f"crack.{fmt}"
    export_mesh(crack.mesh, fmt, f)
    back = load_mesh(f)
    ref = as_written(crack.mesh, fmt)
    if fmt == "stl":
        # STL stores every facet's corners; compare facet by facet
        assert np.array_equal(back.vertices[back.triangles], ref.vertices[ref.triangles])
    else:
        assert np.array_equal(back.triangles, crack.mesh.triangles)
        assert np.array_equal(back.vertices, ref.vertices)
        assert np.allclose(back.vertices, crack.mesh.vertices, rtol=1e-8, atol=1e-12)
    assert validate(back).closed


def test_annotation_is_canonical_json():
    crack = generate_crack(42, default_params("crack"))
    ann = annotation("crack", 42, crack.params, crack.mesh, crack.spines, crack.footprints, crack.extras)
    data = annotation_bytes(ann)
    assert data == annotation_bytes(json.loads(data))
    d = json.loads(data)
    assert d["seed"] == 42 and d["validation"]["ok"] is True
    assert d["stats"]["volume"] == pytest.approx(signed_volume(crack.mesh))
