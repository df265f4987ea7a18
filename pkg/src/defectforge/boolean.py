"""Mesh Booleans (via manifold3d) and imprinting defects into a slab.

Triangle tags survive a Boolean: each input is registered as an original
with per-face ids, and output faces are mapped back to their source tag.
"""
from __future__ import annotations

from dataclasses import dataclass

import manifold3d
import numpy as np

from .errors import BooleanError, OutOfBounds
from .mesh import SurfaceMesh, _component_labels, validate, weld


def _to_manifold(mesh: SurfaceMesh):
    mm = manifold3d.Mesh64(
        vert_properties=np.ascontiguousarray(mesh.vertices, dtype=np.float64),
        tri_verts=np.ascontiguousarray(mesh.triangles, dtype=np.uint64),
        face_id=np.arange(len(mesh.triangles), dtype=np.uint64),
    )
    man = manifold3d.Manifold(mm)
    status = man.status()
    if status != manifold3d.Error.NoError:
        raise BooleanError(f"input is not a valid manifold: {status}")
    return man.as_original()


def _from_manifold(man, sources: dict) -> SurfaceMesh:
    if man.is_empty():
        return SurfaceMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    out = man.to_mesh64()
    v = np.asarray(out.vert_properties, dtype=float)[:, :3]
    t = np.asarray(out.tri_verts, dtype=np.int64)
    fid = np.asarray(out.face_id, dtype=np.int64)
    run_idx = np.asarray(out.run_index, dtype=np.int64)
    run_ids = list(out.run_original_id)
    tags = ["boolean"] * len(t)
    for r, oid in enumerate(run_ids):
        src = sources.get(int(oid))
        if src is None:
            continue
        lo, hi = run_idx[r] // 3, run_idx[r + 1] // 3
        for f in range(lo, hi):
            if 0 <= fid[f] < len(src):
                tags[f] = src[fid[f]]
    return weld(_drop_slivers(SurfaceMesh(v, t, tags)))


def _drop_slivers(mesh: SurfaceMesh, rel_vol: float = 1e-12) -> SurfaceMesh:
    """Remove zero-volume components that exact arithmetic leaves where two
    surfaces graze; welding would otherwise fuse them into non-manifold edges."""
    ncomp, lab = _component_labels(mesh.triangles, len(mesh.vertices))
    if ncomp <= 1:
        return mesh
    tol = rel_vol * mesh.bbox_diagonal() ** 3
    tlab = lab[mesh.triangles[:, 0]]
    keep = np.ones(len(mesh.triangles), dtype=bool)
    for c in range(ncomp):
        sel = tlab == c
        if not sel.any():
            continue
        tri = mesh.vertices[mesh.triangles[sel]]
        tri = tri - tri.reshape(-1, 3).mean(axis=0)
        vol = np.sum(np.einsum("ij,ij->i", tri[:, 0], np.cross(tri[:, 1], tri[:, 2]))) / 6.0
        if abs(vol) <= tol:
            keep[sel] = False
    if keep.all():
        return mesh
    return SurfaceMesh(mesh.vertices, mesh.triangles[keep], [g for g, k in zip(mesh.tags, keep) if k])


def boolean(a: SurfaceMesh, b: SurfaceMesh, op: str) -> SurfaceMesh:
    """op in {'union', 'difference', 'intersection'}; result is welded and re-indexed."""
    if op not in ("union", "difference", "intersection"):
        raise ValueError(f"unknown op {op!r}")
    if a.is_empty or b.is_empty:
        if op == "union":
            return (b if a.is_empty else a).copy()
        if op == "difference":
            return a.copy()
        return SurfaceMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    ma, mb = _to_manifold(a), _to_manifold(b)
    sources = {ma.original_id(): a.tags, mb.original_id(): b.tags}
    if op == "union":
        r = ma + mb
    elif op == "difference":
        r = ma - mb
    else:
        r = ma ^ mb
    if r.status() != manifold3d.Error.NoError:
        raise BooleanError(f"boolean {op} failed: {r.status()}")
    out = _from_manifold(r, sources)
    if not out.is_empty:
        rep = validate(out, self_intersection=False)
        if not (rep.closed and rep.oriented):
            raise BooleanError(f"boolean {op} produced an open or misoriented mesh")
    return out


def box_mesh(lo, hi, tag: str = "slab") -> SurfaceMesh:
    """Axis-aligned box with outward-facing triangles."""
    x0, y0, z0 = map(float, lo)
    x1, y1, z1 = map(float, hi)
    v = np.array(
        [[x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0], [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1]]
    )
    t = np.array(
        [
            [0, 2, 1], [0, 3, 2],  # bottom
            [4, 5, 6], [4, 6, 7],  # top
            [0, 1, 5], [0, 5, 4],
            [1, 2, 6], [1, 6, 5],
            [2, 3, 7], [2, 7, 6],
            [3, 0, 4], [3, 4, 7],
        ]
    )
    return SurfaceMesh(v, t, [tag] * 12)


@dataclass(frozen=True)
class Slab:
    """Rectangular block [x0,x1] x [y0,y1] x [bottom, top]."""

    x0: float
    x1: float
    y0: float
    y1: float
    bottom: float
    top: float

    def mesh(self) -> SurfaceMesh:
        return box_mesh((self.x0, self.y0, self.bottom), (self.x1, self.y1, self.top))

    @classmethod
    def around(cls, window, top: float, thickness: float, margin: float = 0.1) -> "Slab":
        mx, my = margin * window.width, margin * window.height
        return cls(window.w0min - mx, window.w0max + mx, window.w1min - my, window.w1max + my, top - thickness, top)


def rigid2d(mesh: SurfaceMesh, dx: float = 0.0, dy: float = 0.0, theta: float = 0.0) -> SurfaceMesh:
    c, s = np.cos(theta), np.sin(theta)
    v = mesh.vertices.copy()
    x, y = v[:, 0].copy(), v[:, 1].copy()
    v[:, 0] = c * x - s * y + dx
    v[:, 1] = s * x + c * y + dy
    return SurfaceMesh(v, mesh.triangles.copy(), list(mesh.tags))


def imprint_into_slab(defects, slab: Slab, transform=(0.0, 0.0, 0.0)) -> SurfaceMesh:
    """Subtract negative defects and unite positive ones with the slab mesh.

    ``defects`` is a sequence of (mesh, sign) with sign 'negative' or 'positive'.
    """
    result = slab.mesh()
    for mesh, sign in defects:
        m = rigid2d(mesh, *transform) if any(transform) else mesh
        lo, hi = m.bbox()
        if lo[0] < slab.x0 or hi[0] > slab.x1 or lo[1] < slab.y0 or hi[1] > slab.y1:
            raise OutOfBounds("defect footprint leaves the slab footprint")
        if sign == "negative":
            if lo[2] < slab.bottom:
                raise OutOfBounds("defect reaches below the slab bottom")
            result = boolean(result, m, "difference")
        elif sign == "positive":
            result = boolean(result, m, "union")
        else:
            raise ValueError(f"unknown sign {sign!r}")
    return result
