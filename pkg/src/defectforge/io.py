"""Mesh files (OBJ, binary STL, ASCII PLY) and JSON annotation sidecars.

Text formats write coordinates with 9 significant digits, so the same mesh
always produces the same bytes.
"""
from __future__ import annotations

import json
import os
import struct

import numpy as np

from .errors import MeshFormatError
from .mesh import SurfaceMesh, signed_volume, validate

SCHEMA_VERSION = 1
STL_HEADER = b"defectforge binary STL".ljust(80, b" ")


def _fmt(x: float) -> str:
    s = format(float(x), ".9g")
    return "0" if s == "-0" else s


def _vertex_lines(v: np.ndarray, prefix: str) -> list:
    return [f"{prefix}{_fmt(a)} {_fmt(b)} {_fmt(c)}\n" for a, b, c in v]


def obj_bytes(mesh: SurfaceMesh) -> bytes:
    out = _vertex_lines(mesh.vertices, "v ")
    out += [f"f {a + 1} {b + 1} {c + 1}\n" for a, b, c in mesh.triangles]
    return "".join(out).encode("ascii")


def ply_bytes(mesh: SurfaceMesh) -> bytes:
    head = (
        "ply\nformat ascii 1.0\n"
        f"element vertex {len(mesh.vertices)}\nproperty double x\nproperty double y\nproperty double z\n"
        f"element face {len(mesh.triangles)}\nproperty list uchar int vertex_indices\nend_header\n"
    )
    out = [head] + _vertex_lines(mesh.vertices, "")
    out += [f"3 {a} {b} {c}\n" for a, b, c in mesh.triangles]
    return "".join(out).encode("ascii")


_STL_FACET = np.dtype([("n", "<f4", 3), ("v", "<f4", (3, 3)), ("attr", "<u2")])


def stl_bytes(mesh: SurfaceMesh) -> bytes:
    P = mesh.vertices[mesh.triangles]
    n = np.cross(P[:, 1] - P[:, 0], P[:, 2] - P[:, 0])
    ln = np.linalg.norm(n, axis=1)
    n = np.divide(n, ln[:, None], out=np.zeros_like(n), where=ln[:, None] > 0)
    rec = np.zeros(len(P), dtype=_STL_FACET)
    rec["n"] = n
    rec["v"] = P
    return STL_HEADER + struct.pack("<I", len(P)) + rec.tobytes()


def mesh_bytes(mesh: SurfaceMesh, fmt: str) -> bytes:
    if fmt == "obj":
        return obj_bytes(mesh)
    if fmt in ("stl", "stl_binary"):
        return stl_bytes(mesh)
    if fmt == "ply":
        return ply_bytes(mesh)
    raise MeshFormatError(f"unknown format {fmt!r}")


def export_mesh(mesh: SurfaceMesh, fmt: str, path) -> None:
    data = mesh_bytes(mesh, fmt)
    with open(path, "wb") as f:
        f.write(data)


# ------------------------------------------------------------ import


def _parse_obj(text: str) -> SurfaceMesh:
    vs, fs = [], []
    for ln, line in enumerate(text.splitlines(), 1):
        parts = line.split()
        if not parts or parts[0].startswith("#"):
            continue
        try:
            if parts[0] == "v":
                vs.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) for p in parts[1:]]
                idx = [i - 1 if i > 0 else len(vs) + i for i in idx]
                for k in range(1, len(idx) - 1):
                    fs.append([idx[0], idx[k], idx[k + 1]])
        except ValueError as e:
            raise MeshFormatError(f"line {ln}: {e}") from None
    return SurfaceMesh(np.asarray(vs, dtype=float), np.asarray(fs, dtype=np.int64))


def _parse_ply(text: str) -> SurfaceMesh:
    lines = text.splitlines()
    if not lines or lines[0].strip() != "ply":
        raise MeshFormatError("not a PLY file")
    nv = nf = 0
    k = 1
    while k < len(lines) and lines[k].strip() != "end_header":
        p = lines[k].split()
        if p[:1] == ["format"] and p[1] != "ascii":
            raise MeshFormatError("only ASCII PLY is supported")
        if p[:2] == ["element", "vertex"]:
            nv = int(p[2])
        elif p[:2] == ["element", "face"]:
            nf = int(p[2])
        k += 1
    body = lines[k + 1 :]
    if len(body) < nv + nf:
        raise MeshFormatError("truncated PLY body")
    v = np.array([[float(x) for x in body[i].split()[:3]] for i in range(nv)]).reshape(-1, 3)
    tris = []
    for i in range(nf):
        p = [int(x) for x in body[nv + i].split()]
        idx = p[1 : 1 + p[0]]
        for j in range(1, len(idx) - 1):
            tris.append([idx[0], idx[j], idx[j + 1]])
    return SurfaceMesh(v, np.asarray(tris, dtype=np.int64))


def _parse_stl(data: bytes) -> SurfaceMesh:
    if len(data) < 84:
        raise MeshFormatError("STL file too short")
    (n,) = struct.unpack("<I", data[80:84])
    if len(data) != 84 + 50 * n:
        raise MeshFormatError(f"binary STL size mismatch: {n} facets, {len(data)} bytes")
    rec = np.frombuffer(data[84:], dtype=_STL_FACET, count=n)
    P = rec["v"].astype(float).reshape(-1, 3)
    uniq, inv = np.unique(P, axis=0, return_inverse=True)
    return SurfaceMesh(uniq, inv.reshape(-1, 3))


def load_mesh(path) -> SurfaceMesh:
    ext = os.path.splitext(str(path))[1].lower()
    with open(path, "rb") as f:
        data = f.read()
    if ext == ".obj":
        return _parse_obj(data.decode("ascii", errors="replace"))
    if ext == ".ply":
        return _parse_ply(data.decode("ascii", errors="replace"))
    if ext == ".stl":
        return _parse_stl(data)
    raise MeshFormatError(f"unsupported mesh file extension {ext!r}")


def as_written(mesh: SurfaceMesh, fmt: str) -> SurfaceMesh:
    """The mesh a reader gets back from the file: coordinates rounded the way
    the format stores them."""
    if fmt in ("stl", "stl_binary"):
        v = mesh.vertices.astype(np.float32).astype(float)
    else:
        v = np.array([[float(_fmt(x)) for x in row] for row in mesh.vertices]).reshape(-1, 3)
    return SurfaceMesh(v, mesh.triangles, mesh.tags)


# ------------------------------------------------------------ annotation


def _tolist(a):
    return np.asarray(a, dtype=float).tolist()


def mesh_stats(mesh: SurfaceMesh) -> dict:
    rep = validate(mesh)
    vol = signed_volume(mesh) if rep.closed else None
    lo, hi = mesh.bbox()
    return {
        "bounds": [_tolist(lo), _tolist(hi)],
        "stats": {"vertices": int(len(mesh.vertices)), "faces": int(len(mesh.triangles)), "volume": vol},
        "validation": rep.to_dict(),
    }


def annotation(defect_type: str, seed: int, params: dict, mesh: SurfaceMesh, spines, footprints, extra: dict | None = None) -> dict:
    d = {
        "schema_version": SCHEMA_VERSION,
        "defect_type": defect_type,
        "seed": int(seed),
        "params": params,
        "spines": [_tolist(s) for s in spines],
        "footprints": [_tolist(f) for f in footprints],
    }
    d.update(mesh_stats(mesh))
    if extra:
        d["extra"] = extra
    return d


def annotation_bytes(ann: dict) -> bytes:
    return (json.dumps(ann, sort_keys=True, indent=2, allow_nan=False) + "\n").encode("utf-8")
