"""Triangulating the band between a spine path and a contour, plus the top
cover and end caps that close a trench or ridge into a solid.

The band is stitched like a zipper: a pointer p walks the path vertices and
every triangle either advances the path (v_p, v_p+1, c) or advances the
contour (v_p, c_j+1, c_j). Which move happens is decided by the origin of
each contour arc (which quad, which edge) following four cases:

    1  top edge of a quad seen for the first time: two triangles
    2  further top pieces of a quad already handled: one triangle
    3  lateral (left/right) quad edges: one triangle
    4  path arcs whose quad left no trace on the contour: fan to the contour

Triangles are emitted with zipper orientation, which is counter-clockwise
in the plane when the contour lies to the left of the path.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dilation import BORDER, LEFT, RIGHT, TOP, Contour, DilatedPath
from .delaunay import lawson_flip
from .errors import DegenerateContour
from .geometry import cross2, ear_clip, points_in_convex, polygon_area, polygon_is_simple, triangle_areas
from .mesh import SurfaceMesh, orient_outward


@dataclass
class TriangleStrip:
    """Triangles over path indices 0..k+1 and contour indices offset by k+2."""

    triangles: np.ndarray
    cases: list
    n_path: int
    n_contour: int

    def path_index(self, v: int) -> int | None:
        return v if v < self.n_path else None

    def contour_index(self, v: int) -> int | None:
        return v - self.n_path if v >= self.n_path else None


def triangulate_side(n_path: int, origins) -> TriangleStrip:
    """Case 1-4 stitching of path arcs 0..k with contour arcs 0..k_up.

    ``origins[j] = (i, edge_class)`` gives the quad and edge of contour arc j.
    """
    k = n_path - 2
    n_contour = len(origins) + 1
    off = n_path
    tris: list[tuple[int, int, int]] = []
    cases: list[int] = []
    p = 0  # path pointer; the paper's i_last equals p - 1

    def path_adv(c: int, case: int):
        nonlocal p
        tris.append((p, p + 1, off + c))
        cases.append(case)
        p += 1

    def contour_adv(j: int, case: int):
        tris.append((p, off + j + 1, off + j))
        cases.append(case)

    def lateral(o) -> bool:
        return o[1] != TOP

    m = len(origins)
    for j in range(m):
        i, cls = origins[j]
        i = min(max(int(i), 0), k)
        if i >= p:
            # first visit of quad i: fan over skipped arcs (case 4)
            while p < i:
                path_adv(j, 4)
            if cls == TOP:
                path_adv(j, 1)
                contour_adv(j, 1)
            elif cls == RIGHT or (cls == BORDER and i == k):
                if p == i:
                    path_adv(j, 4)
                contour_adv(j, 3)
            else:
                # left edge (and other non-top classes)
                contour_adv(j, 3)
                nxt = origins[j + 1] if j + 1 < m else None
                if nxt is not None and lateral(nxt) and nxt[0] <= i:
                    path_adv(j + 1, 4)
        else:
            contour_adv(j, 2 if cls == TOP else 3)
    while p <= k:
        path_adv(m, 4)
    return TriangleStrip(np.asarray(tris, dtype=np.int64).reshape(-1, 3), cases, n_path, n_contour)


def sweep_band(path_pts, contour_pts) -> np.ndarray:
    """Triangulate the band between a path and a contour lying to its left by
    sweeping both chains, never producing flat triangles.

    Each step adds (a_i, a_i+1, b_j) or (a_i, b_j+1, b_j); among all valid
    sweeps the one with the shortest total diagonal length is taken. Every
    triangle uses at least one path vertex. Indices follow the TriangleStrip
    convention (contour offset by the path length). Raises DegenerateContour
    when no sweep exists.
    """
    A = np.asarray(path_pts, dtype=float)
    B = np.asarray(contour_pts, dtype=float)
    na, nb = len(A), len(B)
    allp = np.vstack([A, B])
    scale = float(np.ptp(allp, axis=0).max()) or 1.0
    eps = 1e-14 * scale * scale

    def ok(a, b, c, skip):
        if cross2(b - a, c - a) <= eps:
            return False
        tri = np.array([a, b, c])
        lo, hi = tri.min(axis=0), tri.max(axis=0)
        near = np.nonzero(np.all((allp >= lo - 1e-12 * scale) & (allp <= hi + 1e-12 * scale), axis=1))[0]
        near = near[~np.isin(near, skip)]
        if len(near) == 0:
            return True
        return not points_in_convex(allp[near], tri, strict=False, tol=eps).any()

    INF = np.inf
    cost = np.full((na, nb), INF)
    back = np.zeros((na, nb), dtype=np.int8)  # 1: came by path step, 2: by contour step
    cost[0, 0] = 0.0
    for d in range(na + nb - 2):
        for i in range(max(0, d - nb + 1), min(na, d + 1)):
            j = d - i
            c0 = cost[i, j]
            if c0 == INF:
                continue
            if i < na - 1 and ok(A[i], A[i + 1], B[j], (i, i + 1, na + j)):
                c1 = c0 + np.hypot(*(A[i + 1] - B[j]))
                if c1 < cost[i + 1, j]:
                    cost[i + 1, j] = c1
                    back[i + 1, j] = 1
            if j < nb - 1 and ok(A[i], B[j + 1], B[j], (i, na + j + 1, na + j)):
                c1 = c0 + np.hypot(*(A[i] - B[j + 1]))
                if c1 < cost[i, j + 1]:
                    cost[i, j + 1] = c1
                    back[i, j + 1] = 2
    if cost[na - 1, nb - 1] == INF:
        raise DegenerateContour("no valid sweep between path and contour")
    tris = []
    i, j = na - 1, nb - 1
    while i or j:
        if back[i, j] == 1:
            i -= 1
            tris.append((i, i + 1, na + j))
        else:
            j -= 1
            tris.append((i, na + j + 1, na + j))
    t = np.asarray(tris[::-1], dtype=np.int64)
    total = triangle_areas(allp[t[:, 0]], allp[t[:, 1]], allp[t[:, 2]]).sum()
    if abs(total - polygon_area(np.vstack([A, B[::-1]]))) > 1e-9 * scale * scale:
        raise DegenerateContour("band sweep does not tile the band")
    return t


def cover_top(dp: DilatedPath, keep=None) -> tuple[np.ndarray, np.ndarray]:
    """Footprint polygon and its ear-clipped, Lawson-flipped triangulation.

    ``keep`` masks footprint vertices; triangle indices refer to the full
    footprint either way.
    """
    full = dp.footprint()
    idx = np.arange(len(full)) if keep is None else np.nonzero(keep)[0]
    poly = full[idx]
    tris = ear_clip(poly)
    n = len(poly)
    ring = [(k, (k + 1) % n) for k in range(n)]
    return full, idx[lawson_flip(poly, tris, ring)]


def end_caps(v_up, v_mid_top, v_low, v_path) -> list[tuple[int, int, int]]:
    """Close an end face: (v_up, v_mid_top, v_low) lie on the surface plane,
    v_path is the spine endpoint. Returns [] when the spine endpoint is the
    surface vertex itself."""
    if v_path == v_mid_top:
        return []
    return [(v_path, v_up, v_mid_top), (v_path, v_mid_top, v_low)]


@dataclass
class TrenchMesh:
    mesh: SurfaceMesh
    upper: TriangleStrip
    lower: TriangleStrip
    footprint: np.ndarray
    planar_ok: bool
    planar_report: dict


def assemble_trench(dp: DilatedPath, path_z, surface_z: float, tag_prefix: str = "") -> TrenchMesh:
    """Closed solid between the surface plane and a spine at heights path_z.

    Contour vertices sit on the surface plane. Spine heights below it give a
    trench (crack), above it a ridge (bulge). The planar report records
    whether the band triangles are all positively oriented and the footprint
    is simple, which together with spine heights strictly on one side of the
    surface guarantees an embedded solid.
    """
    P = dp.path.vertices
    z = np.asarray(path_z, dtype=float)
    npth = len(P)
    U = dp.upper.points
    Lw = dp.lower.points
    nu, nl = len(U), len(Lw)
    verts = [np.column_stack([P, z])]
    base_u = npth
    base_l = base_u + nu
    verts.append(np.column_stack([U, np.full(nu, surface_z)]))
    verts.append(np.column_stack([Lw, np.full(nl, surface_z)]))
    nxt = base_l + nl
    # surface copies of the spine endpoints, unless the spine already ends on the surface
    if z[0] == surface_z:
        s0 = 0
    else:
        s0 = nxt
        verts.append([[P[0, 0], P[0, 1], surface_z]])
        nxt += 1
    if z[-1] == surface_z:
        s1 = npth - 1
    else:
        s1 = nxt
        verts.append([[P[-1, 0], P[-1, 1], surface_z]])
        nxt += 1
    V = np.vstack(verts)

    up = triangulate_side(npth, dp.upper.origins)
    lo = triangulate_side(npth, dp.lower.origins)

    def remap(strip: TriangleStrip, base: int):
        t = strip.triangles.copy()
        c = t >= npth
        t[c] = t[c] - npth + base
        return t

    tu = remap(up, base_u)
    tl = remap(lo, base_l)
    lat_u = np.asarray(up.cases) == 3
    lat_l = np.asarray(lo.cases) == 3

    # a spine ending on the surface leaves a fan of band triangles lying in
    # the surface plane; they would coincide with cover triangles, so both go
    flat_u = np.all(V[tu, 2] == surface_z, axis=1)
    flat_l = np.all(V[tl, 2] == surface_z, axis=1)
    tu, lat_u = tu[~flat_u], lat_u[~flat_u]
    tl, lat_l = tl[~flat_l], lat_l[~flat_l]

    # polygon index -> mesh vertex
    pmap = np.concatenate([np.arange(base_u, base_u + nu), [s1], np.arange(base_l + nl - 1, base_l - 1, -1), [s0]])
    used = np.zeros(len(V), dtype=bool)
    used[tu.ravel()] = True
    used[tl.ravel()] = True
    used[[s0, s1]] = True
    poly, ctris = cover_top(dp, keep=used[pmap])
    tc = pmap[ctris]

    caps = end_caps(base_u, s0, base_l, 0) + end_caps(base_u + nu - 1, s1, base_l + nl - 1, npth - 1)
    tcap = np.asarray(caps, dtype=np.int64).reshape(-1, 3)

    tris = np.vstack([tu, tl, tc, tcap])
    tags = (
        [tag_prefix + "band_upper"] * len(tu)
        + [tag_prefix + "band_lower"] * len(tl)
        + [tag_prefix + "cover"] * len(tc)
        + [tag_prefix + "end"] * len(tcap)
    )

    # planar embedding checks
    xy = V[:, :2]
    scale = max(dp.xmax - dp.xmin, 1e-300)
    eps = 1e-14 * scale * scale
    au = triangle_areas(xy[tu[:, 0]], xy[tu[:, 1]], xy[tu[:, 2]])
    al = triangle_areas(xy[tl[:, 0]], xy[tl[:, 1]], xy[tl[:, 2]])
    simple = polygon_is_simple(poly, tol=1e-12 * scale)
    interior = z[1:-1]
    one_side = bool(np.all(interior < surface_z) or np.all(interior > surface_z)) if len(interior) else True
    ends_ok = bool(np.all((z[[0, -1]] - surface_z) * (np.mean(interior) - surface_z if len(interior) else 1) >= 0))
    report = {
        "upper_min_area": float(au.min()) if len(au) else 0.0,
        "lower_max_area": float(al.max()) if len(al) else 0.0,
        "footprint_simple": bool(simple),
        "spine_one_side": one_side and ends_ok,
    }
    # case-3 triangles stand on a lateral quad edge, which lies on the normal
    # line through the spine vertex: they are vertical faces, flat in the plane
    bands_ok = (
        np.all(au[~lat_u] > eps) and np.all(al[~lat_l] < -eps) and np.all(au[lat_u] > -eps) and np.all(al[lat_l] < eps)
    )
    planar_ok = bool(bands_ok and simple and one_side and ends_ok)
    mesh = orient_outward(SurfaceMesh(V, tris, tags))
    return TrenchMesh(mesh, up, lo, poly, planar_ok, report)
