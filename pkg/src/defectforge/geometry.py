"""Small planar geometry kernel: areas, containment, clipping, ear clipping."""
from __future__ import annotations

import numpy as np


def cross2(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def polygon_area(poly) -> float:
    """Signed area (positive for counter-clockwise)."""
    p = np.asarray(poly, dtype=float)
    if len(p) < 3:
        return 0.0
    x, y = p[:, 0], p[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(np.roll(x, -1), y))


def triangle_areas(a, b, c):
    """Signed areas of 2D triangles given as (N,2) arrays."""
    return 0.5 * cross2(b - a, c - a)


def points_in_convex(points, poly, strict: bool = False, tol: float = 0.0) -> np.ndarray:
    """Containment in a counter-clockwise convex polygon."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    p = np.asarray(poly, dtype=float)
    e = np.roll(p, -1, axis=0) - p
    # (N, M) cross products of edge vectors with (point - edge start)
    c = e[None, :, 0] * (pts[:, None, 1] - p[None, :, 1]) - e[None, :, 1] * (pts[:, None, 0] - p[None, :, 0])
    if strict:
        return np.all(c > tol, axis=1)
    return np.all(c >= -tol, axis=1)


def points_in_polygon(points, poly) -> np.ndarray:
    """Even-odd containment for a simple polygon. Boundary points are unspecified."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    p = np.asarray(poly, dtype=float)
    q = np.roll(p, -1, axis=0)
    px, py = pts[:, 0][:, None], pts[:, 1][:, None]
    ay, by = p[None, :, 1], q[None, :, 1]
    straddle = (ay > py) != (by > py)
    with np.errstate(divide="ignore", invalid="ignore"):
        xint = p[None, :, 0] + (py - ay) * (q[None, :, 0] - p[None, :, 0]) / (by - ay)
    hits = straddle & (px < xint)
    return (np.count_nonzero(hits, axis=1) % 2) == 1


def polygon_is_simple(poly, tol: float = 0.0) -> bool:
    """True when no two non-adjacent edges touch and adjacent edges do not fold back."""
    p = np.asarray(poly, dtype=float)
    n = len(p)
    if n < 3:
        return False
    a = p
    b = np.roll(p, -1, axis=0)
    i, j = np.triu_indices(n, k=1)
    adjacent = (j == i + 1) | ((i == 0) & (j == n - 1))
    i, j = i[~adjacent], j[~adjacent]
    if len(i):
        hit = segments_touch(a[i], b[i], a[j], b[j], tol)
        if np.any(hit):
            return False
    # zero-length edges and exact fold-backs at a vertex
    d = b - a
    if np.any(np.hypot(d[:, 0], d[:, 1]) <= tol):
        return False
    prev = np.roll(d, 1, axis=0)
    fold = (np.abs(cross2(prev, d)) <= tol * np.hypot(prev[:, 0], prev[:, 1])) & (np.einsum("ij,ij->i", prev, d) < 0)
    return not np.any(fold)


def segments_touch(a0, a1, b0, b1, tol: float = 0.0) -> np.ndarray:
    """Vectorised closed-segment intersection test (touching counts)."""
    da = a1 - a0
    db = b1 - b0
    d1 = cross2(db, a0 - b0)
    d2 = cross2(db, a1 - b0)
    d3 = cross2(da, b0 - a0)
    d4 = cross2(da, b1 - a0)
    proper = (((d1 > tol) & (d2 < -tol)) | ((d1 < -tol) & (d2 > tol))) & (
        ((d3 > tol) & (d4 < -tol)) | ((d3 < -tol) & (d4 > tol))
    )

    def on_seg(p0, p1, q, d):
        lo = np.minimum(p0, p1) - tol
        hi = np.maximum(p0, p1) + tol
        return (np.abs(d) <= tol) & np.all((q >= lo) & (q <= hi), axis=-1)

    touch = on_seg(b0, b1, a0, d1) | on_seg(b0, b1, a1, d2) | on_seg(a0, a1, b0, d3) | on_seg(a0, a1, b1, d4)
    return proper | touch


def ear_clip(poly) -> np.ndarray:
    """Triangulate a simple polygon; returns (n-2, 3) indices, counter-clockwise.

    Convex input is fanned from vertex 0. Collinear vertices are never clipped
    as ears on their own; they disappear once a neighbour is clipped.
    """
    p = np.asarray(poly, dtype=float)
    n = len(p)
    if n < 3:
        raise ValueError("polygon needs at least 3 vertices")
    flip = polygon_area(p) < 0
    order = np.arange(n)[::-1] if flip else np.arange(n)
    q = p[order]
    e_prev = q - np.roll(q, 1, axis=0)
    e_next = np.roll(q, -1, axis=0) - q
    turns = cross2(e_prev, e_next)
    if np.all(turns > 0):
        tris = np.stack([np.zeros(n - 2, int), np.arange(1, n - 1), np.arange(2, n)], axis=1)
        return order[tris]

    scale = max(np.ptp(q[:, 0]), np.ptp(q[:, 1]), 1e-300)
    eps = 1e-14 * scale * scale
    nxt = list(range(1, n)) + [0]
    prv = [n - 1] + list(range(n - 1))
    alive = np.ones(n, dtype=bool)
    tris = []
    remaining = n

    def convex(i):
        a, b, c = q[prv[i]], q[i], q[nxt[i]]
        return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]) > eps

    def is_ear(i):
        if not convex(i):
            return False
        a, b, c = prv[i], i, nxt[i]
        idx = np.nonzero(alive)[0]
        idx = idx[(idx != a) & (idx != b) & (idx != c)]
        if len(idx) == 0:
            return True
        pts = q[idx]
        tri = q[[a, b, c]]
        inside = points_in_convex(pts, tri, strict=False, tol=eps)
        if not np.any(inside):
            return True
        # vertices coincident with a triangle corner (pinches) do not block the ear
        cand = pts[inside]
        same = np.zeros(len(cand), dtype=bool)
        for corner in tri:
            same |= np.all(cand == corner, axis=1)
        return bool(np.all(same))

    i = 0
    stall = 0
    while remaining > 3:
        if is_ear(i):
            tris.append((prv[i], i, nxt[i]))
            alive[i] = False
            a, c = prv[i], nxt[i]
            nxt[a] = c
            prv[c] = a
            remaining -= 1
            i = c
            stall = 0
        else:
            i = nxt[i]
            stall += 1
            if stall > remaining:
                # no strictly convex ear: clip the least-bad convex-or-flat vertex
                best, best_val = None, -np.inf
                j = i
                for _ in range(remaining):
                    a, b, c = q[prv[j]], q[j], q[nxt[j]]
                    v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
                    if v > best_val:
                        best, best_val = j, v
                    j = nxt[j]
                j = best
                tris.append((prv[j], j, nxt[j]))
                alive[j] = False
                a, c = prv[j], nxt[j]
                nxt[a] = c
                prv[c] = a
                remaining -= 1
                i = c
                stall = 0
    i = int(np.nonzero(alive)[0][0])
    tris.append((prv[i], i, nxt[i]))
    return order[np.asarray(tris, dtype=int)]


def ray_exit_convex(origin, direction, poly):
    """Exit of the ray origin + t*direction (t>0) from a convex polygon containing origin.

    Returns (t, edge_index, s) with the hit point on edge (poly[e], poly[e+1]) at parameter s.
    """
    o = np.asarray(origin, dtype=float)
    d = np.asarray(direction, dtype=float)
    p = np.asarray(poly, dtype=float)
    q = np.roll(p, -1, axis=0)
    e = q - p
    den = cross2(d[None, :], e)
    w = p - o
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross2(w, e) / den
        s = cross2(w, d[None, :]) / den
    ok = (np.abs(den) > 0) & (t > 0) & (s >= -1e-12) & (s <= 1 + 1e-12)
    if not np.any(ok):
        raise ValueError("ray does not leave the polygon")
    cand = np.nonzero(ok)[0]
    k = cand[np.argmax(t[cand])] if len(cand) > 1 else cand[0]
    # for a convex polygon and an interior origin there is one exit; take the
    # largest t to be robust against grazing a vertex shared by two edges
    return float(t[k]), int(k), float(np.clip(s[k], 0.0, 1.0))


def ray_exits_convex(origin, directions, poly):
    """Batched ray_exit_convex for many directions from one origin.

    Returns arrays (t, edge_index, s); zero directions get t = inf.
    """
    o = np.asarray(origin, dtype=float)
    d = np.atleast_2d(np.asarray(directions, dtype=float))
    p = np.asarray(poly, dtype=float)
    e = np.roll(p, -1, axis=0) - p
    w = p - o
    den = d[:, None, 0] * e[None, :, 1] - d[:, None, 1] * e[None, :, 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross2(w, e)[None, :] / den
        s = (w[None, :, 0] * d[:, None, 1] - w[None, :, 1] * d[:, None, 0]) / den
    ok = (np.abs(den) > 0) & (t > 0) & (s >= -1e-12) & (s <= 1 + 1e-12)
    tm = np.where(ok, t, -np.inf)
    k = np.argmax(tm, axis=1)
    rows = np.arange(len(d))
    tk = tm[rows, k]
    zero = ~np.any(d, axis=1)
    if np.any(~np.any(ok, axis=1) & ~zero):
        raise ValueError("ray does not leave the polygon")
    tk = np.where(zero, np.inf, tk)
    return tk, k, np.clip(np.where(zero, 0.0, s[rows, k]), 0.0, 1.0)


def clip_to_strip(poly, labels, xmin: float, xmax: float, border_label):
    """Clip a polygon to xmin <= x <= xmax, keeping per-edge labels.

    Edge k runs from poly[k] to poly[k+1] and carries labels[k]. New edges
    along the strip borders get ``border_label``. Crossing points get their x
    set exactly to the border.
    """
    pts = [tuple(map(float, v)) for v in poly]
    labs = list(labels)
    for side, xc in ((0, xmin), (1, xmax)):
        if not pts:
            break
        sgn = 1.0 if side == 0 else -1.0
        out_pts, out_labs = [], []
        n = len(pts)
        # label of the edge leading *into* each emitted vertex is tracked via
        # out_labs[k] = label of edge out_pts[k] -> out_pts[k+1]
        for k in range(n):
            p = pts[k]
            q = pts[(k + 1) % n]
            lab = labs[k]
            sp = sgn * (p[0] - xc)
            sq = sgn * (q[0] - xc)
            if sp >= 0:
                out_pts.append(p)
                out_labs.append(lab)
                if sp > 0 and sq < 0:
                    t = (xc - p[0]) / (q[0] - p[0])
                    out_pts.append((xc, p[1] + t * (q[1] - p[1])))
                    out_labs.append(border_label)
                elif sp == 0 and sq < 0:
                    out_labs[-1] = border_label
            else:
                if sq > 0:
                    t = (xc - p[0]) / (q[0] - p[0])
                    out_pts.append((xc, p[1] + t * (q[1] - p[1])))
                    out_labs.append(lab)
        pts, labs = out_pts, out_labs
    if len(pts) < 3:
        return np.zeros((0, 2)), []
    return np.asarray(pts), labs
