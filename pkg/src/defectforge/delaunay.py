"""Planar Delaunay triangulation by incremental insertion and Lawson flips.

Used for the interior of delaminated cells (a convex cell, its centre and a
few random interior points) and to improve ear-clipped cover polygons
(constrained: polygon edges are never flipped).
"""
from __future__ import annotations

import numpy as np


def orient(a, b, c) -> float:
    return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])


def incircle(a, b, c, d) -> float:
    """Positive when d is inside the circumcircle of counter-clockwise abc."""
    adx, ady = a[0] - d[0], a[1] - d[1]
    bdx, bdy = b[0] - d[0], b[1] - d[1]
    cdx, cdy = c[0] - d[0], c[1] - d[1]
    ad = adx * adx + ady * ady
    bd = bdx * bdx + bdy * bdy
    cd = cdx * cdx + cdy * cdy
    return adx * (bdy * cd - bd * cdy) - ady * (bdx * cd - bd * cdx) + ad * (bdx * cdy - bdy * cdx)


class _Tri:
    """Mutable triangle soup with an edge -> (triangle, slot) index."""

    def __init__(self, pts, tris):
        self.p = np.asarray(pts, dtype=float)
        self.t: list[list[int]] = [list(map(int, t)) for t in tris]
        self.alive: list[bool] = [True] * len(self.t)
        self.edge: dict = {}
        for f, t in enumerate(self.t):
            self._register(f)

    def _register(self, f):
        t = self.t[f]
        for k in range(3):
            self.edge[(t[k], t[(k + 1) % 3])] = f

    def _unregister(self, f):
        t = self.t[f]
        for k in range(3):
            e = (t[k], t[(k + 1) % 3])
            # during a flip the partner may already own this directed edge
            if self.edge.get(e) == f:
                del self.edge[e]

    def replace(self, f, new):
        self._unregister(f)
        self.t[f] = list(new)
        self._register(f)

    def add(self, new) -> int:
        self.t.append(list(new))
        self.alive.append(True)
        f = len(self.t) - 1
        self._register(f)
        return f

    def opposite(self, a, b):
        """Triangle across directed edge a->b (it holds b->a) and its apex."""
        g = self.edge.get((b, a))
        if g is None:
            return None, None
        t = self.t[g]
        for k in range(3):
            if t[k] == b and t[(k + 1) % 3] == a:
                return g, t[(k + 2) % 3]
        return None, None

    def triangles(self) -> np.ndarray:
        return np.asarray([t for t, ok in zip(self.t, self.alive) if ok], dtype=np.int64).reshape(-1, 3)


def _legalize(T: _Tri, stack, fixed, eps_rel: float):
    """Flip edges that fail the empty-circle test; ``fixed`` edges stay."""
    p = T.p
    scale = float(np.ptp(p, axis=0).max()) or 1.0
    eps = eps_rel * scale**4
    guard = 0
    while stack:
        guard += 1
        if guard > 200000:
            break
        a, b = stack.pop()
        if (min(a, b), max(a, b)) in fixed:
            continue
        f = T.edge.get((a, b))
        if f is None:
            continue
        t = T.t[f]
        k = t.index(a)
        c = t[(k + 2) % 3]
        g, d = T.opposite(a, b)
        if g is None:
            continue
        if incircle(p[a], p[b], p[c], p[d]) <= eps:
            continue
        # the quad a d b c must be strictly convex for the flip to be valid
        if orient(p[c], p[a], p[d]) <= 0 or orient(p[d], p[b], p[c]) <= 0:
            continue
        T.replace(f, (c, a, d))
        T.replace(g, (d, b, c))
        stack.extend([(a, d), (d, b), (b, c), (c, a)])


def lawson_flip(points, triangles, fixed_edges=(), eps_rel: float = 1e-12) -> np.ndarray:
    """Flip a counter-clockwise triangulation towards Delaunay, never touching fixed edges."""
    T = _Tri(points, triangles)
    fixed = {(min(a, b), max(a, b)) for a, b in fixed_edges}
    stack = []
    for t in T.t:
        for k in range(3):
            stack.append((t[k], t[(k + 1) % 3]))
    _legalize(T, stack, fixed, eps_rel)
    return T.triangles()


def delaunay_convex(polygon, center, interior) -> tuple[np.ndarray, np.ndarray]:
    """Delaunay triangulation of a convex polygon's vertices, a centre point
    and extra interior points. Returns (points, triangles); point order is
    polygon vertices, centre, interior points."""
    poly = np.asarray(polygon, dtype=float)
    K = len(poly)
    pts = np.vstack([poly, np.asarray(center, dtype=float)[None, :], np.asarray(interior, dtype=float).reshape(-1, 2)])
    c = K
    fan = [(k, (k + 1) % K, c) for k in range(K)]
    T = _Tri(pts, fan)
    hull = {(min(k, (k + 1) % K), max(k, (k + 1) % K)) for k in range(K)}
    _legalize(T, [(a, b) for t in T.t for a, b in ((t[0], t[1]), (t[1], t[2]), (t[2], t[0]))], hull, 1e-12)
    for r in range(K + 1, len(pts)):
        q = pts[r]
        # locate: first live triangle containing q (closed)
        host = None
        for f, t in enumerate(T.t):
            if not T.alive[f]:
                continue
            a, b, cc = (pts[i] for i in t)
            if orient(a, b, q) >= 0 and orient(b, cc, q) >= 0 and orient(cc, a, q) >= 0:
                host = f
                break
        if host is None:
            raise ValueError("interior point outside the polygon")
        a, b, cc = T.t[host]
        o = [orient(pts[a], pts[b], q), orient(pts[b], pts[cc], q), orient(pts[cc], pts[a], q)]
        zero = [i for i in range(3) if o[i] == 0]
        if zero:
            # q on an edge: split both neighbours
            e = zero[0]
            u, v = (a, b, cc)[e], (a, b, cc)[(e + 1) % 3]
            w = (a, b, cc)[(e + 2) % 3]
            g, x = T.opposite(u, v)
            T.replace(host, (u, r, w))
            T.add((r, v, w))
            stack = [(w, u), (v, w)]
            if g is not None:
                T.replace(g, (v, r, x))
                T.add((r, u, x))
                stack += [(x, v), (u, x)]
        else:
            T.replace(host, (a, b, r))
            T.add((b, cc, r))
            T.add((cc, a, r))
            stack = [(a, b), (b, cc), (cc, a)]
        _legalize(T, stack, hull, 1e-12)
    return pts, T.triangles()
