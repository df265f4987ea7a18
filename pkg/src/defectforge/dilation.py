"""Width-varying dilation of a spine path and the contours of the dilated band.

Each arc a_i = (alpha_i, omega_i) gets a half-width l_i and an upward unit
normal n_i. The raw band on the upper side is the rectangle spanned by a_i
and l_i n_i. At joints where the band opens up (reflex angle on that side)
the top edges are extended until they meet, which turns rectangles into
quadrilaterals Q_i = (alpha_i, omega_i, R_i, L_i). The upper contour is the
top of the outer boundary of the union of the Q_i, cut to the strip between
the window's left and right borders. The lower side is the same
construction applied to the path mirrored in y.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .errors import DegenerateContour, InvalidPath, InvalidWidths
from .geometry import clip_to_strip, cross2, points_in_polygon, polygon_area
from .pathing import Path

TOP, LEFT, RIGHT, BASE, BORDER = "top", "left", "right", "path", "border"
_PRIORITY = {TOP: 0, LEFT: 1, RIGHT: 1, BORDER: 2, BASE: 3}


@dataclass
class WidthProfile:
    half_widths: np.ndarray
    normals: np.ndarray


def upward_normals(path_xy: np.ndarray) -> np.ndarray:
    """Left unit normals of the arcs.

    For arcs heading right this is the upward normal. Arcs heading left keep
    the left normal too, so the band stays on one side of travel through
    backward hooks instead of swapping sides for a single arc.
    """
    a = np.diff(path_xy, axis=0)
    ln = np.hypot(a[:, 0], a[:, 1])
    return np.column_stack([-a[:, 1], a[:, 0]]) / ln[:, None]


def width_profile(path: Path, half_widths) -> WidthProfile:
    l = np.asarray(half_widths, dtype=float)
    if len(l) != len(path.vertices) - 1:
        raise InvalidWidths(f"need {len(path.vertices) - 1} half-widths, got {len(l)}")
    if not np.all(l > 0) or not np.all(np.isfinite(l)):
        raise InvalidWidths("half-widths must be positive and finite")
    return WidthProfile(l, upward_normals(path.vertices))


@dataclass
class Contour:
    """Polyline from the left border to the right border.

    origins[j] = (quad index, edge class) of arc j, edge class one of
    'top', 'left', 'right' (or 'border'/'path' in degenerate unions).
    """

    points: np.ndarray
    origins: list

    @property
    def k(self) -> int:
        return len(self.points) - 2


@dataclass
class DilatedPath:
    path: Path
    widths: WidthProfile
    upper_quads: np.ndarray
    lower_quads: np.ndarray
    upper: Contour
    lower: Contour
    xmin: float
    xmax: float
    degenerate_corners: int = 0

    def footprint(self) -> np.ndarray:
        """Outline: upper contour, path end, lower contour backwards, path start."""
        v = self.path.vertices
        return np.vstack([self.upper.points, v[-1:], self.lower.points[::-1], v[:1]])


def _joint_points(P, l, n, xmin, xmax):
    """Top-left L_i and top-right R_i corners of every quad on the normal side."""
    a = np.diff(P, axis=0)
    d = a / np.hypot(a[:, 0], a[:, 1])[:, None]
    k1 = len(a)
    L = P[:-1] + l[:, None] * n
    R = P[1:] + l[:, None] * n
    # which side of the travel direction the normal lies on (+1 left, -1 right)
    side = np.sign(cross2(d, n))
    degenerate = 0
    for i in range(k1 - 1):
        if side[i] != side[i + 1]:
            continue
        c = cross2(d[i], d[i + 1])
        if not side[i] * c < 0:
            continue  # angle on this side is at most pi: no gap
        w = P[i + 1]
        p1 = w + l[i] * n[i]
        p2 = w + l[i + 1] * n[i + 1]
        sin_phi = abs(c)
        if sin_phi < 1e-9:
            degenerate += 1
            continue
        det = cross2(d[i], d[i + 1])
        rhs = p2 - p1
        lam = cross2(rhs, d[i + 1]) / det
        tau = cross2(d[i], rhs) / det
        if lam > 0 and tau > 0:
            X = p1 + lam * d[i]
            R[i] = X
            L[i + 1] = X
            continue
        # rays miss each other: elongate the thinner side onto the nearest
        # lateral side of the wider rectangle and keep the wider corner
        if l[i] < l[i + 1]:
            # p1 + lam d_i = w + s n_{i+1}
            M = np.column_stack([d[i], -n[i + 1]])
            sol = np.linalg.solve(M, w - p1)
            lam, s = sol
            if lam > 0 and 0 <= s <= l[i + 1]:
                R[i] = p1 + lam * d[i]
                continue
        elif l[i + 1] < l[i]:
            # p2 - tau d_{i+1} = w + s n_i
            M = np.column_stack([-d[i + 1], -n[i]])
            sol = np.linalg.solve(M, w - p2)
            tau, s = sol
            if tau > 0 and 0 <= s <= l[i]:
                L[i + 1] = p2 - tau * d[i + 1]
                continue
        degenerate += 1
    # start and end gaps: extend the first and last top edges to the borders
    if L[0, 0] > xmin and d[0, 0] > 0:
        L[0] = L[0] - ((L[0, 0] - xmin) / d[0, 0]) * d[0]
        L[0, 0] = xmin
    if R[-1, 0] < xmax and d[-1, 0] > 0:
        R[-1] = R[-1] + ((xmax - R[-1, 0]) / d[-1, 0]) * d[-1]
        R[-1, 0] = xmax
    return L, R, degenerate


def dilation_quads(P, l, n, xmin, xmax):
    L, R, degenerate = _joint_points(P, l, n, xmin, xmax)
    quads = np.stack([P[:-1], P[1:], R, L], axis=1)
    return quads, degenerate


def _union_top_contour(quads, xmin, xmax, scale) -> Contour:
    """Top chain of the outer boundary of the union of quads inside the strip."""
    polys, labs = [], []
    base_labels = [BASE, RIGHT, TOP, LEFT]
    for i, q in enumerate(quads):
        lab = [(i, t) for t in base_labels]
        pts = q
        if polygon_area(pts) < 0:
            # reverse vertex order; edge k of the reversed polygon is old edge (2-k) mod 4
            pts = q[::-1]
            lab = [lab[(2 - k) % 4] for k in range(4)]
        cp, cl = clip_to_strip(pts, lab, xmin, xmax, (i, BORDER))
        if len(cp) >= 3 and abs(polygon_area(cp)) > 0:
            polys.append(cp)
            labs.append(cl)
    if not polys:
        raise DegenerateContour("dilation is empty inside the strip")

    A, B, S = [], [], []
    for cp, cl in zip(polys, labs):
        m = len(cp)
        for k in range(m):
            A.append(cp[k])
            B.append(cp[(k + 1) % m])
            S.append(cl[k])
    A = np.asarray(A)
    B = np.asarray(B)
    D = B - A
    Ln = np.hypot(D[:, 0], D[:, 1])
    good = Ln > 0
    A, B, D, Ln = A[good], B[good], D[good], Ln[good]
    S = [s for s, g in zip(S, good) if g]
    ns = len(A)

    # pairwise intersections
    I, J = np.triu_indices(ns, k=1)
    di, dj = D[I], D[J]
    w = A[J] - A[I]
    den = cross2(di, dj)
    eps = 1e-12
    par = np.abs(den) <= eps * Ln[I] * Ln[J]
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(par, np.nan, cross2(w, dj) / den)
        u = np.where(par, np.nan, cross2(w, di) / den)
    tt = 1e-12
    hit = ~par & (t >= -tt) & (t <= 1 + tt) & (u >= -tt) & (u <= 1 + tt)
    splits: list[list] = [[] for _ in range(ns)]
    extra_pts = []
    for a, b, ta, ub in zip(I[hit], J[hit], t[hit], u[hit]):
        X = A[a] + ta * D[a]
        extra_pts.append(X)
        splits[a].append((ta, X))
        splits[b].append((ub, X))
    # collinear overlaps
    col = par & (np.abs(cross2(di, w)) <= 1e-12 * Ln[I] * scale)
    for a, b in zip(I[col], J[col]):
        for (p, q, da, la) in ((a, b, D[a], Ln[a]), (b, a, D[b], Ln[b])):
            for X in (A[q], B[q]):
                s = float(np.dot(X - A[p], da) / (la * la))
                if 0 < s < 1:
                    splits[p].append((s, X))

    # pool nearly coincident points so pieces chain exactly
    pts = np.vstack([A, B] + ([np.asarray(extra_pts)] if extra_pts else []))
    tol = 1e-10 * scale
    parent = np.arange(len(pts))
    pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for p, q in pairs:
        rp, rq = find(p), find(q)
        if rp != rq:
            parent[max(rp, rq)] = min(rp, rq)
    tree = cKDTree(pts)

    def pid(X):
        _, k = tree.query(X)
        return find(int(k))

    pieces = []
    for s in range(ns):
        items = [(0.0, s), (1.0, ns + s)]
        for ta, X in splits[s]:
            if 0.0 < ta < 1.0:
                items.append((ta, pid(X)))
            # endpoint touches are already pooled via A/B
        items.sort(key=lambda x: x[0])
        ids = [find(i) if k == 0 or k == len(items) - 1 else i for k, (_, i) in enumerate(items)]
        for x, y in zip(ids[:-1], ids[1:]):
            if x != y:
                pieces.append((x, y, S[s]))

    if not pieces:
        raise DegenerateContour("no boundary pieces")
    P0 = pts[[p[0] for p in pieces]]
    P1 = pts[[p[1] for p in pieces]]
    mid = 0.5 * (P0 + P1)
    dv = P1 - P0
    dl = np.hypot(dv[:, 0], dv[:, 1])
    nrm = np.column_stack([-dv[:, 1], dv[:, 0]]) / np.where(dl == 0, 1, dl)[:, None]
    delta = 1e-8 * scale
    left_pts = mid + delta * nrm
    right_pts = mid - delta * nrm
    cov_l = np.zeros(len(pieces), dtype=bool)
    cov_r = np.zeros(len(pieces), dtype=bool)
    for cp in polys:
        lo, hi = cp.min(axis=0), cp.max(axis=0)
        for probe, cov in ((left_pts, cov_l), (right_pts, cov_r)):
            near = np.nonzero(np.all((probe >= lo) & (probe <= hi), axis=1))[0]
            if len(near):
                cov[near] |= points_in_polygon(probe[near], cp)
    # a boundary piece has the union on exactly one side; orient it to the left
    best: dict = {}
    for k, (x, y, lab) in enumerate(pieces):
        if cov_l[k] == cov_r[k]:
            continue
        if cov_r[k]:
            x, y = y, x
        key = (x, y)
        old = best.get(key)
        rank = (_PRIORITY[lab[1]], lab[0])
        if old is None or rank < old[0]:
            best[key] = (rank, lab)
    if not best:
        raise DegenerateContour("union has no boundary")

    out_edges: dict = {}
    for (x, y), (_, lab) in best.items():
        out_edges.setdefault(x, []).append((y, lab))
    used = set()
    loops = []
    for (x0, y0) in sorted(best):
        if (x0, y0) in used:
            continue
        loop = [(x0, y0, best[(x0, y0)][1])]
        used.add((x0, y0))
        cur_from, cur = x0, y0
        while True:
            cands = [(y, lab) for y, lab in out_edges.get(cur, []) if (cur, y) not in used]
            closing = cur == x0
            if closing:
                cands = cands + [(y0, None)]
            if not cands:
                break
            u = pts[cur] - pts[cur_from]
            # rightmost turn keeps the outer boundary as one loop through pinches
            def turn(c):
                wv = pts[c[0]] - pts[cur]
                return np.arctan2(cross2(u, wv), np.dot(u, wv))

            nxt = min(cands, key=lambda c: (turn(c), c[0]))
            if nxt[1] is None:
                break
            used.add((cur, nxt[0]))
            loop.append((cur, nxt[0], nxt[1]))
            cur_from, cur = cur, nxt[0]
        loops.append(loop)

    def loop_area(lp):
        poly = pts[[e[0] for e in lp]]
        return polygon_area(poly)

    outer = max(loops, key=loop_area)
    verts = [e[0] for e in outer]
    xs = pts[verts, 0]
    btol = 1e-9 * scale
    on_left = [k for k in range(len(verts)) if abs(xs[k] - xmin) <= btol]
    on_right = [k for k in range(len(verts)) if abs(xs[k] - xmax) <= btol]
    if not on_left or not on_right:
        raise DegenerateContour("union does not span the strip")
    kl = max(on_left, key=lambda k: pts[verts[k], 1])
    kr = max(on_right, key=lambda k: pts[verts[k], 1])
    m = len(outer)
    chain = []
    k = kr
    while k != kl:
        chain.append(outer[k])
        k = (k + 1) % m
        if len(chain) > m:
            raise DegenerateContour("contour walk did not terminate")
    chain.reverse()
    if not chain:
        raise DegenerateContour("empty contour")
    ids = [chain[0][1]] + [e[0] for e in chain]
    cpts = pts[ids].copy()
    cpts[0, 0] = xmin
    cpts[-1, 0] = xmax
    origins = [e[2] for e in chain]
    return _drop_tiny_arcs(Contour(cpts, origins), 1e-5 * scale)


def _drop_tiny_arcs(c: Contour, min_len: float) -> Contour:
    """Remove interior contour vertices that close arcs shorter than min_len.

    The merged arc keeps the origin of the longer of the two arcs.
    """
    pts = [p for p in c.points]
    org = list(c.origins)
    changed = True
    while changed and len(pts) > 2:
        changed = False
        for j in range(len(org)):
            ln = float(np.hypot(*(pts[j + 1] - pts[j])))
            if ln >= min_len:
                continue
            # vertex to drop: the interior endpoint of arc j
            v = j + 1 if j + 1 < len(pts) - 1 else j
            if v == 0 or len(pts) <= 2:
                continue
            la = float(np.hypot(*(pts[v] - pts[v - 1])))
            lb = float(np.hypot(*(pts[v + 1] - pts[v])))
            keep = org[v - 1] if la >= lb else org[v]
            del pts[v]
            org[v - 1 : v + 1] = [keep]
            changed = True
            break
    return Contour(np.asarray(pts), org)


def _mirror(xy):
    out = np.array(xy, dtype=float, copy=True)
    out[..., 1] *= -1.0
    return out


def dilate(path: Path, half_widths, xmin: float, xmax: float) -> DilatedPath:
    """Upper and lower dilation of ``path`` inside the strip xmin <= x <= xmax."""
    P = np.asarray(path.vertices, dtype=float)
    if len(P) < 2:
        raise InvalidPath("path needs at least one arc")
    if abs(P[0, 0] - xmin) > 1e-9 * (xmax - xmin) or abs(P[-1, 0] - xmax) > 1e-9 * (xmax - xmin):
        raise InvalidPath("path must start on the left border and end on the right border")
    a = np.diff(P, axis=0)
    if np.any(np.hypot(a[:, 0], a[:, 1]) == 0):
        raise InvalidPath("path has a zero-length arc")
    wp = width_profile(path, half_widths)
    scale = max(xmax - xmin, float(np.ptp(P[:, 1])), 1e-300)

    uq, dg1 = dilation_quads(P, wp.half_widths, wp.normals, xmin, xmax)
    upper = _union_top_contour(uq, xmin, xmax, scale)

    Pm = _mirror(P)
    nm = upward_normals(Pm)
    lq_m, dg2 = dilation_quads(Pm, wp.half_widths, nm, xmin, xmax)
    lower_m = _union_top_contour(lq_m, xmin, xmax, scale)
    lower = Contour(_mirror(lower_m.points), lower_m.origins)
    return DilatedPath(path, wp, uq, _mirror(lq_m), upper, lower, xmin, xmax, dg1 + dg2)
