"""Triangle surface meshes: welding, orientation, validation, volume."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree

from .errors import NotClosed


@dataclass
class SurfaceMesh:
    """Indexed triangle mesh; ``tags`` holds a small provenance string per triangle."""

    vertices: np.ndarray
    triangles: np.ndarray
    tags: list | None = None

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float).reshape(-1, 3)
        self.triangles = np.asarray(self.triangles, dtype=np.int64).reshape(-1, 3)
        if self.tags is None:
            self.tags = [""] * len(self.triangles)

    @property
    def is_empty(self) -> bool:
        return len(self.triangles) == 0

    def copy(self) -> "SurfaceMesh":
        return SurfaceMesh(self.vertices.copy(), self.triangles.copy(), list(self.tags))

    def translated(self, t) -> "SurfaceMesh":
        return SurfaceMesh(self.vertices + np.asarray(t, dtype=float), self.triangles.copy(), list(self.tags))

    def bbox(self):
        if len(self.vertices) == 0:
            return np.zeros(3), np.zeros(3)
        return self.vertices.min(axis=0), self.vertices.max(axis=0)

    def bbox_diagonal(self) -> float:
        lo, hi = self.bbox()
        return float(np.linalg.norm(hi - lo))

    def triangle_areas(self) -> np.ndarray:
        v = self.vertices[self.triangles]
        return 0.5 * np.linalg.norm(np.cross(v[:, 1] - v[:, 0], v[:, 2] - v[:, 0]), axis=1)


def concatenate(meshes) -> SurfaceMesh:
    vs, ts, tags = [], [], []
    off = 0
    for m in meshes:
        vs.append(m.vertices)
        ts.append(m.triangles + off)
        tags.extend(m.tags)
        off += len(m.vertices)
    if not vs:
        return SurfaceMesh(np.zeros((0, 3)), np.zeros((0, 3), dtype=np.int64))
    return SurfaceMesh(np.vstack(vs), np.vstack(ts), tags)


def weld(mesh: SurfaceMesh, rel_tol: float = 1e-9) -> SurfaceMesh:
    """Merge vertices closer than rel_tol * bbox diagonal, drop unused vertices
    and triangles that collapsed. Vertex order follows first use."""
    v = mesh.vertices
    t = mesh.triangles
    if len(v) == 0:
        return mesh.copy()
    tol = rel_tol * max(mesh.bbox_diagonal(), 1e-300)
    rep = np.arange(len(v))
    pairs = cKDTree(v).query_pairs(tol, output_type="ndarray")
    if len(pairs):
        # union-find to the smallest index in each cluster
        parent = np.arange(len(v))

        def find(a):
            while parent[a] != a:
                parent[a] = parent[parent[a]]
                a = parent[a]
            return a

        for a, b in pairs:
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)
        rep = np.array([find(a) for a in range(len(v))])
    t2 = rep[t]
    keep = (t2[:, 0] != t2[:, 1]) & (t2[:, 1] != t2[:, 2]) & (t2[:, 0] != t2[:, 2])
    t2 = t2[keep]
    tags = [g for g, k in zip(mesh.tags, keep) if k]
    used, first = np.unique(t2.ravel(), return_index=True)
    order = used[np.argsort(first, kind="stable")]
    remap = np.full(len(v), -1, dtype=np.int64)
    remap[order] = np.arange(len(order))
    return SurfaceMesh(v[order], remap[t2], tags)


def _edge_table(tris: np.ndarray):
    """Directed half-edges and their undirected keys."""
    he = np.concatenate([tris[:, [0, 1]], tris[:, [1, 2]], tris[:, [2, 0]]])
    face = np.tile(np.arange(len(tris)), 3)
    und = np.sort(he, axis=1)
    return he, face, und


def orient_consistently(tris: np.ndarray) -> np.ndarray:
    """Flip triangles so that every manifold edge is used in opposite directions.

    Breadth-first over edge-adjacent faces; non-manifold edges are not crossed.
    """
    tris = np.array(tris, dtype=np.int64, copy=True)
    F = len(tris)
    if F == 0:
        return tris
    he, face, und = _edge_table(tris)
    keys, inv, counts = np.unique(und, axis=0, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    order = np.argsort(inv, kind="stable")
    starts = np.concatenate([[0], np.cumsum(counts)])
    nbrs: list[list[int]] = [[] for _ in range(F)]
    for e in np.nonzero(counts == 2)[0]:
        f1, f2 = face[order[starts[e]]], face[order[starts[e] + 1]]
        nbrs[f1].append((f2, e))
        nbrs[f2].append((f1, e))
    seen = np.zeros(F, dtype=bool)

    def dir_of(f, e):
        a, b = keys[e]
        t = tris[f]
        for k in range(3):
            if t[k] == a and t[(k + 1) % 3] == b:
                return 1
        return -1

    for root in range(F):
        if seen[root]:
            continue
        seen[root] = True
        q = deque([root])
        while q:
            f = q.popleft()
            for g, e in nbrs[f]:
                if seen[g]:
                    continue
                if dir_of(f, e) == dir_of(g, e):
                    tris[g] = tris[g][[0, 2, 1]]
                seen[g] = True
                q.append(g)
    return tris


def _component_labels(tris: np.ndarray, nv: int):
    if len(tris) == 0:
        return 0, np.zeros(0, dtype=int)
    r = np.concatenate([tris[:, 0], tris[:, 1]])
    c = np.concatenate([tris[:, 1], tris[:, 2]])
    g = coo_matrix((np.ones(len(r)), (r, c)), shape=(nv, nv))
    return connected_components(g, directed=False)


def signed_volume(mesh: SurfaceMesh, require_closed: bool = True) -> float:
    """Divergence-theorem volume, computed about the bbox centre for translation stability."""
    if mesh.is_empty:
        return 0.0
    if require_closed:
        _, _, und = _edge_table(mesh.triangles)
        _, counts = np.unique(und, axis=0, return_counts=True)
        if np.any(counts != 2):
            raise NotClosed("mesh has boundary or non-manifold edges")
    lo, hi = mesh.bbox()
    v = mesh.vertices - 0.5 * (lo + hi)
    a, b, c = v[mesh.triangles[:, 0]], v[mesh.triangles[:, 1]], v[mesh.triangles[:, 2]]
    return float(np.sum(np.einsum("ij,ij->i", a, np.cross(b, c)))) / 6.0


def orient_outward(mesh: SurfaceMesh) -> SurfaceMesh:
    """Consistent orientation, then each closed component flipped to positive volume."""
    tris = orient_consistently(mesh.triangles)
    ncomp, lab = _component_labels(tris, len(mesh.vertices))
    flab = lab[tris[:, 0]] if len(tris) else lab
    for c in range(ncomp):
        sel = flab == c
        if not np.any(sel):
            continue
        sub = SurfaceMesh(mesh.vertices, tris[sel])
        if signed_volume(sub, require_closed=False) < 0:
            tris[sel] = tris[sel][:, [0, 2, 1]]
    return SurfaceMesh(mesh.vertices, tris, list(mesh.tags))


# ---------------------------------------------------------------- validation


@dataclass
class ValidationReport:
    closed: bool
    oriented: bool
    euler: int
    components: int
    euler_per_component: list
    min_area: float
    boundary_edges: int
    nonmanifold_edges: int
    self_intersections: int
    self_intersection_mode: str
    volume: float | None = None
    notes: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return (
            self.closed
            and self.oriented
            and self.self_intersections == 0
            and self.min_area > 0
            and all(e == 2 for e in self.euler_per_component)
        )

    def to_dict(self) -> dict:
        return {
            "closed": self.closed,
            "oriented": self.oriented,
            "euler": self.euler,
            "components": self.components,
            "euler_per_component": list(self.euler_per_component),
            "min_area": self.min_area,
            "boundary_edges": self.boundary_edges,
            "nonmanifold_edges": self.nonmanifold_edges,
            "self_intersections": self.self_intersections,
            "self_intersection_mode": self.self_intersection_mode,
            "volume": self.volume,
            "ok": self.ok,
        }


def validate(mesh: SurfaceMesh, self_intersection: bool = True, exhaustive_limit: int = 20000, seed: int = 0) -> ValidationReport:
    if mesh.is_empty:
        raise ValueError("cannot validate an empty mesh")
    tris = mesh.triangles
    nv = len(mesh.vertices)
    he, face, und = _edge_table(tris)
    keys, inv, counts = np.unique(und, axis=0, return_inverse=True, return_counts=True)
    inv = inv.ravel()
    boundary = int(np.sum(counts == 1))
    nonmanifold = int(np.sum(counts > 2))
    closed = boundary == 0 and nonmanifold == 0
    # orientation: the two half-edges of each manifold edge point opposite ways
    fwd = he[:, 0] < he[:, 1]
    s = np.zeros(len(keys))
    np.add.at(s, inv, np.where(fwd, 1, -1))
    oriented = bool(np.all(s[counts == 2] == 0))
    used = np.unique(tris)
    euler = len(used) - len(keys) + len(tris)
    ncomp, lab = _component_labels(tris, nv)
    comps = np.unique(lab[used])
    epc = []
    flab = lab[tris[:, 0]]
    elab = lab[keys[:, 0]]
    for c in comps:
        vcount = int(np.sum(lab[used] == c))
        epc.append(vcount - int(np.sum(elab == c)) + int(np.sum(flab == c)))
    areas = mesh.triangle_areas()
    if self_intersection:
        if len(tris) <= exhaustive_limit:
            nsi, mode = count_self_intersections(mesh), "exhaustive"
        else:
            rng = np.random.default_rng(seed)
            sample = rng.choice(len(tris), exhaustive_limit, replace=False)
            nsi, mode = count_self_intersections(mesh, subset=sample), "sampled"
    else:
        nsi, mode = 0, "skipped"
    vol = None
    if closed:
        vol = signed_volume(mesh)
    return ValidationReport(
        closed=closed,
        oriented=oriented,
        euler=int(euler),
        components=len(comps),
        euler_per_component=[int(e) for e in epc],
        min_area=float(areas.min()),
        boundary_edges=boundary,
        nonmanifold_edges=nonmanifold,
        self_intersections=int(nsi),
        self_intersection_mode=mode,
        volume=vol,
    )


def _candidate_pairs(lo: np.ndarray, hi: np.ndarray, subset=None, chunk: int = 2_000_000):
    """AABB-overlapping triangle pairs (i < j) via sweep on the longest axis."""
    axis = int(np.argmax(hi.max(axis=0) - lo.min(axis=0)))
    order = np.argsort(lo[:, axis], kind="stable")
    slo = lo[order, axis]
    ends = np.searchsorted(slo, hi[order, axis], side="right")
    idx = np.arange(len(order))
    counts = np.maximum(ends - idx - 1, 0)
    out_i, out_j = [], []
    start = 0
    n = len(order)
    while start < n:
        # grow the block until it holds about ``chunk`` pairs
        c = np.cumsum(counts[start:])
        stop = start + int(np.searchsorted(c, chunk, side="right")) + 1
        stop = min(max(stop, start + 1), n)
        cnt = counts[start:stop]
        tot = int(cnt.sum())
        if tot:
            ii = np.repeat(idx[start:stop], cnt)
            offs = np.arange(tot) - np.repeat(np.cumsum(cnt) - cnt, cnt)
            jj = ii + 1 + offs
            a, b = order[ii], order[jj]
            ok = np.all((lo[a] <= hi[b]) & (lo[b] <= hi[a]), axis=1)
            a, b = a[ok], b[ok]
            if subset is not None:
                ok = subset[a] | subset[b]
                a, b = a[ok], b[ok]
            out_i.append(np.minimum(a, b))
            out_j.append(np.maximum(a, b))
        start = stop
    if not out_i:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
    return np.concatenate(out_i), np.concatenate(out_j)


def _seg_tri_cross(p, q, a, b, c, tol):
    """Proper crossing of segments pq with triangles abc (all (N,3))."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return _seg_tri_cross_impl(p, q, a, b, c, tol)


def _seg_tri_cross_impl(p, q, a, b, c, tol):
    n = np.cross(b - a, c - a)
    nn = np.linalg.norm(n, axis=1)
    nn = np.where(nn == 0, 1.0, nn)
    dp = np.einsum("ij,ij->i", n, p - a) / nn
    dq = np.einsum("ij,ij->i", n, q - a) / nn
    cross = ((dp > tol) & (dq < -tol)) | ((dp < -tol) & (dq > tol))
    t = np.where(cross, dp / np.where(cross, dp - dq, 1.0), 0.0)
    x = p + t[:, None] * (q - p)
    nu = n / nn[:, None]
    # signed distances of x to each triangle edge, inside the triangle plane
    def edge_dist(u, v):
        e = v - u
        le = np.linalg.norm(e, axis=1)
        le = np.where(le == 0, 1.0, le)
        return np.einsum("ij,ij->i", np.cross(e, x - u), nu) / le

    inside = (edge_dist(a, b) > tol) & (edge_dist(b, c) > tol) & (edge_dist(c, a) > tol)
    return cross & inside


def _coplanar_overlap(A, B, tol):
    """For coplanar triangle pairs: interiors overlap in the common plane."""
    n = np.cross(A[:, 1] - A[:, 0], A[:, 2] - A[:, 0])
    ax = np.argmax(np.abs(n), axis=1)
    keep = [(1, 2), (0, 2), (0, 1)]
    A2 = np.empty((len(A), 3, 2))
    B2 = np.empty((len(B), 3, 2))
    for k, (u, v) in enumerate(keep):
        s = ax == k
        A2[s] = A[s][:, :, [u, v]]
        B2[s] = B[s][:, :, [u, v]]

    def orient(T):
        ar = (T[:, 1, 0] - T[:, 0, 0]) * (T[:, 2, 1] - T[:, 0, 1]) - (T[:, 1, 1] - T[:, 0, 1]) * (T[:, 2, 0] - T[:, 0, 0])
        T = T.copy()
        f = ar < 0
        T[f] = T[f][:, [0, 2, 1]]
        return T

    A2, B2 = orient(A2), orient(B2)

    def strictly_inside(P, T):
        r = np.ones(len(P), dtype=bool)
        for k in range(3):
            u, v = T[:, k], T[:, (k + 1) % 3]
            e = v - u
            le = np.hypot(e[:, 0], e[:, 1])
            le = np.where(le == 0, 1.0, le)
            r &= (e[:, 0] * (P[:, 1] - u[:, 1]) - e[:, 1] * (P[:, 0] - u[:, 0])) / le > tol
        return r

    hit = np.zeros(len(A), dtype=bool)
    # a vertex (or the centroid) of one strictly inside the other
    for P in (A2.mean(axis=1), B2.mean(axis=1)):
        hit |= strictly_inside(P, B2) & strictly_inside(P, A2)
    for k in range(3):
        hit |= strictly_inside(A2[:, k], B2) | strictly_inside(B2[:, k], A2)
    # proper edge crossings
    for i in range(3):
        for j in range(3):
            p0, p1 = A2[:, i], A2[:, (i + 1) % 3]
            q0, q1 = B2[:, j], B2[:, (j + 1) % 3]
            d = p1 - p0
            e = q1 - q0

            def cr(u, w):
                return u[:, 0] * w[:, 1] - u[:, 1] * w[:, 0]

            ld = np.where(np.hypot(d[:, 0], d[:, 1]) == 0, 1, np.hypot(d[:, 0], d[:, 1]))
            le = np.where(np.hypot(e[:, 0], e[:, 1]) == 0, 1, np.hypot(e[:, 0], e[:, 1]))
            d1 = cr(e, p0 - q0) / le
            d2 = cr(e, p1 - q0) / le
            d3 = cr(d, q0 - p0) / ld
            d4 = cr(d, q1 - p0) / ld
            hit |= (((d1 > tol) & (d2 < -tol)) | ((d1 < -tol) & (d2 > tol))) & (
                ((d3 > tol) & (d4 < -tol)) | ((d3 < -tol) & (d4 > tol))
            )
    return hit


def count_self_intersections(mesh: SurfaceMesh, subset=None, rel_tol: float = 1e-9) -> int:
    """Number of intersecting triangle pairs, ignoring contact along shared
    vertices and edges. With ``subset`` only pairs touching those triangles are tested."""
    V = mesh.vertices
    T = mesh.triangles
    if len(T) < 2:
        return 0
    tol = rel_tol * max(mesh.bbox_diagonal(), 1e-300)
    P = V[T]
    lo = P.min(axis=1) - tol
    hi = P.max(axis=1) + tol
    mask = None
    if subset is not None:
        mask = np.zeros(len(T), dtype=bool)
        mask[np.asarray(subset)] = True
    I, J = _candidate_pairs(lo, hi, mask)
    if len(I) == 0:
        return 0
    total = 0
    step = 200_000
    for s in range(0, len(I), step):
        total += _count_pairs(V, T, I[s : s + step], J[s : s + step], tol)
    return total


def _count_pairs(V, T, I, J, tol) -> int:
    TA, TB = T[I], T[J]
    shared = np.zeros(len(I), dtype=int)
    for a in range(3):
        for b in range(3):
            shared += TA[:, a] == TB[:, b]
    A, B = V[TA], V[TB]
    hit = np.zeros(len(I), dtype=bool)
    hit |= shared == 3

    nA = np.cross(A[:, 1] - A[:, 0], A[:, 2] - A[:, 0])
    nAl = np.linalg.norm(nA, axis=1)
    nAl = np.where(nAl == 0, 1.0, nAl)
    dB = np.einsum("ikj,ij->ik", B - A[:, :1], nA) / nAl[:, None]
    coplanar = np.all(np.abs(dB) <= tol, axis=1)

    # disjoint pairs
    s0 = (shared == 0) & ~coplanar
    if np.any(s0):
        a, b = A[s0], B[s0]
        h = np.zeros(len(a), dtype=bool)
        for k in range(3):
            h |= _seg_tri_cross(a[:, k], a[:, (k + 1) % 3], b[:, 0], b[:, 1], b[:, 2], tol)
            h |= _seg_tri_cross(b[:, k], b[:, (k + 1) % 3], a[:, 0], a[:, 1], a[:, 2], tol)
        hit[s0] |= h

    # one shared vertex: test the edges opposite the shared vertex
    s1 = (shared == 1) & ~coplanar
    if np.any(s1):
        ta, tb = TA[s1], TB[s1]
        a, b = A[s1], B[s1]
        ka = np.zeros(len(ta), dtype=int)
        kb = np.zeros(len(tb), dtype=int)
        for x in range(3):
            for y in range(3):
                m = ta[:, x] == tb[:, y]
                ka[m] = x
                kb[m] = y
        r = np.arange(len(ta))
        pa, qa = a[r, (ka + 1) % 3], a[r, (ka + 2) % 3]
        pb, qb = b[r, (kb + 1) % 3], b[r, (kb + 2) % 3]
        h = _seg_tri_cross(pa, qa, b[:, 0], b[:, 1], b[:, 2], tol)
        h |= _seg_tri_cross(pb, qb, a[:, 0], a[:, 1], a[:, 2], tol)
        hit[s1] |= h

    # coplanar pairs: overlap of interiors (covers folded shared edges too)
    sc = coplanar & (shared < 3)
    if np.any(sc):
        hit[sc] |= _coplanar_overlap(A[sc], B[sc], tol)
    return int(np.count_nonzero(hit))
