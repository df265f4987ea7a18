"""Scabs and surface delamination.

A coarse tessellation decides which pieces break off; a fine tessellation of
the same window gives them jagged borders. Fine cells are grouped by the
coarse cell containing their adjusted reference point. Each fine cell is
triangulated (a fan, or a Delaunay triangulation with extra interior points
for larger cells), heights are assembled from a rim elevation and a per-cell
texture bump, and every group becomes a two-layer closed solid.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field, fields

import numpy as np
from scipy.spatial import cKDTree

from .delaunay import delaunay_convex
from .errors import DefectForgeError, GenerationFailed, InvalidParams
from .geometry import cross2, points_in_polygon, polygon_area, ray_exit_convex, ray_exits_convex
from .mesh import SurfaceMesh, ValidationReport, concatenate, orient_outward, validate
from .rng import RandomStream, uniform_in_polygon
from .tessellation import Tessellation, Window, build_voronoi


@dataclass
class DelamParams:
    window: Window = field(default_factory=lambda: Window(0.0, 1.0, 0.0, 1.0))
    gamma: float | None = None  # default 0.1 * window width
    n_coarse: int = 10
    n_fine: int = 110
    r_max: int = 12
    surface_height: float = 1.0
    layer_thickness: float = 0.01
    elevation_max_range: tuple = (0.02, 0.05)
    threshold_range: tuple = (0.5, 0.8)
    texture_height_range: tuple = (0.0, 0.004)
    selection: str | int = "all"  # or a count of coarse cells drawn without replacement
    max_attempts: int = 10

    @property
    def gamma_value(self) -> float:
        return 0.1 * self.window.width if self.gamma is None else float(self.gamma)

    def validate(self) -> "DelamParams":
        if self.n_coarse < 1:
            raise InvalidParams("n_coarse", "need at least 1 coarse generator")
        if self.n_fine < 2:
            raise InvalidParams("n_fine", "need at least 2 fine generators")
        if self.n_fine < 5 * self.n_coarse:
            raise InvalidParams("n_fine", f"must be at least 5 * n_coarse = {5 * self.n_coarse}")
        if self.r_max < 0:
            raise InvalidParams("r_max", "must be >= 0")
        if not self.layer_thickness > 0:
            raise InvalidParams("layer_thickness", "must be > 0")
        lo, hi = map(float, self.elevation_max_range)
        if not (0 < lo <= hi):
            raise InvalidParams("elevation_max_range", "need 0 < min <= max")
        lo, hi = map(float, self.threshold_range)
        if not (0 <= lo <= hi <= 1):
            raise InvalidParams("threshold_range", "need 0 <= min <= max <= 1")
        lo, hi = map(float, self.texture_height_range)
        if not (0 <= lo <= hi):
            raise InvalidParams("texture_height_range", "need 0 <= min <= max")
        if self.gamma is not None and self.gamma < 0:
            raise InvalidParams("gamma", "must be >= 0")
        if self.selection != "all":
            if not isinstance(self.selection, int) or self.selection < 1:
                raise InvalidParams("selection", "must be 'all' or a positive count")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = self.window.to_list()
        for k in ("elevation_max_range", "threshold_range", "texture_height_range"):
            d[k] = list(d[k])
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "DelamParams":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InvalidParams(sorted(extra)[0], "unknown parameter")
        d = dict(d)
        if "window" in d and not isinstance(d["window"], Window):
            d["window"] = Window(*map(float, d["window"]))
        for k in ("elevation_max_range", "threshold_range", "texture_height_range"):
            if k in d:
                if len(d[k]) != 2:
                    raise InvalidParams(k, "expects [min, max]")
                d[k] = (float(d[k][0]), float(d[k][1]))
        return cls(**d)


# ------------------------------------------------------------ grouping


def nearest_generator(generators: np.ndarray, points: np.ndarray) -> np.ndarray:
    """Index of the closest generator, ties to the lowest index."""
    g = np.asarray(generators, dtype=float)
    p = np.atleast_2d(np.asarray(points, dtype=float))
    k = min(len(g), 4)
    dist, idx = cKDTree(g).query(p, k=k)
    dist = np.atleast_2d(dist).reshape(len(p), -1)
    idx = np.atleast_2d(idx).reshape(len(p), -1)
    # exact squared distances decide; among equal ones the lowest index wins
    d2 = ((g[idx] - p[:, None, :]) ** 2).sum(axis=2)
    best = d2.min(axis=1, keepdims=True)
    cand = np.where(d2 == best, idx, np.iinfo(np.int64).max)
    return cand.min(axis=1)


def group_fine_cells(coarse: Tessellation, fine: Tessellation) -> dict:
    """coarse cell index -> sorted list of fine cell indices."""
    ids = fine.nonempty
    pts = np.array([fine.adjusted_reference_point(j) for j in ids])
    owner = nearest_generator(coarse.generators, pts)
    groups: dict = {}
    for j, o in zip(ids, owner):
        groups.setdefault(int(o), []).append(int(j))
    return groups


def boundary_loops(fine: Tessellation, cell_ids) -> list:
    """Boundary loops (lists of vertex ids) of the union of the given cells.
    Outer loops are counter-clockwise, holes clockwise."""
    directed = set()
    for j in cell_ids:
        c = fine.cells[j]
        for a, b in zip(c, c[1:] + c[:1]):
            directed.add((a, b))
    nxt: dict = {}
    for a, b in directed:
        if (b, a) not in directed:
            nxt[a] = b
    loops = []
    seen = set()
    for s in sorted(nxt):
        if s in seen:
            continue
        lp = [s]
        seen.add(s)
        v = nxt[s]
        while v != s:
            if v in seen:
                raise GenerationFailed("pinched group boundary")
            lp.append(v)
            seen.add(v)
            v = nxt[v]
        loops.append(lp)
    return loops


def absorb_holes(fine: Tessellation, groups: dict) -> dict:
    """Fine cells enclosed by another group are handed to the enclosing group,
    so every group is free of holes."""
    groups = {k: list(v) for k, v in groups.items()}
    for _ in range(10):
        changed = False
        for gi in sorted(groups):
            for lp in boundary_loops(fine, groups[gi]):
                poly = fine.vertices[lp]
                if polygon_area(poly) >= 0:
                    continue
                for gj in sorted(groups):
                    if gj == gi:
                        continue
                    keep = []
                    for j in groups[gj]:
                        if points_in_polygon(fine.reference_point(j)[None], poly)[0]:
                            groups[gi].append(j)
                            changed = True
                        else:
                            keep.append(j)
                    groups[gj] = keep
        groups = {k: sorted(v) for k, v in groups.items() if v}
        if not changed:
            return groups
    raise GenerationFailed("could not remove holes from delamination groups")


# ------------------------------------------------------------ cell triangulation


def interior_point_count(area: float, max_area: float, r_max: int) -> int:
    """R = area / max_area * R_max rounded to the nearest integer, halves up."""
    x = area / max_area * r_max
    # guard against 10.999999999999998 style results for exact ratios
    return int(math.floor(round(x, 9) + 0.5))


def triangulate_cell(stream: RandomStream, polygon, center, r: int) -> tuple[np.ndarray, np.ndarray]:
    """Fan to the centre for r == 0, else Delaunay of corners, centre and r
    uniform interior points. Returns (points, triangles); points are the
    polygon corners, the centre, then the interior points."""
    poly = np.asarray(polygon, dtype=float)
    K = len(poly)
    c = np.asarray(center, dtype=float)
    if r <= 0:
        pts = np.vstack([poly, c[None]])
        tris = np.array([(k, (k + 1) % K, K) for k in range(K)], dtype=np.int64)
        return pts, tris
    inner = uniform_in_polygon(stream, poly, r)
    return delaunay_convex(poly, c, inner)


# ------------------------------------------------------------ distances


def relative_distance(p, polygon, center) -> float:
    """||p - b|| / ||c - b|| with b the exit of the ray from c through p on
    the convex polygon's border: 0 on the border, 1 at the centre."""
    p = np.asarray(p, dtype=float)
    c = np.asarray(center, dtype=float)
    d = p - c
    if not np.any(d):
        return 1.0
    t, _, _ = ray_exit_convex(c, d, polygon)
    b = c + t * d
    return float(np.hypot(*(p - b)) / np.hypot(*(c - b)))


def radial_ratio(p, polygon, center) -> float:
    """||p - c|| / ||b - c||: at most 1 inside the convex polygon, above 1 outside."""
    p = np.asarray(p, dtype=float)
    c = np.asarray(center, dtype=float)
    d = p - c
    if not np.any(d):
        return 0.0
    t, _, _ = ray_exit_convex(c, d, polygon)
    return 1.0 / t


def texture_height(v, polygon, center, t_j: float) -> float:
    """Cosine bump: t_j at the centre, 0 on the cell border."""
    rho = radial_ratio(v, polygon, center)
    return t_j * 0.5 * (math.cos(math.pi * min(rho, 1.0)) + 1.0)


def texture_heights(vs, polygon, center, t_j: float) -> np.ndarray:
    """Vectorised texture_height for the vertices ``vs`` of one fine cell."""
    c = np.asarray(center, dtype=float)
    t, _, _ = ray_exits_convex(c, np.asarray(vs, dtype=float) - c, polygon)
    rho = np.where(np.isinf(t), 0.0, 1.0 / t)
    return t_j * 0.5 * (np.cos(np.pi * np.minimum(rho, 1.0)) + 1.0)


def _ray_hits(c, d, segs_a, segs_b):
    """Parameters t > 0 (along c + t d) and edge params where the ray meets segments."""
    e = segs_b - segs_a
    den = cross2(d[None, :], e)
    w = segs_a - c
    with np.errstate(divide="ignore", invalid="ignore"):
        t = cross2(w, e) / den
        s = cross2(w, d[None, :]) / den
    ok = (den != 0) & (t > 0) & (s >= -1e-12) & (s <= 1 + 1e-12)
    return t, np.clip(s, 0.0, 1.0), ok


# ------------------------------------------------------------ cells


@dataclass
class DelamCell:
    coarse_index: int
    coarse_polygon: np.ndarray
    center: np.ndarray
    fine_cells: list
    loops: list  # boundary loops of the group, as indices into ``vertices``
    vertices: np.ndarray  # 2D
    triangles: np.ndarray
    triangle_cell: np.ndarray  # fine cell of each triangle
    interior_counts: dict  # fine cell -> R
    thresholds: np.ndarray  # per coarse polygon vertex
    contour_maxima: list  # per loop, per loop vertex
    ratio: np.ndarray = None  # radial ratio per vertex (elevation gate)
    threshold: np.ndarray = None  # d(v) per vertex
    h_elev: np.ndarray = None
    h_tex: np.ndarray = None
    mesh: SurfaceMesh | None = None
    report: ValidationReport | None = None


def _cyclic_ma3(u: np.ndarray) -> np.ndarray:
    if len(u) < 3:
        return u.copy()
    return (np.roll(u, 1) + u + np.roll(u, -1)) / 3.0


def build_cells(stream: RandomStream, p: DelamParams, coarse: Tessellation, fine: Tessellation) -> list:
    """Group, triangulate and assign heights; meshes are built separately."""
    groups = absorb_holes(fine, group_fine_cells(coarse, fine))
    max_area = max(fine.cell_area(j) for j in fine.nonempty)
    # triangulate every fine cell once; vertices on shared borders are global
    nfv = len(fine.vertices)
    cell_tri: dict = {}
    extra_pts: list = []
    tex_t = {}
    for j in fine.nonempty:
        cs = stream.child("fine", j)
        poly = fine.cell_polygon(j)
        R = interior_point_count(fine.cell_area(j), max_area, p.r_max)
        pts, tris = triangulate_cell(cs.child("interior"), poly, fine.reference_point(j), R)
        K = len(poly)
        ids = np.empty(len(pts), dtype=np.int64)
        ids[:K] = fine.cells[j]
        ids[K:] = nfv + len(extra_pts) + np.arange(len(pts) - K)
        extra_pts.extend(pts[K:])
        cell_tri[j] = (ids[tris], R)
        tex_t[j] = float(cs.uniform(*p.texture_height_range))
    allv = np.vstack([fine.vertices, np.asarray(extra_pts).reshape(-1, 2)])

    cells = []
    for ci in sorted(groups):
        cs = stream.child("coarse", ci)
        fids = groups[ci]
        tris = np.vstack([cell_tri[j][0] for j in fids])
        tcell = np.concatenate([[j] * len(cell_tri[j][0]) for j in fids])
        used = np.unique(tris)
        remap = np.full(len(allv), -1, dtype=np.int64)
        remap[used] = np.arange(len(used))
        V = allv[used]
        loops = [remap[np.asarray(lp)] for lp in boundary_loops(fine, fids)]
        cpoly = coarse.cell_polygon(ci)
        center = coarse.reference_point(ci)
        thr = cs.uniform(*p.threshold_range, len(cpoly))
        maxima = [_cyclic_ma3(cs.child("rim", k).uniform(*p.elevation_max_range, len(lp))) for k, lp in enumerate(loops)]
        cell = DelamCell(ci, cpoly, center, fids, loops, V, remap[tris], tcell, {j: cell_tri[j][1] for j in fids}, thr, maxima)
        _assign_heights(cell, fine, tex_t)
        cells.append(cell)
    return cells


def _assign_heights(cell: DelamCell, fine: Tessellation, tex_t: dict):
    V = cell.vertices
    c = cell.center
    cpoly = cell.coarse_polygon
    nC = len(cpoly)
    # loop segments with contour maxima at both ends
    sa, sb, ea, eb = [], [], [], []
    on_loop = {}
    for lp, mx in zip(cell.loops, cell.contour_maxima):
        for k in range(len(lp)):
            sa.append(V[lp[k]])
            sb.append(V[lp[(k + 1) % len(lp)]])
            ea.append(mx[k])
            eb.append(mx[(k + 1) % len(lp)])
            on_loop[int(lp[k])] = mx[k]
    sa, sb, ea, eb = map(np.asarray, (sa, sb, ea, eb))

    n = len(V)
    ratio = np.zeros(n)
    dthr = np.zeros(n)
    helev = np.zeros(n)
    T_all, E_all, S_all = ray_exits_convex(c, V - c, cpoly)
    for v in range(n):
        dv = V[v] - c
        if not np.any(dv):
            ratio[v] = 0.0
            dthr[v] = cell.thresholds[0]
            continue
        t, e, s = T_all[v], int(E_all[v]), S_all[v]
        ratio[v] = 1.0 / t
        # threshold of the coarse corner nearest to where the ray leaves
        dthr[v] = cell.thresholds[e] if s <= 0.5 else cell.thresholds[(e + 1) % nC]
        if ratio[v] <= dthr[v]:
            continue
        if v in on_loop:
            helev[v] = on_loop[v]
            continue
        # first crossing of the group contour at or beyond v
        tt, ss, ok = _ray_hits(c, dv, sa, sb)
        ok &= tt >= 1.0 - 1e-12
        if np.any(ok):
            k = np.nonzero(ok)[0][np.argmin(tt[ok])]
            tq, eq = tt[k], (1 - ss[k]) * ea[k] + ss[k] * eb[k]
        else:
            tq, eq = 1.0, float(np.mean(ea))
        rq = tq * ratio[v]  # radial ratio of the contour point
        frac = (ratio[v] - dthr[v]) / (rq - dthr[v])
        # ratio > threshold makes frac > 0, so the elevation is strictly positive
        helev[v] = eq * min(frac, 1.0)
    # texture: per fine cell bump, zero on fine-cell borders
    # a vertex shared by several fine cells takes the first cell that gives it
    # a nonzero bump; on shared borders every cell gives zero anyway
    htex = np.zeros(n)
    for j in cell.fine_cells:
        vs = np.unique(cell.triangles[cell.triangle_cell == j])
        vs = vs[htex[vs] == 0.0]
        if len(vs):
            htex[vs] = texture_heights(V[vs], fine.cell_polygon(j), fine.reference_point(j), tex_t[j])
    cell.ratio, cell.threshold, cell.h_elev, cell.h_tex = ratio, dthr, helev, htex


def build_cell_mesh(cell: DelamCell, h: float, thickness: float) -> SurfaceMesh:
    """Lower layer at h + H_elev, upper layer at h + H_elev + H_tex + l, and
    vertical walls along every boundary loop."""
    if not thickness > 0:
        raise InvalidParams("layer_thickness", "must be > 0")
    V = cell.vertices
    n = len(V)
    low = np.column_stack([V, h + cell.h_elev])
    up = np.column_stack([V, h + cell.h_elev + cell.h_tex + thickness])
    T = cell.triangles
    tris = [T[:, ::-1], T + n]
    tags = ["delam_lower"] * len(T) + ["delam_upper"] * len(T)
    walls = []
    for lp in cell.loops:
        for k in range(len(lp)):
            a, b = int(lp[k]), int(lp[(k + 1) % len(lp)])
            walls.append((a, b, b + n))
            walls.append((a, b + n, a + n))
    tris.append(np.asarray(walls, dtype=np.int64).reshape(-1, 3))
    tags += ["delam_wall"] * len(walls)
    return orient_outward(SurfaceMesh(np.vstack([low, up]), np.vstack(tris), tags))


@dataclass
class DelamInstance:
    seed: int
    attempt: int
    cells: list
    coarse: Tessellation
    fine: Tessellation
    params: dict
    selected: list

    @property
    def mesh(self) -> SurfaceMesh:
        return concatenate([c.mesh for c in self.cells if c.coarse_index in self.selected])

    @property
    def cell_meshes(self) -> list:
        return [c.mesh for c in self.cells if c.coarse_index in self.selected]

    @property
    def reports(self) -> list:
        return [c.report for c in self.cells if c.coarse_index in self.selected]


def generate_delamination(seed: int, p: DelamParams) -> DelamInstance:
    p.validate()
    root = RandomStream(seed)
    last = None
    for a in range(p.max_attempts):
        st = root.child("attempt", a)
        try:
            if p.n_coarse == 1:
                coarse = _single_cell(p.window)
            else:
                coarse = build_voronoi(st.child("coarse"), p.window, p.gamma_value, p.n_coarse)
            fine = build_voronoi(st.child("fine"), p.window, p.gamma_value, p.n_fine)
            cells = build_cells(st.child("cells"), p, coarse, fine)
            ok = True
            for cell in cells:
                cell.mesh = build_cell_mesh(cell, p.surface_height, p.layer_thickness)
                cell.report = validate(cell.mesh)
                ok &= cell.report.ok
        except DefectForgeError as e:
            last = f"{type(e).__name__}: {e}"
            continue
        if not ok:
            last = "validation failed"
            continue
        idx = [c.coarse_index for c in cells]
        if p.selection == "all":
            sel = idx
        else:
            k = min(int(p.selection), len(idx))
            pick = st.child("selection").choice(len(idx), size=k, replace=False)
            sel = sorted(idx[i] for i in pick)
        return DelamInstance(seed, a, cells, coarse, fine, p.to_dict(), sel)
    raise GenerationFailed(f"delamination seed {seed}: no valid instance in {p.max_attempts} attempts ({last})")


def _single_cell(window: Window) -> Tessellation:
    """Coarse tessellation with one generator: the whole window is one cell."""
    from .tessellation import voronoi_from_generators

    ctr = np.array([[(window.w0min + window.w0max) / 2, (window.w1min + window.w1max) / 2]])
    # a far-away twin keeps the Voronoi construction well-posed without splitting the window
    far = ctr + np.array([[0.0, 1e3 * max(window.width, window.height)]])
    return voronoi_from_generators(np.vstack([ctr, far]), window)
