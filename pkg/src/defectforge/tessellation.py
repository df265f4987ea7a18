"""Voronoi tessellations restricted to a rectangular window.

Generators are sampled in a dilated window so that cells touching the window
border look like cells of an unbounded tessellation. Cells are clipped to the
window; intersection points with the border become first-class vertices.

Every clipped vertex carries a symbolic key:

    ("v", k)             Voronoi vertex k
    ("x", a, b, side)    Voronoi edge (a, b), a < b, crossing border ``side``
    ("c", s1, s2)        window corner, s1 < s2

Coordinates are computed from the key alone, so neighbouring cells that
share a vertex get the same floats and the same global index.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import Voronoi

from .errors import InvalidRegion, NoBoundaryVertex, TooFewGenerators
from .geometry import polygon_area
from .rng import RandomStream, uniform_points

LEFT, RIGHT, BOTTOM, TOP = 0, 1, 2, 3


@dataclass(frozen=True)
class Window:
    w0min: float
    w0max: float
    w1min: float
    w1max: float

    def __post_init__(self):
        if not (self.w0max > self.w0min and self.w1max > self.w1min):
            raise InvalidRegion(f"empty window {self.bounds}")

    @property
    def bounds(self):
        return (self.w0min, self.w0max, self.w1min, self.w1max)

    @property
    def width(self) -> float:
        return self.w0max - self.w0min

    @property
    def height(self) -> float:
        return self.w1max - self.w1min

    @property
    def area(self) -> float:
        return self.width * self.height

    def dilated(self, gamma: float) -> "Window":
        if gamma < 0:
            raise InvalidRegion("gamma must be >= 0")
        return Window(self.w0min - gamma, self.w0max + gamma, self.w1min - gamma, self.w1max + gamma)

    def contains(self, pts) -> np.ndarray:
        p = np.atleast_2d(pts)
        return (
            (p[:, 0] >= self.w0min) & (p[:, 0] <= self.w0max) & (p[:, 1] >= self.w1min) & (p[:, 1] <= self.w1max)
        )

    def corners(self) -> np.ndarray:
        return np.array(
            [[self.w0min, self.w1min], [self.w0max, self.w1min], [self.w0max, self.w1max], [self.w0min, self.w1max]]
        )

    def to_list(self):
        return [self.w0min, self.w0max, self.w1min, self.w1max]


@dataclass
class Tessellation:
    """Voronoi cells clipped to ``window``.

    cells[i] lists global vertex indices of the clipped cell of generator i
    in counter-clockwise order (empty when the cell misses the window).
    ``edges`` are Voronoi edges inside the window; border segments are in
    ``border_edges``.
    """

    window: Window
    generators: np.ndarray
    vertices: np.ndarray
    cells: list
    edges: np.ndarray
    border_edges: np.ndarray
    vertex_keys: list = field(repr=False)

    @property
    def nonempty(self) -> list:
        return [i for i, c in enumerate(self.cells) if len(c) >= 3]

    @property
    def m(self) -> int:
        return len(self.nonempty)

    def cell_polygon(self, i: int) -> np.ndarray:
        return self.vertices[self.cells[i]]

    def cell_area(self, i: int) -> float:
        c = self.cells[i]
        return polygon_area(self.vertices[c]) if len(c) >= 3 else 0.0

    def reference_point(self, i: int) -> np.ndarray:
        """Vertex centroid of the clipped cell, window corners included."""
        return self.vertices[self.cells[i]].mean(axis=0)

    @property
    def reference_points(self) -> np.ndarray:
        out = np.full((len(self.cells), 2), np.nan)
        for i in self.nonempty:
            out[i] = self.reference_point(i)
        return out

    def adjusted_reference_point(self, i: int) -> np.ndarray:
        """The generator when it lies in the window, else the vertex centroid."""
        g = self.generators[i]
        if self.window.contains(g)[0]:
            return g.copy()
        return self.reference_point(i)


def _line_value(side: int, bounds) -> float:
    return bounds[side]


def _signed(side: int, pt, bounds) -> float:
    x0, x1, y0, y1 = bounds
    if side == LEFT:
        return pt[0] - x0
    if side == RIGHT:
        return x1 - pt[0]
    if side == BOTTOM:
        return pt[1] - y0
    return y1 - pt[1]


def _edge_cross(pa, pb, side: int, bounds):
    c = bounds[side]
    if side in (LEFT, RIGHT):
        t = (c - pa[0]) / (pb[0] - pa[0])
        return (c, pa[1] + t * (pb[1] - pa[1]))
    t = (c - pa[1]) / (pb[1] - pa[1])
    return (pa[0] + t * (pb[0] - pa[0]), c)


def _corner(s1: int, s2: int, bounds):
    x = bounds[s1] if s1 in (LEFT, RIGHT) else bounds[s2]
    y = bounds[s2] if s2 in (BOTTOM, TOP) else bounds[s1]
    return (x, y)


def _clip_cell(region, vv, bounds):
    """Symbolic Sutherland-Hodgman clip of one Voronoi region to the window.

    Vertices are (key, xy); each polygon edge carries a support, either
    ("e", a, b) for a Voronoi edge or ("b", side) for the window border.
    """
    n = len(region)
    verts = [(("v", k), (vv[k, 0], vv[k, 1])) for k in region]
    sup = []
    for i in range(n):
        a, b = region[i], region[(i + 1) % n]
        sup.append(("e", min(a, b), max(a, b)))

    def intersect(s, side, pxy, qxy):
        if s[0] == "e":
            a, b = s[1], s[2]
            return ("x", a, b, side), _edge_cross(vv[a], vv[b], side, bounds)
        s1, s2 = sorted((s[1], side))
        return ("c", s1, s2), _corner(s1, s2, bounds)

    pts = vv[region]
    x0, x1, y0, y1 = bounds
    # clipping only shrinks the polygon, so sides it already respects stay respected
    needed = {
        LEFT: pts[:, 0].min() < x0,
        RIGHT: pts[:, 0].max() > x1,
        BOTTOM: pts[:, 1].min() < y0,
        TOP: pts[:, 1].max() > y1,
    }
    for side in (LEFT, RIGHT, BOTTOM, TOP):
        if not verts:
            break
        if not needed[side]:
            continue
        out_v, out_s = [], []
        m = len(verts)
        for i in range(m):
            p, q = verts[i], verts[(i + 1) % m]
            s = sup[i]
            sp = _signed(side, p[1], bounds)
            sq = _signed(side, q[1], bounds)
            if sp >= 0:
                out_v.append(p)
                out_s.append(s)
                if sp > 0 and sq < 0:
                    out_v.append(intersect(s, side, p[1], q[1]))
                    out_s.append(("b", side))
                elif sp == 0 and sq < 0:
                    out_s[-1] = ("b", side)
            elif sq > 0:
                out_v.append(intersect(s, side, p[1], q[1]))
                out_s.append(s)
        verts, sup = out_v, out_s
    if len(verts) < 3:
        return [], []
    return verts, sup


def voronoi_from_generators(generators, window: Window) -> Tessellation:
    """Clip the Voronoi diagram of ``generators`` to ``window``."""
    g = np.asarray(generators, dtype=float)
    n = len(g)
    if n < 2:
        raise TooFewGenerators(f"need at least 2 generators, got {n}")
    bounds = window.bounds
    lo = np.minimum(g.min(axis=0), [window.w0min, window.w1min])
    hi = np.maximum(g.max(axis=0), [window.w0max, window.w1max])
    center = 0.5 * (lo + hi)
    span = float(np.max(hi - lo))
    # far ghosts bound every real cell without changing it inside the window
    r = 100.0 * span
    ghosts = center + r * np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
    vor = Voronoi(np.vstack([g, ghosts]))
    vv = vor.vertices

    key_index: dict = {}
    coords: list = []
    cells = []
    edge_set = set()
    border_set = set()

    def gid(key, xy):
        k = key_index.get(key)
        if k is None:
            k = len(coords)
            key_index[key] = k
            coords.append(xy)
        return k

    x0, x1, y0, y1 = bounds
    for i in range(n):
        region = vor.regions[vor.point_region[i]]
        if -1 in region or len(region) < 3:
            raise RuntimeError("unbounded cell despite ghost generators")
        pts = vv[region]
        # order counter-clockwise around the generator
        ang = np.arctan2(pts[:, 1] - g[i, 1], pts[:, 0] - g[i, 0])
        region = [region[k] for k in np.argsort(ang, kind="stable")]
        pts = vv[region]
        if pts[:, 0].max() < x0 or pts[:, 0].min() > x1 or pts[:, 1].max() < y0 or pts[:, 1].min() > y1:
            cells.append([])
            continue
        verts, sup = _clip_cell(region, vv, bounds)
        if not verts:
            cells.append([])
            continue
        ids = [gid(k, xy) for k, xy in verts]
        # drop repeated consecutive ids (vertex exactly on a border)
        clean_ids, clean_sup = [], []
        for j, v in enumerate(ids):
            if clean_ids and clean_ids[-1] == v:
                clean_sup[-1] = sup[j]
                continue
            clean_ids.append(v)
            clean_sup.append(sup[j])
        if len(clean_ids) > 1 and clean_ids[0] == clean_ids[-1]:
            clean_ids.pop()
            clean_sup.pop()
        if len(clean_ids) < 3:
            cells.append([])
            continue
        cells.append(clean_ids)
        m = len(clean_ids)
        for j in range(m):
            a, b = clean_ids[j], clean_ids[(j + 1) % m]
            e = (min(a, b), max(a, b))
            if clean_sup[j][0] == "e":
                edge_set.add(e)
            else:
                border_set.add(e)
    vertices = np.asarray(coords, dtype=float).reshape(-1, 2)
    edges = np.asarray(sorted(edge_set), dtype=int).reshape(-1, 2)
    border_edges = np.asarray(sorted(border_set), dtype=int).reshape(-1, 2)
    keys = [None] * len(coords)
    for k, v in key_index.items():
        keys[v] = k
    return Tessellation(window, g, vertices, cells, edges, border_edges, keys)


def sample_generators(stream: RandomStream, window: Window, gamma: float, n: int) -> np.ndarray:
    """n uniform generators in the gamma-dilated window, resampling near-duplicates."""
    if n < 2:
        raise TooFewGenerators(f"need at least 2 generators, got {n}")
    region = window.dilated(gamma)
    pts = uniform_points(stream, region, n)
    tol = 1e-12 * window.width
    from scipy.spatial import cKDTree

    for _ in range(100):
        pairs = cKDTree(pts).query_pairs(tol, output_type="ndarray")
        if len(pairs) == 0:
            return pts
        redo = np.unique(pairs[:, 1])
        pts[redo] = uniform_points(stream, region, len(redo))
    raise RuntimeError("could not separate coincident generators")


def build_voronoi(stream: RandomStream, window: Window, gamma: float, n: int) -> Tessellation:
    return voronoi_from_generators(sample_generators(stream, window, gamma, n), window)


def boundary_vertices(t: Tessellation, side: str) -> np.ndarray:
    """Indices of vertices where Voronoi edges meet the left or right window border."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    code = LEFT if side == "left" else RIGHT
    out = [i for i, k in enumerate(t.vertex_keys) if k[0] == "x" and k[3] == code]
    if not out:
        raise NoBoundaryVertex(f"no tessellation edge meets the {side} border")
    out.sort(key=lambda i: (t.vertices[i, 1], i))
    return np.asarray(out, dtype=int)
