"""Spine paths: minimal paths on a tessellation graph, or discretised splines."""
from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .geometry import cross2
from .errors import Disconnected, InvalidDiscretization, InvalidPath
from .rng import RandomStream
from .tessellation import Tessellation, Window, boundary_vertices


@dataclass
class Path:
    """Polyline v_0 .. v_{k+1}; arc i runs from v_i to v_{i+1}.

    ``ids`` holds graph vertex indices when the path came from a tessellation.
    """

    vertices: np.ndarray
    ids: np.ndarray | None = None

    @property
    def k(self) -> int:
        return len(self.vertices) - 2

    @property
    def arcs(self) -> np.ndarray:
        return np.diff(self.vertices, axis=0)

    @property
    def arc_lengths(self) -> np.ndarray:
        a = self.arcs
        return np.hypot(a[:, 0], a[:, 1])

    @property
    def length(self) -> float:
        return float(np.sum(self.arc_lengths))

    def arc_midpoint_params(self) -> np.ndarray:
        """Normalised arc-length position of each arc midpoint, in (0, 1)."""
        ln = self.arc_lengths
        c = np.concatenate([[0.0], np.cumsum(ln)])
        return (c[:-1] + 0.5 * ln) / c[-1]

    def vertex_params(self) -> np.ndarray:
        ln = self.arc_lengths
        c = np.concatenate([[0.0], np.cumsum(ln)])
        return c / c[-1]


class PathGraph:
    """Undirected Voronoi-edge graph; each edge gives two opposite weighted arcs."""

    def __init__(self, vertices, edges):
        self.vertices = np.asarray(vertices, dtype=float)
        self.adj: list[list[tuple[int, float]]] = [[] for _ in range(len(self.vertices))]
        for a, b in np.asarray(edges, dtype=int).reshape(-1, 2):
            if a == b:
                continue
            w = float(np.hypot(*(self.vertices[b] - self.vertices[a])))
            self.adj[a].append((int(b), w))
            self.adj[b].append((int(a), w))
        for lst in self.adj:
            lst.sort()

    @classmethod
    def from_tessellation(cls, t: Tessellation) -> "PathGraph":
        return cls(t.vertices, t.edges)

    def weight(self, ids) -> float:
        total = 0.0
        for a, b in zip(ids[:-1], ids[1:]):
            total += dict(self.adj[a])[b]
        return total


def shortest_path(g: PathGraph, start: int, end: int) -> Path:
    """Dijkstra; ties are broken lexicographically on (distance, vertex index)."""
    if start == end:
        raise InvalidPath("start and end coincide")
    n = len(g.vertices)
    dist = [float("inf")] * n
    prev = [-1] * n
    dist[start] = 0.0
    heap = [(0.0, start)]
    done = [False] * n
    while heap:
        d, u = heapq.heappop(heap)
        if done[u]:
            continue
        done[u] = True
        if u == end:
            break
        for v, w in g.adj[u]:
            nd = d + w
            if nd < dist[v]:
                dist[v] = nd
                prev[v] = u
                heapq.heappush(heap, (nd, v))
    if not done[end]:
        raise Disconnected(f"vertex {end} unreachable from {start}")
    ids = [end]
    while ids[-1] != start:
        ids.append(prev[ids[-1]])
    ids.reverse()
    ids = np.asarray(ids, dtype=int)
    return Path(g.vertices[ids].copy(), ids)


def pick_endpoints(stream: RandomStream, t: Tessellation) -> tuple[int, int]:
    """Uniform choice among left-border and right-border vertices."""
    left = boundary_vertices(t, "left")
    right = boundary_vertices(t, "right")
    i = int(left[stream.integers(0, len(left))])
    j = int(right[stream.integers(0, len(right))])
    return i, j


def filter_short_arcs(path: Path, fraction: float = 0.01) -> Path:
    """Merge arcs shorter than ``fraction`` times the mean arc length.

    The interior endpoint of a short arc is removed, so the path endpoints
    always survive.
    """
    v = [np.asarray(p) for p in path.vertices]
    ids = list(path.ids) if path.ids is not None else None
    if len(v) <= 2 or fraction <= 0:
        return path
    thr = fraction * float(np.mean(path.arc_lengths))
    changed = True
    while changed and len(v) > 2:
        changed = False
        for i in range(len(v) - 1):
            if np.hypot(*(v[i + 1] - v[i])) < thr:
                drop = i + 1 if i + 1 < len(v) - 1 else i
                if drop == 0:
                    continue
                del v[drop]
                if ids is not None:
                    del ids[drop]
                changed = True
                break
    return Path(np.asarray(v), None if ids is None else np.asarray(ids, dtype=int))


def minimal_path(stream: RandomStream, t: Tessellation, filter_fraction: float = 0.01) -> Path:
    g = PathGraph.from_tessellation(t)
    s, e = pick_endpoints(stream, t)
    return filter_short_arcs(shortest_path(g, s, e), filter_fraction)


# ---------------------------------------------------------------- splines


def natural_cubic_second_derivatives(x, y) -> np.ndarray:
    """Second derivatives of the natural cubic interpolant (Thomas algorithm)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    n = len(x)
    m = np.zeros(n)
    if n < 3:
        return m
    h = np.diff(x)
    # interior equations i = 1..n-2
    a = h[:-1].copy()
    b = 2.0 * (h[:-1] + h[1:])
    c = h[1:].copy()
    d = 6.0 * ((y[2:] - y[1:-1]) / h[1:] - (y[1:-1] - y[:-2]) / h[:-1])
    k = n - 2
    for i in range(1, k):
        w = a[i] / b[i - 1]
        b[i] -= w * c[i - 1]
        d[i] -= w * d[i - 1]
    sol = np.zeros(k)
    sol[-1] = d[-1] / b[-1]
    for i in range(k - 2, -1, -1):
        sol[i] = (d[i] - c[i] * sol[i + 1]) / b[i]
    m[1:-1] = sol
    return m


def natural_cubic_eval(x, y, m, xs) -> np.ndarray:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xs = np.asarray(xs, dtype=float)
    j = np.clip(np.searchsorted(x, xs, side="right") - 1, 0, len(x) - 2)
    h = x[j + 1] - x[j]
    A = (x[j + 1] - xs) / h
    B = (xs - x[j]) / h
    return A * y[j] + B * y[j + 1] + ((A**3 - A) * m[j] + (B**3 - B) * m[j + 1]) * h * h / 6.0


@dataclass(frozen=True)
class SplineSpec:
    control_count: int  # n + 1
    discretization_count: int  # k + 2


def spline_control_points(stream: RandomStream, window: Window, control_count: int) -> np.ndarray:
    """Random control points sorted by x, first on the left border, last on the right."""
    n1 = control_count
    x0, x1, y0, y1 = window.bounds
    for _ in range(1000):
        xs = np.concatenate([[x0], np.sort(stream.uniform(x0, x1, n1 - 2)), [x1]])
        if np.all(np.diff(xs) > 0):
            break
    else:
        raise InvalidDiscretization("could not draw distinct control abscissae")
    ys = stream.uniform(y0, y1, n1)
    return np.column_stack([xs, ys])


def spline_path(stream: RandomStream, window: Window, spec: SplineSpec) -> Path:
    """x-monotone natural cubic spline path sampled at k+2 uniform abscissae."""
    n1, k2 = spec.control_count, spec.discretization_count
    if n1 < 2:
        raise InvalidDiscretization("need at least two control points")
    if k2 < 5 * n1:
        raise InvalidDiscretization(f"discretization_count {k2} < 5 * control_count {5 * n1}")
    cp = spline_control_points(stream, window, n1)
    m = natural_cubic_second_derivatives(cp[:, 0], cp[:, 1])
    xs = np.linspace(window.w0min, window.w0max, k2)
    ys = natural_cubic_eval(cp[:, 0], cp[:, 1], m, xs)
    ys[0], ys[-1] = cp[0, 1], cp[-1, 1]
    return Path(np.column_stack([xs, ys]))


def max_turning_angle(path: Path) -> float:
    a = path.arcs
    if len(a) < 2:
        return 0.0
    ang = np.arctan2(cross2(a[:-1], a[1:]), np.einsum("ij,ij->i", a[:-1], a[1:]))
    return float(np.max(np.abs(ang)))
