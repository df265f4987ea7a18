"""Elongated surface defects: cracks (optionally branched), bulges, buckles,
coat lifts and cold shuts.

Every generator works in attempts. Attempt ``a`` draws everything from the
child stream (seed, "attempt", a); when the resulting solid fails validation
the next attempt starts from fresh sub-streams. The attempt number that
succeeded is recorded on the instance, so a run is reproducible from
(seed, params) alone.
"""
from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field, fields, replace

import numpy as np

from .boolean import boolean
from .dilation import DilatedPath, dilate
from .errors import DefectForgeError, GenerationFailed, InvalidParams
from .mesh import SurfaceMesh, ValidationReport, orient_outward, validate
from .pathing import (
    Path,
    PathGraph,
    SplineSpec,
    filter_short_arcs,
    max_turning_angle,
    minimal_path,
    shortest_path,
    spline_path,
)
from .rng import RandomStream
from .strip import assemble_trench, sweep_band
from .tessellation import Tessellation, Window, build_voronoi

log = logging.getLogger(__name__)

ELONGATED_TYPES = ("crack", "bulge", "buckle_closed", "buckle_open", "coat_lift", "cold_shut")
NEGATIVE_TYPES = ("crack", "cold_shut")


@dataclass
class ElongatedDefectParams:
    """Parameters of an elongated defect. Lengths are in model units; depths
    and heights are offsets from the surface height."""

    defect_type: str = "crack"
    window: Window = field(default_factory=lambda: Window(0.0, 1.0, 0.0, 1.0))
    gamma: float | None = None  # generator margin, default 0.1 * window width
    n_generators: int = 1000
    spline: SplineSpec | None = None  # cold shuts only
    width_range: tuple = (0.004, 0.010)
    depth_or_height_range: tuple = (0.03, 0.08)
    surface_height: float = 1.0
    width_exponent: float = 1.0
    height_exponent: float = 1.0
    end_ratio: float = 0.1  # profile value at the spine ends, relative to the middle
    short_arc_fraction: float = 0.01
    branches: int = 0
    branch_min_length: float = 0.25  # relative to window width
    inner_width_ratio: float = 0.5  # open buckles
    groove_depth_ratio: float = 0.6  # open buckles: groove depth relative to the ridge
    layer_thickness: float = 0.01  # coat lifts: shift of the lower contour
    max_turn_deg: float = 60.0  # cold shuts
    max_attempts: int = 25

    @property
    def gamma_value(self) -> float:
        return 0.1 * self.window.width if self.gamma is None else float(self.gamma)

    def validate(self) -> "ElongatedDefectParams":
        if self.defect_type not in ELONGATED_TYPES:
            raise InvalidParams("defect_type", f"unknown elongated defect type {self.defect_type!r}")
        lo, hi = map(float, self.depth_or_height_range)
        if not (0 <= lo <= hi) or hi <= 0:
            raise InvalidParams("depth_or_height_range", f"need 0 <= min <= max and max > 0, got {[lo, hi]}")
        if self.defect_type in NEGATIVE_TYPES and hi >= self.surface_height:
            raise InvalidParams("depth_or_height_range", "depth must stay below the surface height")
        wl, wh = map(float, self.width_range)
        if not (0 < wl <= wh):
            raise InvalidParams("width_range", f"need 0 < min <= max, got {[wl, wh]}")
        if self.gamma is not None and self.gamma < 0:
            raise InvalidParams("gamma", "must be >= 0")
        if self.n_generators < 2:
            raise InvalidParams("n_generators", "need at least 2 generators")
        if not (0 <= self.end_ratio <= 1):
            raise InvalidParams("end_ratio", "must lie in [0, 1]")
        if self.defect_type == "buckle_open":
            if not (0 < self.inner_width_ratio < 1):
                raise InvalidParams("inner_width_ratio", "must lie in (0, 1) for open buckles")
            if not (0 < self.groove_depth_ratio < 1):
                raise InvalidParams("groove_depth_ratio", "must lie in (0, 1)")
        if self.defect_type == "coat_lift" and self.layer_thickness <= 0:
            raise InvalidParams("layer_thickness", "must be > 0")
        if self.defect_type == "cold_shut":
            if self.spline is None:
                raise InvalidParams("spline", "cold shuts need control_count and discretization_count")
            if self.spline.control_count < 2:
                raise InvalidParams("control_count", "need at least 2 control points")
            if self.spline.discretization_count < 5 * self.spline.control_count:
                raise InvalidParams("discretization_count", "must be at least 5 * control_count")
        if self.branches < 0:
            raise InvalidParams("branches", "must be >= 0")
        if self.max_attempts < 1:
            raise InvalidParams("max_attempts", "must be >= 1")
        return self

    def to_dict(self) -> dict:
        d = asdict(self)
        d["window"] = self.window.to_list()
        d["width_range"] = list(self.width_range)
        d["depth_or_height_range"] = list(self.depth_or_height_range)
        d["spline"] = None if self.spline is None else [self.spline.control_count, self.spline.discretization_count]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ElongatedDefectParams":
        known = {f.name for f in fields(cls)}
        extra = set(d) - known
        if extra:
            raise InvalidParams(sorted(extra)[0], "unknown parameter")
        d = dict(d)
        if "window" in d and not isinstance(d["window"], Window):
            d["window"] = Window(*map(float, d["window"]))
        if d.get("spline") is not None and not isinstance(d["spline"], SplineSpec):
            s = d["spline"]
            if isinstance(s, dict):
                d["spline"] = SplineSpec(int(s["control_count"]), int(s["discretization_count"]))
            else:
                d["spline"] = SplineSpec(int(s[0]), int(s[1]))
        for key in ("width_range", "depth_or_height_range"):
            if key in d:
                v = d[key]
                if len(v) != 2:
                    raise InvalidParams(key, "expects [min, max]")
                d[key] = (float(v[0]), float(v[1]))
        return cls(**d)


def default_params(defect_type: str) -> ElongatedDefectParams:
    """Reasonable defaults per family in a unit window with surface height 1."""
    base = ElongatedDefectParams(defect_type=defect_type)
    if defect_type == "crack":
        return base
    if defect_type in ("bulge", "buckle_closed"):
        return replace(base, n_generators=400, width_range=(0.02, 0.04), depth_or_height_range=(0.01, 0.03))
    if defect_type == "buckle_open":
        return replace(base, n_generators=400, width_range=(0.02, 0.04), depth_or_height_range=(0.015, 0.03))
    if defect_type == "coat_lift":
        return replace(base, n_generators=400, width_range=(0.02, 0.04), depth_or_height_range=(0.005, 0.015), layer_thickness=0.01)
    if defect_type == "cold_shut":
        return replace(
            base,
            window=Window(0.0, 1.0, 0.3, 0.7),
            spline=SplineSpec(5, 50),
            width_range=(0.004, 0.008),
            depth_or_height_range=(0.01, 0.03),
        )
    raise InvalidParams("defect_type", f"unknown elongated defect type {defect_type!r}")


@dataclass
class DefectInstance:
    defect_type: str
    seed: int
    attempt: int
    mesh: SurfaceMesh
    sign: str  # 'negative' (subtract from the object) or 'positive'
    spines: list  # list of (m, 3) arrays: x, y, height
    footprints: list  # list of (m, 2) polygons
    params: dict
    report: ValidationReport
    extras: dict = field(default_factory=dict)
    # in-memory only: tessellation, spine path and heights needed by add_branch
    context: dict = field(default_factory=dict, repr=False)

    @property
    def spine(self) -> np.ndarray:
        return self.spines[0][:, :2]

    @property
    def footprint(self) -> np.ndarray:
        return self.footprints[0]

    @property
    def params_echo(self) -> dict:
        return self.params


# ------------------------------------------------------------ profiles


def moving_average3(u: np.ndarray) -> np.ndarray:
    """Window-3 moving average; the ends average over the available neighbours."""
    u = np.asarray(u, dtype=float)
    if len(u) < 3:
        return u.copy()
    s = np.convolve(u, np.ones(3), mode="same")
    cnt = np.convolve(np.ones(len(u)), np.ones(3), mode="same")
    return s / cnt


def width_profile_values(stream: RandomStream, path: Path, width_range, exponent: float) -> np.ndarray:
    """l_i = sin(pi s_i)^p * u_i at arc midpoints, u_i uniform then smoothed."""
    s = path.arc_midpoint_params()
    u = moving_average3(stream.uniform(width_range[0], width_range[1], len(s)))
    return np.sin(np.pi * s) ** exponent * u


def height_profile_values(stream: RandomStream, params_s, value_range, exponent: float, end_ratio: float) -> np.ndarray:
    """Depth (or elevation) per vertex: envelope tapering to end_ratio at the
    ends, times smoothed uniform draws."""
    s = np.asarray(params_s, dtype=float)
    u = moving_average3(stream.uniform(value_range[0], value_range[1], len(s)))
    env = end_ratio + (1.0 - end_ratio) * np.sin(np.pi * s) ** exponent
    return env * u


# ------------------------------------------------------------ helpers


def _accept(mesh: SurfaceMesh) -> tuple[bool, ValidationReport]:
    rep = validate(mesh)
    return rep.ok, rep


def _spine_path(stream: RandomStream, p: ElongatedDefectParams, tess_out: list | None = None) -> Path:
    if p.defect_type == "cold_shut":
        return spline_path(stream.child("spline"), p.window, p.spline)
    t = build_voronoi(stream.child("tessellation"), p.window, p.gamma_value, p.n_generators)
    if tess_out is not None:
        tess_out.append(t)
    return minimal_path(stream.child("endpoints"), t, p.short_arc_fraction)


def _trench(stream, p: ElongatedDefectParams, path: Path, sign: int, xmin, xmax, surface=None):
    l = width_profile_values(stream.child("widths"), path, p.width_range, p.width_exponent)
    d = height_profile_values(stream.child("heights"), path.vertex_params(), p.depth_or_height_range, p.height_exponent, p.end_ratio)
    h = p.surface_height if surface is None else surface
    dp = dilate(path, l, xmin, xmax)
    z = h - d if sign < 0 else h + d
    tm = assemble_trench(dp, z, h)
    return dp, z, tm, l


def _run_attempts(p: ElongatedDefectParams, seed: int, body):
    root = RandomStream(seed)
    last = None
    for a in range(p.max_attempts):
        st = root.child("attempt", a)
        try:
            out = body(st)
        except DefectForgeError as e:
            last = f"{type(e).__name__}: {e}"
            log.debug("attempt %d failed: %s", a, last)
            continue
        if out is not None:
            return a, out
        last = "validation failed"
    raise GenerationFailed(f"{p.defect_type} seed {seed}: no valid instance in {p.max_attempts} attempts ({last})")


# ------------------------------------------------------------ families


def generate_crack(stream_seed: int, p: ElongatedDefectParams) -> DefectInstance:
    """Crack (or cold shut when ``p.defect_type == 'cold_shut'``), with
    ``p.branches`` side branches for cracks."""
    p.validate()
    W = p.window

    def body(st):
        tess: list = []
        path = _spine_path(st, p, tess)
        if p.defect_type == "cold_shut" and max_turning_angle(path) > np.radians(p.max_turn_deg):
            return None
        dp, z, tm, l = _trench(st, p, path, -1, W.w0min, W.w0max)
        ok, rep = _accept(tm.mesh)
        if not ok:
            return None
        extras = {"path_k": path.k, "mean_arc_length": float(np.mean(path.arc_lengths)), "planar_ok": tm.planar_ok}
        if p.defect_type == "cold_shut":
            extras["max_turn_deg"] = float(np.degrees(max_turning_angle(path)))
            # the spline is not clamped to the window; record how far it leaves it
            ys = path.vertices[:, 1]
            extras["spine_excursion"] = [float(max(0.0, W.w1min - ys.min())), float(max(0.0, ys.max() - W.w1max))]
        inst = DefectInstance(
            p.defect_type,
            stream_seed,
            0,
            tm.mesh,
            "negative",
            [np.column_stack([path.vertices, z])],
            [tm.footprint],
            p.to_dict(),
            rep,
            extras,
            {"tessellation": tess[0] if tess else None, "paths": [path], "heights": [z]},
        )
        for b in range(p.branches if p.defect_type == "crack" else 0):
            inst = add_branch(st.child("branch", b), inst, p)
        return inst

    a, inst = _run_attempts(p, stream_seed, body)
    inst.attempt = a
    inst.extras["branches"] = len(inst.spines) - 1
    return inst


def _rotation_to_x(d: np.ndarray) -> np.ndarray:
    c, s = d / np.hypot(*d)
    return np.array([[c, s], [-s, c]])  # maps d to +x


def add_branch(stream: RandomStream, crack: DefectInstance, p: ElongatedDefectParams, start: int | None = None, max_tries: int = 60) -> DefectInstance:
    """Side crack from a vertex of an existing spine (main path or earlier
    branches) to a tessellation vertex off the spines, merged by union.

    ``start`` fixes the root vertex (a tessellation vertex id on a spine);
    otherwise one is drawn. Raises GenerationFailed when no admissible branch
    is found in ``max_tries`` draws.
    """
    t: Tessellation = crack.context.get("tessellation")
    if t is None:
        raise InvalidParams("branches", "branching needs the crack's tessellation")
    g = PathGraph.from_tessellation(t)
    h = p.surface_height
    depth_at: dict = {}
    for path, z in zip(crack.context["paths"], crack.context["heights"]):
        for i, zz in zip(path.ids, z):
            depth_at[int(i)] = h - float(zz)
    on_spine = set(depth_at)
    if start is not None:
        if int(start) not in on_spine:
            raise InvalidParams("start", "branch start must be a spine vertex")
        roots = [int(start)]
    else:
        # interior spine vertices; earlier branches contribute all but their root
        main = crack.context["paths"][0]
        roots = [int(i) for i in main.ids[1:-1]]
        for path in crack.context["paths"][1:]:
            roots += [int(i) for i in path.ids[1:]]
    minlen = p.branch_min_length * p.window.width
    nv = len(t.vertices)
    for tries in range(max_tries):
        root = roots[int(stream.integers(0, len(roots)))]
        end = int(stream.integers(0, nv))
        # genuine Voronoi vertices only, away from the spines
        if end in on_spine or t.vertex_keys[end][0] != "v":
            continue
        if np.hypot(*(t.vertices[end] - t.vertices[root])) < minlen:
            continue
        try:
            bp = shortest_path(g, root, end)
        except DefectForgeError:
            continue
        ids = list(bp.ids)
        # begin where the branch leaves the existing spines
        last_shared = max(k for k, v in enumerate(ids) if v in on_spine)
        ids = ids[last_shared:]
        if len(ids) < 3:
            continue
        P = t.vertices[ids]
        chord = P[-1] - P[0]
        L = float(np.hypot(*chord))
        if L < minlen:
            continue
        # local frame: chord along +x, the branch must stay inside [0, L]
        Rm = _rotation_to_x(chord)
        Q = (P - P[0]) @ Rm.T
        Q[0] = [0.0, 0.0]
        Q[-1] = [L, 0.0]
        if np.any(Q[1:-1, 0] <= 0) or np.any(Q[1:-1, 0] >= L):
            continue
        path = filter_short_arcs(Path(Q, np.asarray(ids)), p.short_arc_fraction)
        s_v = path.vertex_params()
        dj = depth_at[ids[0]]
        u = moving_average3(stream.uniform(p.depth_or_height_range[0], p.depth_or_height_range[1], len(s_v)))
        env = p.end_ratio + (1 - p.end_ratio) * np.sin(np.pi * s_v) ** p.height_exponent
        # inherit the junction depth, then hand over to the branch's own envelope
        depth = (1 - s_v) * dj + s_v * env * u
        depth = np.clip(depth, 1e-3 * h, h * (1 - 1e-3))
        depth[0] = dj
        z = h - depth
        l = width_profile_values(stream.child("widths", tries), path, p.width_range, p.width_exponent)
        try:
            dp = dilate(path, l, 0.0, L)
            tm = assemble_trench(dp, z, h, tag_prefix="branch_")
        except DefectForgeError:
            continue
        if not _accept(tm.mesh)[0]:
            continue
        Rinv = Rm.T
        V = tm.mesh.vertices.copy()
        V[:, :2] = V[:, :2] @ Rinv.T + P[0]
        bmesh = SurfaceMesh(V, tm.mesh.triangles, tm.mesh.tags)
        try:
            merged = boolean(crack.mesh, bmesh, "union")
        except DefectForgeError:
            continue
        ok, rep = _accept(merged)
        if not ok:
            continue
        spine_xy = path.vertices @ Rinv.T + P[0]
        spine_xy[0] = t.vertices[ids[0]]
        wpath = Path(spine_xy, path.ids)
        ctx = dict(crack.context)
        ctx["paths"] = crack.context["paths"] + [wpath]
        ctx["heights"] = crack.context["heights"] + [z]
        return replace(
            crack,
            mesh=merged,
            report=rep,
            spines=crack.spines + [np.column_stack([spine_xy, z])],
            footprints=crack.footprints + [tm.footprint @ Rinv.T + P[0]],
            extras=dict(crack.extras),
            context=ctx,
        )
    raise GenerationFailed(f"no admissible branch in {max_tries} tries")


def generate_bulge(seed: int, p: ElongatedDefectParams) -> DefectInstance:
    """Bulge, identical to a closed buckle: a ridge above the surface."""
    p.validate()
    W = p.window

    def body(st):
        path = _spine_path(st, p)
        dp, z, tm, l = _trench(st, p, path, +1, W.w0min, W.w0max)
        ok, rep = _accept(tm.mesh)
        if not ok:
            return None
        return tm, rep, path, z, l, dp

    a, (tm, rep, path, z, l, dp) = _run_attempts(p, seed, body)
    extras = {"path_k": path.k, "end_width_ratio": _end_width_ratio(dp), "planar_ok": tm.planar_ok}
    return DefectInstance(
        p.defect_type, seed, a, tm.mesh, "positive", [np.column_stack([path.vertices, z])], [tm.footprint], p.to_dict(), rep, extras
    )


def _end_width_ratio(dp: DilatedPath) -> float:
    """Footprint width at the spine ends relative to the widest arc."""
    up, lo = dp.upper.points, dp.lower.points
    w0 = up[0, 1] - lo[0, 1]
    w1 = up[-1, 1] - lo[-1, 1]
    wmax = 2.0 * float(np.max(dp.widths.half_widths))
    return float(max(w0, w1) / wmax)


def _groove(path: Path, half_widths, zn, rim: float, W: Window, overshoot: float = 0.01, twist: float = 1e-3) -> SurfaceMesh:
    """Cutter for the open buckle. The spine is extended past both window
    borders so its end faces lie outside the ridge, and the solid is turned by
    a tiny angle about the window centre: the ridge and the cutter would
    otherwise share vertical faces on the same normal planes, which leaves
    zero-thickness folds in the difference."""
    d = overshoot * W.width
    P = path.vertices
    Pe = np.vstack([[P[0, 0] - d, P[0, 1]], P, [P[-1, 0] + d, P[-1, 1]]])
    we = np.concatenate([[half_widths[0]], half_widths, [half_widths[-1]]])
    ze = np.concatenate([[zn[0]], zn, [zn[-1]]])
    dpn = dilate(Path(Pe), we, W.w0min - d, W.w0max + d)
    m = assemble_trench(dpn, ze, rim, tag_prefix="groove_").mesh
    c, s = np.cos(twist), np.sin(twist)
    ctr = np.array([(W.w0min + W.w0max) / 2, (W.w1min + W.w1max) / 2])
    V = m.vertices.copy()
    xy = V[:, :2] - ctr
    V[:, 0] = c * xy[:, 0] - s * xy[:, 1] + ctr[0]
    V[:, 1] = s * xy[:, 0] + c * xy[:, 1] + ctr[1]
    return SurfaceMesh(V, m.triangles, m.tags)


def generate_open_buckle(seed: int, p: ElongatedDefectParams) -> DefectInstance:
    """Ridge with a groove along its crest: B_P minus a narrower trench B_N
    following the same spine, whose rim lies above the ridge."""
    p.validate()
    W = p.window
    h = p.surface_height

    def body(st):
        path = _spine_path(st, p)
        dp, z, tm, l = _trench(st, p, path, +1, W.w0min, W.w0max)
        ok, rep = _accept(tm.mesh)
        if not ok:
            return None
        e = z - h
        rim = h + 1.25 * float(e.max())
        zn = h + (1.0 - p.groove_depth_ratio) * e
        tn = _groove(path, p.inner_width_ratio * l, zn, rim, W)
        if not _accept(tn)[0]:
            return None
        mesh = boolean(tm.mesh, tn, "difference")
        if mesh.is_empty:
            return None
        ok, rep2 = _accept(mesh)
        if not ok:
            return None
        return mesh, rep2, tm, path, z, zn

    a, (mesh, rep, tm, path, z, zn) = _run_attempts(p, seed, body)
    from .mesh import signed_volume

    extras = {"closed_volume": signed_volume(tm.mesh), "groove_spine": np.column_stack([path.vertices, zn]).tolist()}
    return DefectInstance(
        "buckle_open", seed, a, mesh, "positive", [np.column_stack([path.vertices, z])], [tm.footprint], p.to_dict(), rep, extras
    )


def assemble_coat_lift(dp: DilatedPath, e_contour, surface_z: float, layer_thickness: float) -> tuple[SurfaceMesh, np.ndarray, np.ndarray]:
    """Coating flap: underside from the spine up to the lifted upper contour,
    flat bottom strip from the spine down to the shifted copy P_low, and a
    cover over both.

    Returns (mesh, cover heights at the spine, footprint).
    """
    P = dp.path.vertices
    n = len(P)
    U = dp.upper.points
    nu = len(U)
    e_c = np.asarray(e_contour, dtype=float)
    h = surface_z
    Pl = P - np.array([0.0, layer_thickness])
    # cover height over the spine: along the straight line from the lifted
    # contour to the lower contour, evaluated at the spine
    s_c = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(U, axis=0).T))])
    s_c /= s_c[-1]
    s_p = dp.path.vertex_params()
    e_p = np.interp(s_p, s_c, e_c)
    lw = dp.widths.half_widths
    lv = np.concatenate([[lw[0]], 0.5 * (lw[:-1] + lw[1:]), [lw[-1]]])
    zc = h + e_p * layer_thickness / (layer_thickness + lv)

    base_u = n
    base_l = base_u + nu
    base_c = base_l + n
    V = np.vstack(
        [
            np.column_stack([P, np.full(n, h)]),
            np.column_stack([U, h + e_c]),
            np.column_stack([Pl, np.full(n, h)]),
            np.column_stack([P, zc]),
        ]
    )
    # one band triangulation shared by underside and cover: the zipper's flat
    # lateral triangles would fold against their lifted copies
    tu = sweep_band(P, U)
    c = tu >= n
    tu[c] = tu[c] - n + base_u
    tl = []
    for i in range(n - 1):
        tl.append((i, i + 1, base_l + i))
        tl.append((base_l + i + 1, base_l + i, i + 1))
    tl = np.asarray(tl, dtype=np.int64)
    tcu, tcl = tu.copy(), tl.copy()
    tcu[tcu < n] += base_c
    tcl[tcl < n] += base_c
    caps = []
    for i, j in ((0, 0), (n - 1, nu - 1)):
        caps.append((base_l + i, i, base_c + i))
        caps.append((i, base_u + j, base_c + i))
    tcap = np.asarray(caps, dtype=np.int64)
    tris = np.vstack([tu, tl, tcu, tcl, tcap])
    tags = ["underside"] * len(tu) + ["bottom"] * len(tl) + ["cover"] * (len(tcu) + len(tcl)) + ["end"] * len(tcap)
    mesh = orient_outward(SurfaceMesh(V, tris, tags))
    foot = np.vstack([U, Pl[::-1]])
    return mesh, zc, foot


def generate_coat_lift(seed: int, p: ElongatedDefectParams) -> DefectInstance:
    p.validate()
    W = p.window
    h = p.surface_height

    def body(st):
        path = _spine_path(st, p)
        # the lower copy is a vertical shift, which only stays embedded for x-monotone spines
        if not np.all(np.diff(path.vertices[:, 0]) > 0):
            return None
        l = width_profile_values(st.child("widths"), path, p.width_range, p.width_exponent)
        dp = dilate(path, l, W.w0min, W.w0max)
        U = dp.upper.points
        s_c = np.concatenate([[0.0], np.cumsum(np.hypot(*np.diff(U, axis=0).T))])
        s_c /= s_c[-1]
        e = height_profile_values(st.child("heights"), s_c, p.depth_or_height_range, p.height_exponent, p.end_ratio)
        mesh, zc, foot = assemble_coat_lift(dp, e, h, p.layer_thickness)
        ok, rep = _accept(mesh)
        if not ok:
            return None
        return mesh, rep, path, e, zc, foot, dp

    a, (mesh, rep, path, e, zc, foot, dp) = _run_attempts(p, seed, body)
    extras = {
        "contour_heights": (h + e).tolist(),
        "lower_contour": (path.vertices - np.array([0.0, p.layer_thickness])).tolist(),
    }
    return DefectInstance(
        "coat_lift", seed, a, mesh, "positive", [np.column_stack([path.vertices, np.full(len(path.vertices), h)])], [foot], p.to_dict(), rep, extras
    )


def generate_elongated(seed: int, p: ElongatedDefectParams) -> DefectInstance:
    t = p.defect_type
    if t in ("crack", "cold_shut"):
        return generate_crack(seed, p)
    if t in ("bulge", "buckle_closed"):
        return generate_bulge(seed, p)
    if t == "buckle_open":
        return generate_open_buckle(seed, p)
    if t == "coat_lift":
        return generate_coat_lift(seed, p)
    raise InvalidParams("defect_type", f"unknown elongated defect type {t!r}")
