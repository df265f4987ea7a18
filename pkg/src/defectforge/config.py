"""Job configuration (JSON) and the named figure presets."""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace

from .defects import ELONGATED_TYPES, ElongatedDefectParams, default_params
from .delamination import DelamParams
from .errors import ConfigError, InvalidParams
from .pathing import SplineSpec

DEFECT_TYPES = ELONGATED_TYPES + ("delamination",)
EXPORT_FORMATS = ("obj", "stl", "ply")
FORMATS_EXT = {"obj": ".obj", "stl": ".stl", "ply": ".ply"}


def _crack(**kw) -> ElongatedDefectParams:
    return replace(default_params("crack"), **kw)


PRESETS = {
    "fig5": ("crack", lambda: _crack(n_generators=1000)),
    "fig6a-150": ("crack", lambda: _crack(n_generators=150)),
    "fig6a-2000": ("crack", lambda: _crack(n_generators=2000)),
    "fig6b": ("crack", lambda: _crack(n_generators=1000, branches=1)),
    "fig7a": ("bulge", lambda: default_params("bulge")),
    "fig7b": ("buckle_open", lambda: default_params("buckle_open")),
    "fig7c": ("coat_lift", lambda: default_params("coat_lift")),
    "fig8-left": ("cold_shut", lambda: replace(default_params("cold_shut"), spline=SplineSpec(5, 50))),
    "fig8-right": ("cold_shut", lambda: replace(default_params("cold_shut"), spline=SplineSpec(10, 100))),
    "fig12": ("delamination", lambda: DelamParams(n_coarse=10, n_fine=110, r_max=12)),
}

# ``demo --type <defect>`` uses these presets
TYPE_PRESET = {
    "crack": "fig5",
    "bulge": "fig7a",
    "buckle_closed": None,
    "buckle_open": "fig7b",
    "coat_lift": "fig7c",
    "cold_shut": "fig8-left",
    "delamination": "fig12",
}


def params_for(defect_type: str, overrides: dict | None = None, preset: str | None = None):
    """Default (or preset) parameters with ``overrides`` applied and validated."""
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}")
        ptype, make = PRESETS[preset]
        if defect_type is not None and defect_type != ptype:
            raise ConfigError(f"preset {preset!r} is a {ptype}, not a {defect_type}")
        defect_type, base = ptype, make()
    elif defect_type == "delamination":
        base = DelamParams()
    elif defect_type in ELONGATED_TYPES:
        base = default_params(defect_type)
    else:
        raise ConfigError(f"unknown defect type {defect_type!r}")
    d = base.to_dict()
    if overrides:
        d.update(overrides)
    if defect_type != "delamination":
        d["defect_type"] = defect_type
    cls = DelamParams if defect_type == "delamination" else ElongatedDefectParams
    try:
        return defect_type, cls.from_dict(d).validate()
    except TypeError as e:
        raise ConfigError(str(e)) from None


@dataclass
class DefectEntry:
    defect_type: str
    count: int = 1
    params: dict = field(default_factory=dict)
    preset: str | None = None
    seeds: list | None = None


@dataclass
class SlabSpec:
    thickness: float = 0.2
    margin: float = 0.1


@dataclass
class JobConfig:
    defects: list
    base_seed: int = 0
    output_dir: str = "out"
    format: str = "obj"
    slab: SlabSpec | None = None

    def instances(self) -> list:
        """(defect_type, seed, params_dict, preset) per requested instance.
        Derived seeds are base_seed + running index over the whole batch."""
        out = []
        k = 0
        for e in self.defects:
            for i in range(e.count):
                seed = e.seeds[i] if e.seeds is not None else self.base_seed + k
                out.append((e.defect_type, int(seed), e.params, e.preset))
                k += 1
        return out


def _where(path: str, msg: str) -> ConfigError:
    return ConfigError(f"{path}: {msg}")


def parse_config(text: str) -> JobConfig:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigError(f"line {e.lineno}, column {e.colno}: {e.msg}") from None
    if not isinstance(raw, dict):
        raise _where("$", "expected an object")
    allowed = {"schema_version", "defects", "base_seed", "output_dir", "format", "slab"}
    for k in raw:
        if k not in allowed:
            raise _where(k, "unknown key")
    if raw.get("schema_version", 1) != 1:
        raise _where("schema_version", "only version 1 is supported")
    fmt = raw.get("format", "obj")
    if fmt not in EXPORT_FORMATS:
        raise _where("format", f"expected one of {list(EXPORT_FORMATS)}")
    base_seed = raw.get("base_seed", 0)
    if not isinstance(base_seed, int) or base_seed < 0:
        raise _where("base_seed", "expected a non-negative integer")
    slab = None
    if raw.get("slab") is not None:
        s = raw["slab"]
        if not isinstance(s, dict) or set(s) - {"thickness", "margin"}:
            raise _where("slab", "expected {thickness, margin}")
        slab = SlabSpec(float(s.get("thickness", 0.2)), float(s.get("margin", 0.1)))
        if slab.thickness <= 0:
            raise _where("slab.thickness", "must be > 0")
    entries = raw.get("defects")
    if not isinstance(entries, list) or not entries:
        raise _where("defects", "expected a non-empty list")
    defects = []
    for i, e in enumerate(entries):
        where = f"defects[{i}]"
        if not isinstance(e, dict):
            raise _where(where, "expected an object")
        for k in e:
            if k not in ("type", "count", "params", "preset", "seeds"):
                raise _where(f"{where}.{k}", "unknown key")
        t = e.get("type")
        preset = e.get("preset")
        if t is None and preset in PRESETS:
            t = PRESETS[preset][0]
        if t not in DEFECT_TYPES:
            raise _where(f"{where}.type", f"expected one of {list(DEFECT_TYPES)}")
        count = e.get("count", 1)
        if not isinstance(count, int) or count < 1:
            raise _where(f"{where}.count", "must be an integer >= 1")
        seeds = e.get("seeds")
        if seeds is not None:
            if not isinstance(seeds, list) or len(seeds) != count or not all(isinstance(x, int) and x >= 0 for x in seeds):
                raise _where(f"{where}.seeds", "expected `count` non-negative integers")
        params = e.get("params", {})
        if not isinstance(params, dict):
            raise _where(f"{where}.params", "expected an object")
        try:
            params_for(t, params, preset)
        except InvalidParams as err:
            raise _where(f"{where}.params.{err.field}", err.message) from None
        except ConfigError as err:
            raise _where(f"{where}", str(err)) from None
        defects.append(DefectEntry(t, count, params, preset, seeds))
    return JobConfig(defects, base_seed, raw.get("output_dir", "out"), fmt, slab)


def load_config(path) -> JobConfig:
    with open(path, encoding="utf-8") as f:
        return parse_config(f.read())
