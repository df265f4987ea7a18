"""Batch generation: one mesh file and one annotation sidecar per instance."""
from __future__ import annotations

import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

from .boolean import Slab, imprint_into_slab
from .config import FORMATS_EXT, JobConfig, params_for
from .defects import generate_elongated
from .delamination import DelamParams, generate_delamination
from .errors import DefectForgeError
from .io import annotation, annotation_bytes, as_written, mesh_bytes

log = logging.getLogger(__name__)


def thread_cap(default: int | None = None) -> int:
    """Worker count: DEFECTFORGE_THREADS if set, else the CPU count."""
    env = os.environ.get("DEFECTFORGE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            log.warning("ignoring non-integer DEFECTFORGE_THREADS=%r", env)
    return default or os.cpu_count() or 1


def file_stem(defect_type: str, seed: int) -> str:
    return f"{defect_type}_{seed:06d}"


@dataclass
class Rendered:
    stem: str
    files: dict  # file name -> bytes
    ok: bool
    error: str | None = None
    info: dict = field(default_factory=dict)


def render_instance(defect_type: str, seed: int, params, fmt: str = "obj", slab=None, preset: str | None = None) -> Rendered:
    """Generate one instance and serialize it; ``params`` is a dict of overrides."""
    stem = file_stem(defect_type, seed)
    try:
        dtype, p = params_for(defect_type, params, preset)
        if dtype == "delamination":
            inst = generate_delamination(seed, p)
            mesh = inst.mesh
            sign = "positive"
            spines = []
            footprints = [c.vertices[lp] for c in inst.cells if c.coarse_index in inst.selected for lp in c.loops]
            extra = {
                "attempt": inst.attempt,
                "cells": [
                    {
                        "coarse_index": c.coarse_index,
                        "fine_cells": c.fine_cells,
                        "interior_points": {str(k): v for k, v in sorted(c.interior_counts.items())},
                        "validation": c.report.to_dict(),
                    }
                    for c in inst.cells
                    if c.coarse_index in inst.selected
                ],
            }
        else:
            inst = generate_elongated(seed, p)
            mesh = inst.mesh
            sign = inst.sign
            spines = [s[:, :2] for s in inst.spines]
            footprints = inst.footprints
            extra = {"attempt": inst.attempt, "sign": sign, "spine_heights": [s[:, 2].tolist() for s in inst.spines]}
            extra.update({k: v for k, v in inst.extras.items() if k != "groove_spine"})
        written = as_written(mesh, fmt)
        ext = FORMATS_EXT[fmt]
        files = {stem + ext: mesh_bytes(written, fmt)}
        ann = annotation(dtype, seed, p.to_dict(), written, spines, footprints, extra)
        if slab is not None:
            sl = Slab.around(p.window, p.surface_height, slab.thickness, slab.margin)
            parts = inst.cell_meshes if dtype == "delamination" else [mesh]
            imp = imprint_into_slab([(m, sign) for m in parts], sl)
            files[stem + "_slab" + ext] = mesh_bytes(as_written(imp, fmt), fmt)
            ann["slab"] = {"box": [sl.x0, sl.x1, sl.y0, sl.y1, sl.bottom, sl.top], "faces": int(len(imp.triangles))}
        files[stem + ".json"] = annotation_bytes(ann)
        ok = bool(ann["validation"]["closed"] and ann["validation"]["oriented"])
        if dtype == "delamination":
            ok = ok and all(c["validation"]["closed"] for c in extra["cells"])
        return Rendered(stem, files, ok)
    except DefectForgeError as e:
        return Rendered(stem, {}, False, f"{type(e).__name__}: {e}")


def _render_args(args):
    return render_instance(*args)


def run_job(config: JobConfig, out_dir: str | None = None, fmt: str | None = None, workers: int | None = None) -> list:
    """Generate every instance of the job and write the files. Returns the
    Rendered results in request order; failures carry an error message."""
    out = out_dir or config.output_dir
    fmt = fmt or config.format
    os.makedirs(out, exist_ok=True)
    jobs = [(t, s, prm, fmt, config.slab, pre) for t, s, prm, pre in config.instances()]
    n = min(workers or thread_cap(), len(jobs))
    if n > 1:
        with ProcessPoolExecutor(max_workers=n) as ex:
            results = list(ex.map(_render_args, jobs))
    else:
        results = [_render_args(j) for j in jobs]
    for r in results:
        for name, data in r.files.items():
            with open(os.path.join(out, name), "wb") as f:
                f.write(data)
    return results
