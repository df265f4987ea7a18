"""Command line: ``defectforge generate | validate | demo``."""
from __future__ import annotations

import json
import os
import sys

import click

from .batch import render_instance, run_job
from .config import EXPORT_FORMATS, FORMATS_EXT, PRESETS, TYPE_PRESET, load_config
from .errors import ConfigError, DefectForgeError
from .io import load_mesh
from .mesh import signed_volume, validate


@click.group()
def main():
    """Procedural surface defect meshes."""


@main.command()
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--seed", type=int, default=None, help="Base seed, overrides the config.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None)
@click.option("--format", "fmt", type=click.Choice(EXPORT_FORMATS), default=None)
def generate(config_path, seed, out_dir, fmt):
    """Generate every instance requested by a JSON job file."""
    try:
        cfg = load_config(config_path)
    except ConfigError as e:
        click.echo(f"config error: {e}", err=True)
        sys.exit(2)
    if seed is not None:
        cfg.base_seed = seed
    results = run_job(cfg, out_dir, fmt)
    failed = [(i, r) for i, r in enumerate(results) if not r.ok]
    for i, r in enumerate(results):
        click.echo(f"[{i}] {r.stem}: {'ok' if r.ok else 'FAILED ' + (r.error or 'invalid mesh')}")
    if failed:
        click.echo(f"{len(failed)} of {len(results)} instances failed", err=True)
        sys.exit(1)


@main.command(name="validate")
@click.argument("mesh_file", type=click.Path(exists=True, dir_okay=False))
def validate_cmd(mesh_file):
    """Check a mesh file: closedness, orientation, Euler characteristic, self-intersections."""
    try:
        mesh = load_mesh(mesh_file)
    except DefectForgeError as e:
        click.echo(f"cannot read {mesh_file}: {e}", err=True)
        sys.exit(2)
    rep = validate(mesh)
    d = rep.to_dict()
    if rep.closed:
        d["volume"] = signed_volume(mesh)
    click.echo(json.dumps(d, sort_keys=True, indent=2))
    sys.exit(0 if rep.ok else 1)


@main.command()
@click.option("--type", "kind", required=True, help="Defect type or preset name (fig5, fig6a-150, ...), or 'all' for every preset.")
@click.option("--seed", type=int, default=42, show_default=True)
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default="demo_out", show_default=True)
@click.option("--format", "fmt", type=click.Choice(EXPORT_FORMATS), default="obj", show_default=True)
def demo(kind, seed, out_dir, fmt):
    """Reproduce a figure parameter set."""
    if kind == "all":
        runs = [(name, PRESETS[name][0]) for name in PRESETS]
    elif kind in PRESETS:
        runs = [(kind, PRESETS[kind][0])]
    elif kind in TYPE_PRESET:
        runs = [(TYPE_PRESET[kind], kind)]
    else:
        raise click.BadParameter(f"unknown type or preset {kind!r}", param_hint="--type")
    os.makedirs(out_dir, exist_ok=True)
    bad = 0
    for preset, dtype in runs:
        r = render_instance(dtype, seed, {}, fmt, None, preset)
        # presets of the same type would overwrite each other in a full run
        prefix = f"{preset}_" if kind == "all" else ""
        for name, data in r.files.items():
            with open(os.path.join(out_dir, prefix + name), "wb") as f:
                f.write(data)
        label = preset or dtype
        click.echo(f"{label}: {r.stem}{FORMATS_EXT[fmt]} {'ok' if r.ok else 'FAILED ' + (r.error or 'invalid mesh')}")
        bad += not r.ok
    sys.exit(1 if bad else 0)


if __name__ == "__main__":
    main()
