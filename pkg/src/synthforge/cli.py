"""Command-line surface binding the pipeline into reproducible runs.

Exit codes: 0 success, 2 configuration error, 3 I/O error, 4 data
contract violation.  SYNTHFORGE_SEED overrides the configured seed.
"""

from __future__ import annotations

import functools
import json
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import augment as augmod
from . import chroma, evalkit, report as repmod
from .config import RunConfig, config_hash
from .dataset import (
    DatasetManifest,
    SplitPlan,
    generate_dataset,
    load_png,
    make_header,
    render_sample,
    save_png,
    split as split_op,
    subsample as subsample_op,
)
from .errors import ConfigError, ContractViolation, IoFailure, SynthForgeError
from .mesh import load_mesh, normalize_mesh
from .render import RenderConfig
from .scene import RandomizationSpec
from .testmeshes import builtin_mesh


def _handle_errors(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except ConfigError as exc:
            click.echo(f"config error: {exc}", err=True)
            sys.exit(2)
        except IoFailure as exc:
            click.echo(f"I/O error: {exc}", err=True)
            sys.exit(3)
        except ContractViolation as exc:
            click.echo(f"data contract violation: {exc}", err=True)
            sys.exit(4)
        except SynthForgeError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


def resolve_mesh(spec: str):
    if spec.startswith("builtin:"):
        return builtin_mesh(spec.split(":", 1)[1])
    return load_mesh(spec)


def _load_config(config_path, seed, n_per_class, out_dir) -> RunConfig:
    if config_path:
        cfg = RunConfig.from_file(config_path)
    else:
        raise ConfigError("--config is required")
    # flags override file values; the env var overrides both via effective_seed
    if seed is not None:
        cfg.seed = seed
    if n_per_class is not None:
        cfg.n_per_class = n_per_class
    if out_dir is not None:
        cfg.out_dir = out_dir
    cfg.validate()
    return cfg


@click.group()
def main():
    """Deterministic synthetic dataset forge and evaluation toolkit."""


@main.command("gen")
@click.option("--config", "config_path", type=click.Path(), help="run configuration JSON")
@click.option("--out", "out_dir", type=click.Path(), default=None, help="output directory")
@click.option("--seed", type=int, default=None)
@click.option("--n-per-class", type=int, default=None)
@click.option("--workers", type=int, default=1, show_default=True)
@_handle_errors
def cmd_gen(config_path, out_dir, seed, n_per_class, workers):
    """Render a labeled synthetic dataset and its manifest."""
    cfg = _load_config(config_path, seed, n_per_class, out_dir)
    meshes = {c["name"]: resolve_mesh(c["mesh"]) for c in cfg.classes}
    manifest = generate_dataset(
        meshes,
        cfg.n_per_class,
        cfg.effective_seed(),
        cfg.spec,
        cfg.render,
        cfg.out_dir,
        workers=workers,
        config_digest=cfg.digest(),
        header_extras={"thresholds": cfg.thresholds, "augment": cfg.augment},
    )
    click.echo(f"wrote {len(manifest.records)} samples to {cfg.out_dir} "
               f"(config_hash {manifest.config_hash})")


@main.command("cutout")
@click.option("--input", "input_dir", type=click.Path(exists=True), required=True,
              help="dataset directory with a manifest")
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="run configuration JSON for thresholds/kernel")
@click.option("--out-size", type=int, default=224, show_default=True)
@click.option("--fill", type=float, default=0.95, show_default=True)
@_handle_errors
def cmd_cutout(input_dir, out_dir, config_path, out_size, fill):
    """Chroma-key each image and write scale-normalized RGBA cutouts."""
    manifest = DatasetManifest.read(input_dir)
    cfg = RunConfig.from_file(config_path) if config_path else None
    thresholds = cfg.thresholds if cfg else chroma.HsvThresholds()
    kernel = cfg.kernel if cfg else chroma.MorphKernel()
    digest = config_hash(
        {
            "source": manifest.config_hash,
            "thresholds": thresholds.to_dict(),
            "kernel": kernel.to_dict(),
            "out_size": out_size,
            "fill": fill,
        }
    )
    out_records = []
    for rec in manifest.records:
        image = load_png(Path(input_dir) / rec["path"])
        mask = chroma.chroma_mask(image, thresholds)
        mask = chroma.morph_close(chroma.morph_open(mask, kernel), kernel)
        rgba = chroma.cutout_normalize(image, mask, out_size, fill)
        save_png(rgba, Path(out_dir) / rec["path"])
        out_rec = dict(rec)
        out_rec["config_hash"] = digest
        out_records.append(out_rec)
    header = make_header(
        digest,
        RandomizationSpec(**{**manifest.header["spec"],
                             "distance_range": tuple(manifest.header["spec"]["distance_range"]),
                             "intensity_range": tuple(manifest.header["spec"]["intensity_range"])}),
        RenderConfig(**{**manifest.header["render"],
                        "object_color": tuple(manifest.header["render"]["object_color"])}),
        thresholds=thresholds,
    )
    DatasetManifest(header=header, records=out_records).write(out_dir)
    click.echo(f"wrote {len(out_records)} cutouts to {out_dir} (config_hash {digest})")


@main.command("augment")
@click.option("--input", "input_dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--config", "config_path", type=click.Path(), default=None)
@click.option("--seed", type=int, default=0, show_default=True)
@_handle_errors
def cmd_augment(input_dir, out_dir, config_path, seed):
    """Write one augmented copy of every manifest image."""
    manifest = DatasetManifest.read(input_dir)
    spec = RunConfig.from_file(config_path).augment if config_path else augmod.AugmentSpec()
    digest = config_hash(
        {"source": manifest.config_hash, "augment": spec.to_dict(), "seed": seed}
    )
    out_records = []
    for i, rec in enumerate(manifest.records):
        image = load_png(Path(input_dir) / rec["path"])
        save_png(augmod.augment(image, spec, seed, i), Path(out_dir) / rec["path"])
        out_rec = dict(rec)
        out_rec["config_hash"] = digest
        out_records.append(out_rec)
    header = dict(manifest.header)
    header["augment"] = spec.to_dict()
    header["config_hash"] = digest
    DatasetManifest(header=header, records=out_records).write(out_dir)
    click.echo(f"wrote {len(out_records)} augmented images to {out_dir}")


def _write_derived(manifest: DatasetManifest, base_dir, out_dir, tag: str) -> None:
    out = Path(out_dir)
    header = dict(manifest.header)
    header["base_dir"] = str(Path(base_dir).resolve())
    header["derived"] = tag
    DatasetManifest(header=header, records=manifest.records).write(out)


@main.command("split")
@click.option("--input", "input_dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--train-fraction", type=float, default=0.8, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_handle_errors
def cmd_split(input_dir, out_dir, train_fraction, seed):
    """Derive per-class train/val manifests (images stay in place)."""
    manifest = DatasetManifest.read(input_dir)
    train, val = split_op(manifest, SplitPlan(train_fraction=train_fraction), seed)
    _write_derived(train, input_dir, Path(out_dir) / "train", "train")
    _write_derived(val, input_dir, Path(out_dir) / "val", "val")
    counts = {name: n for name, n in train.counts().items()}
    click.echo(f"train per class: {counts}; val total: {len(val.records)}")


@main.command("subsample")
@click.option("--input", "input_dir", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("-n", "--n-per-class", type=int, required=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_handle_errors
def cmd_subsample(input_dir, out_dir, n_per_class, seed):
    """Reduce a manifest to n images per class (nested under one seed)."""
    manifest = DatasetManifest.read(input_dir)
    sub, batch = subsample_op(manifest, n_per_class, seed)
    _write_derived(sub, input_dir, out_dir, f"subsample_{n_per_class}")
    click.echo(f"kept {n_per_class} per class; recommended batch size {batch}")


@main.command("eval")
@click.option("--log", "log_path", type=click.Path(exists=True), required=True,
              help="JSON-Lines prediction log")
@click.option("--threshold", type=float, default=None, help="confidence gate threshold")
@click.option("--zoom", "zoom_tag", default=None, help="restrict to records with this zoom tag")
@click.option("--group", "group_key", default=None, help="group key: class, zoom, dataset, ...")
@click.option("--out", "out_path", type=click.Path(), default=None, help="write JSON report here")
@_handle_errors
def cmd_eval(log_path, threshold, zoom_tag, group_key, out_path):
    """Metrics, confusion, and optional confidence gating for a log."""
    records = evalkit.read_prediction_log(log_path)
    if zoom_tag is not None:
        records = [r for r in records if str(r.extras.get("zoom")) == str(zoom_tag)]
    if not records:
        raise ContractViolation("no records selected")
    pooled = evalkit.metrics(evalkit.confusion(records))
    click.echo(repmod.format_report_text(pooled))
    payload = {"pooled": pooled.to_dict()}
    if group_key:
        groups, _ = evalkit.grouped_report(records, group_key)
        payload["groups"] = {str(k): v.to_dict() for k, v in groups.items()}
        for key, rep in groups.items():
            click.echo(f"[{group_key}={key}] n={rep.n} accuracy={evalkit.fmt_pct(rep.accuracy)}")
    if threshold is not None:
        gated = evalkit.confidence_gate(records, threshold)
        click.echo(repmod.format_gated_text(gated))
        payload["gated"] = gated.to_dict()
    if out_path:
        Path(out_path).parent.mkdir(parents=True, exist_ok=True)
        with open(out_path, "w") as fh:
            json.dump(payload, fh, indent=2)


@main.command("bench")
@click.option("--mesh", "mesh_spec", default="builtin:bench_cluster", show_default=True)
@click.option("--width", type=int, default=512, show_default=True)
@click.option("--height", type=int, default=512, show_default=True)
@click.option("-n", "--num-images", type=int, required=True)
@click.option("--workers", type=int, default=1, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@_handle_errors
def cmd_bench(mesh_spec, width, height, num_images, workers, seed):
    """Measure raw render throughput (no disk writes)."""
    if num_images < 1:
        raise ConfigError(f"-n must be >= 1, got {num_images}")
    mesh = normalize_mesh(resolve_mesh(mesh_spec))
    spec = RandomizationSpec()
    cfg = RenderConfig(width=width, height=height)
    render_sample(mesh, seed, 0, spec, cfg, 0)  # warm up the JIT
    start = time.perf_counter()
    if workers <= 1:
        for i in range(num_images):
            render_sample(mesh, seed, i, spec, cfg, 0)
    else:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=workers) as pool:
            list(pool.map(
                _bench_task,
                [(mesh, seed, i, spec, cfg) for i in range(num_images)],
                chunksize=8,
            ))
    elapsed = time.perf_counter() - start
    ms = 1000.0 * elapsed / num_images
    click.echo(
        f"{num_images} images at {width}x{height}, {len(mesh.triangles)} triangles, "
        f"workers={workers}: {ms:.2f} ms/image, {num_images / elapsed:.1f} images/s"
    )


def _bench_task(args):
    mesh, seed, i, spec, cfg = args
    render_sample(mesh, seed, i, spec, cfg, 0)


@main.command("report")
@click.option("--log", "log_path", type=click.Path(exists=True), required=True)
@click.option("--out", "out_dir", type=click.Path(), required=True)
@click.option("--threshold", type=float, default=0.70, show_default=True)
@click.option("--group", "group_key", default=None)
@_handle_errors
def cmd_report(log_path, out_dir, threshold, group_key):
    """Render figures and a delimited metrics table for a prediction log."""
    records = evalkit.read_prediction_log(log_path)
    if not records:
        raise ContractViolation("empty prediction log")
    pooled = evalkit.metrics(evalkit.confusion(records))
    gated = evalkit.confidence_gate(records, threshold)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    repmod.write_metrics_csv(pooled, out / "metrics.csv")
    repmod.plot_confusion(pooled, out / "confusion.png")
    repmod.plot_per_class_metrics(pooled, out / "per_class_metrics.png")
    with open(out / "gated.json", "w") as fh:
        json.dump(gated.to_dict(), fh, indent=2)
    if group_key:
        groups, _ = evalkit.grouped_report(records, group_key)
        repmod.plot_group_accuracy(groups, out / f"accuracy_by_{group_key}.png", group_key)
    click.echo(repmod.format_report_text(pooled))
    click.echo(repmod.format_gated_text(gated))
    click.echo(f"report written to {out}")


if __name__ == "__main__":
    main()
