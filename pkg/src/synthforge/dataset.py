"""Dataset generation, manifests, splits, and reduced-data subsampling.

Manifests are UTF-8 JSON Lines (one record per line) next to a JSON
header carrying the run-configuration snapshot and its digest.  Layout:
out_dir/<class_name>/<index padded to 6>.png with sibling _mask.png.
"""

from __future__ import annotations

import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from PIL import Image

from . import rng
from .errors import (
    ContractViolation,
    IoFailure,
    ObjectNotVisible,
    RenderRejectionExhausted,
    TooFewSamples,
)
from .mesh import Mesh, normalize_mesh
from .render import RenderConfig, render
from .scene import RandomizationSpec, scene_params

__all__ = [
    "SplitPlan",
    "DatasetManifest",
    "generate_dataset",
    "split",
    "subsample",
    "recommended_batch_size",
    "save_png",
    "load_png",
]

MANIFEST_HEADER = "manifest.json"
MANIFEST_RECORDS = "manifest.jsonl"
MAX_REDRAW_ATTEMPTS = 8

# Table of recommended mini-batch sizes per training-set size; off-table
# sizes fall back to the largest power of two <= (2/3) * n.
BATCH_TABLE = {96: 64, 48: 32, 24: 16, 12: 8}


def save_png(array: np.ndarray, path) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        Image.fromarray(array).save(path, format="PNG")
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def load_png(path) -> np.ndarray:
    try:
        with Image.open(path) as img:
            return np.asarray(img)
    except OSError as exc:
        raise IoFailure(f"cannot read {path}: {exc}") from exc


@dataclass(frozen=True)
class SplitPlan:
    train_fraction: float = 0.8

    def train_count(self, total: int) -> int:
        return math.ceil(self.train_fraction * total)


@dataclass
class DatasetManifest:
    header: dict
    records: list[dict]

    @property
    def config_hash(self) -> str:
        return self.header["config_hash"]

    def class_names(self) -> list[str]:
        seen: dict[str, None] = {}
        for r in self.records:
            seen.setdefault(r["class_name"])
        return list(seen)

    def by_class(self) -> dict[int, list[dict]]:
        out: dict[int, list[dict]] = {}
        for r in self.records:
            out.setdefault(r["class_id"], []).append(r)
        return out

    def counts(self) -> dict[str, int]:
        out: dict[str, int] = {}
        for r in self.records:
            out[r["class_name"]] = out.get(r["class_name"], 0) + 1
        return out

    def validate(self) -> None:
        paths = [r["path"] for r in self.records]
        if len(set(paths)) != len(paths):
            raise ContractViolation("manifest has duplicate paths")
        for r in self.records:
            if r["config_hash"] != self.config_hash:
                raise ContractViolation(
                    f"record {r['path']} hash {r['config_hash']} != header {self.config_hash}"
                )

    def write(self, out_dir) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        try:
            with open(out / MANIFEST_HEADER, "w") as fh:
                json.dump(self.header, fh, indent=2, sort_keys=True)
                fh.write("\n")
            with open(out / MANIFEST_RECORDS, "w") as fh:
                for r in self.records:
                    fh.write(json.dumps(r, sort_keys=True) + "\n")
        except OSError as exc:
            raise IoFailure(f"cannot write manifest to {out}: {exc}") from exc

    @classmethod
    def read(cls, path) -> "DatasetManifest":
        root = Path(path)
        if root.is_file():  # accept the .jsonl path directly
            root = root.parent
        try:
            with open(root / MANIFEST_HEADER) as fh:
                header = json.load(fh)
            with open(root / MANIFEST_RECORDS) as fh:
                records = [json.loads(line) for line in fh if line.strip()]
        except OSError as exc:
            raise IoFailure(f"cannot read manifest at {root}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ContractViolation(f"corrupt manifest at {root}: {exc}") from exc
        manifest = cls(header=header, records=records)
        manifest.validate()
        return manifest


def make_header(
    config_digest: str,
    spec: RandomizationSpec,
    render_cfg: RenderConfig,
    thresholds=None,
    augment=None,
    created=None,
) -> dict:
    """Manifest header.  `created` defaults to SOURCE_DATE_EPOCH when set
    and to null otherwise, keeping generated trees byte-identical across
    reruns (pass an explicit timestamp to record wall-clock time).
    """
    if created is None:
        epoch = os.environ.get("SOURCE_DATE_EPOCH")
        if epoch:
            import datetime

            created = datetime.datetime.fromtimestamp(
                int(epoch), datetime.timezone.utc
            ).isoformat()
    return {
        "version": 1,
        "created": created,
        "spec": spec.to_dict(),
        "render": render_cfg.to_dict(),
        "thresholds": thresholds.to_dict() if thresholds is not None else None,
        "augment": augment.to_dict() if augment is not None else None,
        "config_hash": config_digest,
    }


def render_sample(mesh: Mesh, seed: int, index: int, spec, cfg, class_id: int):
    """Render sample `index`, re-drawing scene parameters deterministically
    (reserved attempt sub-streams, capped) when the object is not visible.
    """
    for attempt in range(MAX_REDRAW_ATTEMPTS):
        params = scene_params(seed, index, spec, object_radius=1.0, attempt=attempt)
        try:
            return render(mesh, params, cfg, class_id=class_id)
        except ObjectNotVisible:
            continue
    raise RenderRejectionExhausted(
        f"sample (seed={seed}, index={index}, class={class_id}) rejected "
        f"{MAX_REDRAW_ATTEMPTS} times"
    )


# -- worker plumbing for parallel generation ---------------------------------

_WORKER_STATE: dict = {}


def _init_worker(meshes, seed, spec, cfg, out_dir):
    _WORKER_STATE.update(meshes=meshes, seed=seed, spec=spec, cfg=cfg, out_dir=out_dir)


def _run_task(task):
    class_id, class_name, index = task
    st = _WORKER_STATE
    result = render_sample(st["meshes"][class_id], st["seed"], index, st["spec"], st["cfg"], class_id)
    rel = f"{class_name}/{index:06d}.png"
    save_png(result.pixels, Path(st["out_dir"]) / rel)
    save_png(result.mask, Path(st["out_dir"]) / f"{class_name}/{index:06d}_mask.png")
    return rel


def generate_dataset(
    meshes: dict[str, Mesh],
    n_per_class: int,
    seed: int,
    spec: RandomizationSpec,
    cfg: RenderConfig,
    out_dir,
    workers: int = 1,
    config_digest: str | None = None,
    header_extras: dict | None = None,
) -> DatasetManifest:
    """Render n_per_class samples for every class and write them plus the
    manifest under out_dir.  Scene draws depend only on (seed, index), so
    sample i shares pose/lighting/background across classes.
    """
    if not meshes:
        raise ContractViolation("at least one class required")
    if n_per_class < 1:
        raise ContractViolation("n_per_class must be >= 1")
    spec.validate()
    cfg.validate()
    if config_digest is None:
        config_digest = "unspecified"

    normalized = [normalize_mesh(m) for m in meshes.values()]
    names = list(meshes.keys())
    tasks = [
        (class_id, names[class_id], index)
        for class_id in range(len(names))
        for index in range(n_per_class)
    ]

    if workers <= 1:
        _init_worker(normalized, seed, spec, cfg, out_dir)
        for task in tasks:
            _run_task(task)
    else:
        with ProcessPoolExecutor(
            max_workers=workers,
            initializer=_init_worker,
            initargs=(normalized, seed, spec, cfg, out_dir),
        ) as pool:
            list(pool.map(_run_task, tasks, chunksize=16))

    records = [
        {
            "path": f"{name}/{index:06d}.png",
            "class_id": class_id,
            "class_name": name,
            "split": "all",
            "seed": seed,
            "index": index,
            "config_hash": config_digest,
        }
        for (class_id, name, index) in tasks
    ]
    header = make_header(config_digest, spec, cfg, **(header_extras or {}))
    manifest = DatasetManifest(header=header, records=records)
    manifest.write(out_dir)
    return manifest


def split(
    manifest: DatasetManifest, plan: SplitPlan, seed: int
) -> tuple[DatasetManifest, DatasetManifest]:
    """Per-class deterministic shuffle; train takes ceil(fraction * N)."""
    train_records: list[dict] = []
    val_records: list[dict] = []
    for class_id, records in sorted(manifest.by_class().items()):
        if len(records) < 2 and plan.train_fraction < 1.0:
            raise TooFewSamples(
                f"class {class_id} has {len(records)} samples; need >= 2 to split"
            )
        order = rng.stream(seed, class_id, "split").permutation(len(records))
        n_train = plan.train_count(len(records))
        if n_train >= len(records):
            warnings.warn(
                f"class {class_id}: split leaves an empty validation set "
                f"(train_fraction={plan.train_fraction}, n={len(records)})"
            )
        for pos, idx in enumerate(order):
            rec = dict(records[idx])
            rec["split"] = "train" if pos < n_train else "val"
            (train_records if pos < n_train else val_records).append(rec)
    train_records.sort(key=lambda r: (r["class_id"], r["index"]))
    val_records.sort(key=lambda r: (r["class_id"], r["index"]))
    return (
        DatasetManifest(header=dict(manifest.header), records=train_records),
        DatasetManifest(header=dict(manifest.header), records=val_records),
    )


def recommended_batch_size(n_per_class: int) -> int:
    """Table lookup with a largest-power-of-two <= (2/3)*n fallback."""
    if n_per_class in BATCH_TABLE:
        return BATCH_TABLE[n_per_class]
    limit = (2.0 / 3.0) * n_per_class
    if limit < 1:
        return 1
    return 2 ** int(math.floor(math.log2(limit)))


def subsample(
    manifest: DatasetManifest, n_per_class: int, seed: int
) -> tuple[DatasetManifest, int]:
    """Deterministic nested per-class selection: for one seed the n' < n
    subset is a prefix of the n subset, so reduced-data sweeps reuse
    images monotonically.
    """
    out: list[dict] = []
    for class_id, records in sorted(manifest.by_class().items()):
        if n_per_class > len(records):
            raise TooFewSamples(
                f"class {class_id} has {len(records)} samples < requested {n_per_class}"
            )
        order = rng.stream(seed, class_id, "subsample").permutation(len(records))
        chosen = sorted(order[:n_per_class])
        out.extend(records[i] for i in chosen)
    return (
        DatasetManifest(header=dict(manifest.header), records=out),
        recommended_batch_size(n_per_class),
    )
