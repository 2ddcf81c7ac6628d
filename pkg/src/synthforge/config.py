"""Run configuration: one JSON document binding every sub-spec, with a
stable digest used for provenance checks across artifacts.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

from .augment import AugmentSpec
from .chroma import HsvThresholds, MorphKernel
from .errors import ConfigError
from .render import RenderConfig
from .scene import RandomizationSpec

__all__ = ["RunConfig", "config_hash", "canonical_json"]

ENV_SEED = "SYNTHFORGE_SEED"


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def config_hash(payload: dict) -> str:
    """16-hex digest of the canonical JSON serialization."""
    return hashlib.sha256(canonical_json(payload).encode("utf-8")).hexdigest()[:16]


@dataclass
class RunConfig:
    classes: list[dict]  # [{"name": ..., "mesh": path or "builtin:<name>"}]
    seed: int = 0
    n_per_class: int = 100
    out_dir: str = "out"
    spec: RandomizationSpec = field(default_factory=RandomizationSpec)
    render: RenderConfig = field(default_factory=RenderConfig)
    thresholds: HsvThresholds = field(default_factory=HsvThresholds)
    kernel: MorphKernel = field(default_factory=MorphKernel)
    augment: AugmentSpec = field(default_factory=AugmentSpec)
    train_fraction: float = 0.8

    def validate(self) -> None:
        if not self.classes:
            raise ConfigError("at least one class required")
        names = [c.get("name") for c in self.classes]
        if len(set(names)) != len(names) or not all(names):
            raise ConfigError("class names must be unique and non-empty")
        for c in self.classes:
            if "mesh" not in c:
                raise ConfigError(f"class {c.get('name')!r} missing 'mesh'")
        if self.n_per_class < 1:
            raise ConfigError(f"n_per_class must be >= 1, got {self.n_per_class}")
        if not 0 < self.train_fraction <= 1:
            raise ConfigError(f"train_fraction must be in (0,1], got {self.train_fraction}")
        self.spec.validate()
        self.render.validate()
        self.thresholds.validate()
        self.kernel.structure()
        self.augment.validate()

    def effective_seed(self) -> int:
        env = os.environ.get(ENV_SEED)
        return int(env) if env else self.seed

    def hash_payload(self) -> dict:
        # out_dir is excluded: content identity must not depend on location
        return {
            "classes": self.classes,
            "seed": self.effective_seed(),
            "n_per_class": self.n_per_class,
            "spec": self.spec.to_dict(),
            "render": self.render.to_dict(),
            "thresholds": self.thresholds.to_dict(),
            "kernel": self.kernel.to_dict(),
            "augment": self.augment.to_dict(),
            "train_fraction": self.train_fraction,
        }

    def digest(self) -> str:
        return config_hash(self.hash_payload())

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        def build(key, spec_cls):
            sub = data.get(key, {})
            if isinstance(sub, dict):
                sub = {k: tuple(v) if isinstance(v, list) else v for k, v in sub.items()}
                if key == "thresholds" and "hue_ranges" in sub:
                    sub["hue_ranges"] = tuple(tuple(r) for r in sub["hue_ranges"])
                if key == "kernel" and "shape" in sub:
                    sub["shape"] = tuple(tuple(r) for r in sub["shape"])
                if key == "render" and "object_color" in sub:
                    sub["object_color"] = tuple(sub["object_color"])
                try:
                    return spec_cls(**sub)
                except TypeError as exc:
                    raise ConfigError(f"bad {key} section: {exc}") from exc
            raise ConfigError(f"{key} section must be an object")

        try:
            cfg = cls(
                classes=list(data["classes"]),
                seed=int(data.get("seed", 0)),
                n_per_class=int(data.get("n_per_class", 100)),
                out_dir=str(data.get("out_dir", "out")),
                spec=build("spec", RandomizationSpec),
                render=build("render", RenderConfig),
                thresholds=build("thresholds", HsvThresholds),
                kernel=build("kernel", MorphKernel),
                augment=build("augment", AugmentSpec),
                train_fraction=float(data.get("train_fraction", 0.8)),
            )
        except KeyError as exc:
            raise ConfigError(f"missing config field: {exc}") from exc
        cfg.validate()
        return cfg

    @classmethod
    def from_file(cls, path) -> "RunConfig":
        try:
            with open(path) as fh:
                data = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config {path} is not valid JSON: {exc}") from exc
        return cls.from_dict(data)
