"""Classifier evaluation: confusion matrices, accuracy, per-class
precision/recall/F1, grouped breakdowns, and confidence gating.

Prediction logs are JSON Lines with fields ``path``, ``true_class`` and
``probs`` (plus optional group keys like ``zoom`` or ``dataset``).
Metrics with a zero denominator are reported as explicit None
("undefined"), never silently 0, and are excluded from macro averages.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import (
    ContractViolation,
    EmptyInput,
    InconsistentClassCount,
    IoFailure,
    MissingGroupKey,
)

__all__ = [
    "PredictionRecord",
    "ConfusionMatrix",
    "EvalReport",
    "GatedReport",
    "read_prediction_log",
    "write_prediction_log",
    "predicted_class",
    "confusion",
    "metrics",
    "confidence_gate",
    "grouped_report",
    "fmt_pct",
]

PROB_SUM_TOL = 1e-6


@dataclass(frozen=True)
class PredictionRecord:
    path: str
    true_class: int
    probs: tuple[float, ...]
    extras: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if abs(sum(self.probs) - 1.0) > PROB_SUM_TOL:
            raise ContractViolation(
                f"probabilities for {self.path!r} sum to {sum(self.probs)}, not 1"
            )
        if not 0 <= self.true_class < len(self.probs):
            raise ContractViolation(
                f"true_class {self.true_class} out of range for {len(self.probs)} classes"
            )


@dataclass(frozen=True)
class ConfusionMatrix:
    counts: np.ndarray  # (C, C) int64; row = true class, column = predicted

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def num_classes(self) -> int:
        return self.counts.shape[0]

    def __add__(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        if self.counts.shape != other.counts.shape:
            raise InconsistentClassCount("cannot merge confusion matrices of different sizes")
        return ConfusionMatrix(self.counts + other.counts)


@dataclass(frozen=True)
class EvalReport:
    accuracy: float
    precision: tuple  # per class, None where undefined
    recall: tuple
    f1: tuple
    confusion: ConfusionMatrix
    n: int

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "accuracy": self.accuracy,
            "precision": list(self.precision),
            "recall": list(self.recall),
            "f1": list(self.f1),
            "confusion": self.confusion.counts.tolist(),
        }


@dataclass(frozen=True)
class GatedReport:
    threshold: float
    confident_count: int
    total: int
    accuracy_of_confident: float | None

    @property
    def confident_proportion(self) -> float:
        return self.confident_count / self.total if self.total else 0.0

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "confident_count": self.confident_count,
            "total": self.total,
            "confident_proportion": self.confident_proportion,
            "accuracy_of_confident": self.accuracy_of_confident,
        }


def fmt_pct(x: float | None) -> str:
    """One-decimal percentage, matching the report tables; stored values
    keep full precision."""
    return "undefined" if x is None else f"{100.0 * x:.1f}%"


def read_prediction_log(path) -> list[PredictionRecord]:
    records = []
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, 1):
                if not line.strip():
                    continue
                try:
                    raw = json.loads(line)
                    extras = {
                        k: v for k, v in raw.items() if k not in ("path", "true_class", "probs")
                    }
                    records.append(
                        PredictionRecord(
                            path=raw["path"],
                            true_class=int(raw["true_class"]),
                            probs=tuple(float(p) for p in raw["probs"]),
                            extras=extras,
                        )
                    )
                except (KeyError, ValueError, TypeError) as exc:
                    raise ContractViolation(f"{path}:{lineno}: bad record: {exc}") from exc
    except OSError as exc:
        raise IoFailure(f"cannot read prediction log {path}: {exc}") from exc
    return records


def write_prediction_log(records, path) -> None:
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w") as fh:
            for r in records:
                row = {"path": r.path, "true_class": r.true_class, "probs": list(r.probs)}
                row.update(r.extras)
                fh.write(json.dumps(row) + "\n")
    except OSError as exc:
        raise IoFailure(f"cannot write prediction log {path}: {exc}") from exc


def predicted_class(record: PredictionRecord) -> int:
    """Argmax with ties broken toward the lowest class index."""
    probs = record.probs
    best = 0
    for i in range(1, len(probs)):
        if probs[i] > probs[best]:
            best = i
    return best


def confusion(records) -> ConfusionMatrix:
    records = list(records)
    if records:
        num_classes = len(records[0].probs)
        for r in records:
            if len(r.probs) != num_classes:
                raise InconsistentClassCount(
                    f"record {r.path!r} has {len(r.probs)} classes, expected {num_classes}"
                )
    else:
        num_classes = 0
    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    for r in records:
        counts[r.true_class, predicted_class(r)] += 1
    return ConfusionMatrix(counts)


def metrics(matrix: ConfusionMatrix) -> EvalReport:
    """Accuracy, per-class P/R and their harmonic mean F1 = 2PR/(P+R)."""
    if matrix.n < 1:
        raise EmptyInput("metrics need at least one record")
    counts = matrix.counts
    correct = int(np.trace(counts))
    accuracy = correct / matrix.n

    precision, recall, f1 = [], [], []
    for c in range(matrix.num_classes):
        tp = int(counts[c, c])
        labeled = int(counts[:, c].sum())  # tp + fp
        actual = int(counts[c, :].sum())  # tp + fn
        p = tp / labeled if labeled else None
        r = tp / actual if actual else None
        if p is None or r is None or p + r == 0:
            f = None
        else:
            f = 2.0 * p * r / (p + r)
        precision.append(p)
        recall.append(r)
        f1.append(f)
    return EvalReport(
        accuracy=accuracy,
        precision=tuple(precision),
        recall=tuple(recall),
        f1=tuple(f1),
        confusion=matrix,
        n=matrix.n,
    )


def confidence_gate(records, threshold: float) -> GatedReport:
    """Keep records whose top probability is at least the threshold and
    report the size and accuracy of that confident subset."""
    if not 0 <= threshold <= 1:
        raise ContractViolation(f"threshold must be in [0,1], got {threshold}")
    records = list(records)
    confident = [r for r in records if max(r.probs) >= threshold]
    if confident:
        correct = sum(1 for r in confident if predicted_class(r) == r.true_class)
        acc = correct / len(confident)
    else:
        acc = None
    return GatedReport(
        threshold=threshold,
        confident_count=len(confident),
        total=len(records),
        accuracy_of_confident=acc,
    )


def grouped_report(records, group_key: str) -> tuple[dict, EvalReport]:
    """Per-group EvalReports plus the pooled report.

    ``class`` groups by true class; any other key must be present in every
    record's extra fields (e.g. ``zoom`` or ``dataset``).
    """
    records = list(records)
    if not records:
        raise EmptyInput("grouped_report needs at least one record")
    groups: dict = {}
    for r in records:
        if group_key == "class":
            key = r.true_class
        else:
            if group_key not in r.extras:
                raise MissingGroupKey(f"record {r.path!r} lacks group key {group_key!r}")
            key = r.extras[group_key]
        groups.setdefault(key, []).append(r)
    reports = {key: metrics(confusion(rs)) for key, rs in sorted(groups.items(), key=lambda kv: str(kv[0]))}
    pooled = metrics(confusion(records))
    return reports, pooled
