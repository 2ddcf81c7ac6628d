"""Report rendering: delimited metric tables plus matplotlib figures."""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .errors import IoFailure
from .evalkit import EvalReport, GatedReport, fmt_pct

__all__ = [
    "write_metrics_csv",
    "plot_confusion",
    "plot_per_class_metrics",
    "plot_group_accuracy",
    "format_report_text",
    "format_gated_text",
]


def write_metrics_csv(report: EvalReport, path, class_names=None) -> None:
    names = class_names or [f"class_{i}" for i in range(report.confusion.num_classes)]
    try:
        Path(path).parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["class", "precision", "recall", "f1"])
            for i, name in enumerate(names):
                writer.writerow(
                    [
                        name,
                        _num(report.precision[i]),
                        _num(report.recall[i]),
                        _num(report.f1[i]),
                    ]
                )
            writer.writerow(["overall_accuracy", _num(report.accuracy), "", ""])
    except OSError as exc:
        raise IoFailure(f"cannot write {path}: {exc}") from exc


def _num(x):
    return "" if x is None else f"{x:.6f}"


def plot_confusion(report: EvalReport, path, class_names=None) -> None:
    counts = report.confusion.counts
    names = class_names or [f"class_{i}" for i in range(counts.shape[0])]
    fig, ax = plt.subplots(figsize=(5.5, 5))
    im = ax.imshow(counts, cmap="Blues")
    ax.set_xticks(range(len(names)), names, rotation=45, ha="right")
    ax.set_yticks(range(len(names)), names)
    ax.set_xlabel("predicted")
    ax.set_ylabel("true")
    threshold = counts.max() / 2 if counts.size else 0
    for i in range(counts.shape[0]):
        for j in range(counts.shape[1]):
            ax.text(
                j, i, str(counts[i, j]), ha="center", va="center",
                color="white" if counts[i, j] > threshold else "black",
            )
    fig.colorbar(im, ax=ax, shrink=0.8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_per_class_metrics(report: EvalReport, path, class_names=None) -> None:
    names = class_names or [f"class_{i}" for i in range(report.confusion.num_classes)]
    x = np.arange(len(names))
    fig, ax = plt.subplots(figsize=(1.2 * len(names) + 3, 4))
    for offset, (label, values) in zip(
        (-0.25, 0.0, 0.25),
        (("precision", report.precision), ("recall", report.recall), ("F1", report.f1)),
    ):
        heights = [v if v is not None else 0.0 for v in values]
        ax.bar(x + offset, heights, width=0.25, label=label)
    ax.set_xticks(x, names, rotation=30, ha="right")
    ax.set_ylim(0, 1.05)
    ax.axhline(report.accuracy, color="gray", linestyle="--", linewidth=1,
               label=f"accuracy {fmt_pct(report.accuracy)}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_group_accuracy(reports: dict, path, group_key: str) -> None:
    labels = [str(k) for k in reports]
    accs = [reports[k].accuracy for k in reports]
    fig, ax = plt.subplots(figsize=(1.0 * len(labels) + 3, 4))
    ax.bar(labels, accs, color="steelblue")
    ax.set_ylim(0, 1.05)
    ax.set_xlabel(group_key)
    ax.set_ylabel("accuracy")
    for i, acc in enumerate(accs):
        ax.text(i, acc + 0.01, fmt_pct(acc), ha="center", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def format_report_text(report: EvalReport, class_names=None) -> str:
    names = class_names or [f"class_{i}" for i in range(report.confusion.num_classes)]
    width = max([len(n) for n in names] + [8])
    lines = [
        f"n = {report.n}   accuracy = {fmt_pct(report.accuracy)}",
        f"{'class':<{width}}  {'P':>9}  {'R':>9}  {'F1':>9}",
    ]
    for i, name in enumerate(names):
        lines.append(
            f"{name:<{width}}  {fmt_pct(report.precision[i]):>9}  "
            f"{fmt_pct(report.recall[i]):>9}  {fmt_pct(report.f1[i]):>9}"
        )
    return "\n".join(lines)


def format_gated_text(g: GatedReport) -> str:
    return (
        f"confident {g.confident_count}/{g.total} ({fmt_pct(g.confident_proportion)}) "
        f"at threshold {g.threshold:g}; accuracy of confident = "
        f"{fmt_pct(g.accuracy_of_confident)}"
    )
