"""Deterministic construction of the bundled fixture prediction logs.

Each fixture is a 150-record, 5-class log engineered so that confidence
gating at 0.70 and overall accuracy reproduce the published reference
counts exactly.  The checked-in files under fixtures/ are regenerated by
``python -m synthforge.fixtures <out_dir>``.
"""

from __future__ import annotations

from pathlib import Path

from .evalkit import PredictionRecord, write_prediction_log

__all__ = ["FIXTURE_SPECS", "build_fixture", "write_all"]

NUM_CLASSES = 5
TOTAL = 150

# name -> (confident_count, confident_correct, total_correct)
FIXTURE_SPECS = {
    "realmodel": (89, 87, 131),
    "synthmodel": (88, 84, 127),
    "synthtuned": (107, 103, 131),
}


def _probs(true: int, correct: bool, confident: bool) -> tuple[float, ...]:
    top = true if correct else (true + 1) % NUM_CLASSES
    peak, rest = (0.9, 0.025) if confident else (0.6, 0.1)
    probs = [rest] * NUM_CLASSES
    probs[top] = peak
    return tuple(probs)


def build_fixture(name: str) -> list[PredictionRecord]:
    confident_count, confident_correct, total_correct = FIXTURE_SPECS[name]
    unsure_correct = total_correct - confident_correct
    records = []
    for i in range(TOTAL):
        true = i % NUM_CLASSES
        confident = i < confident_count
        if confident:
            correct = i < confident_correct
        else:
            correct = (i - confident_count) < unsure_correct
        records.append(
            PredictionRecord(
                path=f"{name}/{i:04d}.png",
                true_class=true,
                probs=_probs(true, correct, confident),
                extras={"dataset": name},
            )
        )
    return records


def write_all(out_dir) -> list[Path]:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []
    for name in FIXTURE_SPECS:
        path = out / f"{name}_testset2.jsonl"
        write_prediction_log(build_fixture(name), path)
        paths.append(path)
    return paths


if __name__ == "__main__":
    import sys

    target = sys.argv[1] if len(sys.argv) > 1 else "fixtures"
    for p in write_all(target):
        print(p)
