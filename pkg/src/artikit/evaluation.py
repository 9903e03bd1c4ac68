"""Result artifacts: per-class accuracy tables, detection
precision/recall/F1, per-speaker agreement, and threshold sweeps.

The positive class for detection metrics is "error" (binary label 1).
Undefined metrics (no predicted positives, or no expert positives) are
reported as None with a flag rather than silently as zero.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .classes import CLASSES
from .errors import EmptyInputError, UndefinedStatisticError
from .agreement import cohen_kappa, kappa_band
from .scoring import ScoreRecord, binarize


@dataclass
class ClassificationReport:
    per_class_accuracy: dict[str, float]
    per_class_counts: dict[str, int]
    global_accuracy: float

    def to_json(self) -> dict:
        return {
            "per_class_accuracy": self.per_class_accuracy,
            "per_class_counts": self.per_class_counts,
            "global_accuracy": self.global_accuracy,
        }

    def to_text(self) -> str:
        lines = [f"{'class':<14s}{'n':>6s}{'accuracy':>10s}"]
        for cls in CLASSES:
            if cls not in self.per_class_counts:
                continue
            acc = self.per_class_accuracy[cls]
            lines.append(f"{cls:<14s}{self.per_class_counts[cls]:>6d}{acc:>10.4f}")
        total = sum(self.per_class_counts.values())
        lines.append(f"{'global':<14s}{total:>6d}{self.global_accuracy:>10.4f}")
        return "\n".join(lines)


def classification_report(predicted, actual) -> ClassificationReport:
    """Per-class and sample-weighted global accuracy from index arrays."""
    predicted = np.asarray(predicted)
    actual = np.asarray(actual)
    if predicted.shape != actual.shape:
        raise ValueError(f"prediction/label shapes differ: {predicted.shape} vs {actual.shape}")
    if predicted.size == 0:
        raise EmptyInputError("classification report over an empty sample set")
    accs, counts = {}, {}
    for idx, cls in enumerate(CLASSES):
        mask = actual == idx
        n = int(mask.sum())
        if n == 0:
            continue
        counts[cls] = n
        accs[cls] = float((predicted[mask] == idx).mean())
    total = sum(counts.values())
    global_acc = sum(accs[c] * counts[c] for c in counts) / total
    return ClassificationReport(per_class_accuracy=accs, per_class_counts=counts,
                                global_accuracy=float(global_acc))


def classify_report(model, samples) -> ClassificationReport:
    """Run a model over labeled samples and tabulate accuracy."""
    from .nnet import predict_proba
    from .nnet.network import batch_labels
    if not len(samples):
        raise EmptyInputError("classification report over an empty sample set")
    probs = predict_proba(model, samples)
    return classification_report(probs.argmax(axis=1), batch_labels(samples))


@dataclass
class DetectionReport:
    precision: float | None
    recall: float | None
    f1: float | None
    accuracy: float
    tp: int
    fp: int
    fn: int
    tn: int
    flags: list[str] = field(default_factory=list)

    @property
    def confusion(self) -> dict:
        # rows = expert, columns = model; positive class (error) = 1
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}

    def to_json(self) -> dict:
        return {"precision": self.precision, "recall": self.recall, "f1": self.f1,
                "accuracy": self.accuracy, "confusion": self.confusion, "flags": self.flags}

    def to_text(self) -> str:
        def fmt(v):
            return "   n/a" if v is None else f"{v:6.3f}"
        lines = [
            f"precision {fmt(self.precision)}   recall {fmt(self.recall)}   "
            f"f1 {fmt(self.f1)}   accuracy {self.accuracy:6.3f}",
            "confusion (rows expert, cols model; error=1):",
            f"    pred0  pred1",
            f"  0 {self.tn:5d}  {self.fp:5d}",
            f"  1 {self.fn:5d}  {self.tp:5d}",
        ]
        if self.flags:
            lines.append("flags: " + ", ".join(self.flags))
        return "\n".join(lines)


def detection_report(pairs) -> DetectionReport:
    """Detection metrics from (b_expert, b_model) binary pairs."""
    pairs = list(pairs)
    if not pairs:
        raise EmptyInputError("detection report over an empty record set")
    tp = sum(1 for e, m in pairs if e == 1 and m == 1)
    fp = sum(1 for e, m in pairs if e == 0 and m == 1)
    fn = sum(1 for e, m in pairs if e == 1 and m == 0)
    tn = sum(1 for e, m in pairs if e == 0 and m == 0)
    flags = []
    precision = recall = f1 = None
    if tp + fp > 0:
        precision = tp / (tp + fp)
    else:
        flags.append("precision undefined (no predicted errors)")
    if tp + fn > 0:
        recall = tp / (tp + fn)
    else:
        flags.append("recall undefined (no expert errors)")
    if precision is not None and recall is not None and precision + recall > 0:
        f1 = 2 * precision * recall / (precision + recall)
    elif precision is not None and recall is not None:
        f1 = 0.0
    accuracy = (tp + tn) / len(pairs)
    return DetectionReport(precision=precision, recall=recall, f1=f1, accuracy=accuracy,
                           tp=tp, fp=fp, fn=fn, tn=tn, flags=flags)


def detection_report_from_records(records: list[ScoreRecord]) -> DetectionReport:
    if any(r.b_expert is None for r in records):
        raise ValueError("every record needs an expert binary label")
    return detection_report((r.b_expert, r.b_model) for r in records)


@dataclass
class SpeakerRow:
    speaker: str
    n: int
    precision: float | None
    recall: float | None
    f1: float | None
    accuracy: float
    kappa: float | None
    kappa_band: str | None
    kappa_flag: str | None
    confusion: dict

    def to_json(self) -> dict:
        return {"speaker": self.speaker, "n": self.n, "precision": self.precision,
                "recall": self.recall, "f1": self.f1, "accuracy": self.accuracy,
                "kappa": self.kappa, "kappa_band": self.kappa_band,
                "kappa_flag": self.kappa_flag, "confusion": self.confusion}


def per_speaker_report(records: list[ScoreRecord]) -> list[SpeakerRow]:
    """Detection metrics plus expert/model kappa for each speaker."""
    if not records:
        raise EmptyInputError("per-speaker report over an empty record set")
    by_speaker: dict[str, list[ScoreRecord]] = {}
    for r in records:
        by_speaker.setdefault(r.speaker, []).append(r)
    rows = []
    for speaker in sorted(by_speaker):
        group = by_speaker[speaker]
        rep = detection_report_from_records(group)
        expert = [r.b_expert for r in group]
        model = [r.b_model for r in group]
        kappa = band = flag = None
        try:
            res = cohen_kappa(expert, model)
            kappa, band = res.statistic, res.band
        except UndefinedStatisticError as exc:
            flag = exc.flag
        rows.append(SpeakerRow(speaker=speaker, n=len(group), precision=rep.precision,
                               recall=rep.recall, f1=rep.f1, accuracy=rep.accuracy,
                               kappa=kappa, kappa_band=band, kappa_flag=flag,
                               confusion=rep.confusion))
    return rows


def speaker_report_text(rows: list[SpeakerRow]) -> str:
    def fmt(v):
        return "  n/a" if v is None else f"{v:5.3f}"
    lines = [f"{'speaker':<12s}{'N':>5s}{'P':>7s}{'R':>7s}{'F1':>7s}{'acc':>7s}{'kappa':>8s}"]
    for r in rows:
        kappa = fmt(r.kappa) if r.kappa is not None else (r.kappa_flag or "n/a")
        lines.append(f"{r.speaker:<12s}{r.n:>5d}{fmt(r.precision):>7s}{fmt(r.recall):>7s}"
                     f"{fmt(r.f1):>7s}{r.accuracy:>7.3f}{kappa:>8s}")
    return "\n".join(lines)


@dataclass
class SweepResult:
    rows: list[dict]   # each: {"k", "precision", "recall", "f1", "accuracy"}

    def to_csv(self, path: Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["k", "precision", "recall", "f1", "accuracy"])
            for row in self.rows:
                writer.writerow([repr(row["k"])]
                                + ["" if row[f] is None else repr(row[f])
                                   for f in ("precision", "recall", "f1", "accuracy")])


def threshold_sweep(records: list[ScoreRecord], k_grid) -> SweepResult:
    """Re-binarize model scores at each threshold and tabulate detection metrics."""
    k_grid = list(k_grid)
    if not k_grid:
        raise ValueError("threshold grid is empty")
    if sorted(k_grid) != k_grid:
        raise ValueError("threshold grid must be sorted ascending")
    rows = []
    for k in k_grid:
        rep = detection_report((r.b_expert, binarize(r.s_m, k)) for r in records)
        rows.append({"k": float(k), "precision": rep.precision, "recall": rep.recall,
                     "f1": rep.f1, "accuracy": rep.accuracy})
    return SweepResult(rows=rows)


def report_to_json_text(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2) + "\n"
