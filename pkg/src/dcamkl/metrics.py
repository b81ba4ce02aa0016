"""Binary classification evaluation: accuracy, ROC curve, trapezoidal AUC."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .dataset import LabelVector
from .errors import ValidationError


@dataclass(frozen=True)
class ConfusionCounts:
    tp: int
    tn: int
    fp: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.tn + self.fp + self.fn


@dataclass(frozen=True)
class RocCurve:
    """Operating points (fpr, tpr) from (0,0) to (1,1) with trapezoidal AUC."""

    points: tuple[tuple[float, float], ...]
    auc: float


def confusion(predicted, truth) -> ConfusionCounts:
    """Tally a prediction vector against ground truth (+1 positive)."""
    pred = np.asarray(getattr(predicted, "labels", predicted))
    true = np.asarray(getattr(truth, "labels", truth))
    if pred.shape != true.shape:
        raise ValidationError("prediction/truth length mismatch")
    return ConfusionCounts(
        tp=int(((pred == 1) & (true == 1)).sum()),
        tn=int(((pred == -1) & (true == -1)).sum()),
        fp=int(((pred == 1) & (true == -1)).sum()),
        fn=int(((pred == -1) & (true == 1)).sum()),
    )


def accuracy(counts: ConfusionCounts) -> float:
    """Fraction of correctly classified samples."""
    if counts.total == 0:
        raise ValidationError("cannot compute accuracy of zero samples")
    return (counts.tp + counts.tn) / counts.total


def roc(scores, labels) -> RocCurve:
    """ROC curve thresholded at each distinct score (descending); tied scores
    advance as one step, giving diagonal segments and half credit for ties."""
    s = np.asarray(getattr(scores, "values", scores), dtype=np.float64).ravel()
    y = np.asarray(getattr(labels, "labels", labels))
    if s.shape != y.shape:
        raise ValidationError("scores/labels length mismatch")
    n_pos = int((y == 1).sum())
    n_neg = int((y == -1).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValidationError("ROC needs both classes present")

    order = np.argsort(-s, kind="stable")
    s_sorted = s[order]
    y_sorted = y[order]

    points = [(0.0, 0.0)]
    tp = fp = 0
    i = 0
    n = s.shape[0]
    while i < n:
        j = i
        while j < n and s_sorted[j] == s_sorted[i]:
            j += 1
        tp += int((y_sorted[i:j] == 1).sum())
        fp += int((y_sorted[i:j] == -1).sum())
        points.append((fp / n_neg, tp / n_pos))
        i = j
    if points[-1] != (1.0, 1.0):
        points.append((1.0, 1.0))

    auc = 0.0
    for (x0, y0), (x1, y1) in zip(points, points[1:]):
        auc += (x1 - x0) * (y0 + y1) / 2.0
    return RocCurve(points=tuple(points), auc=float(auc))


@dataclass(frozen=True)
class EvaluationReport:
    acc: float
    auc: float
    roc: RocCurve
    counts: ConfusionCounts


def evaluate(predicted, scores, truth: LabelVector) -> EvaluationReport:
    """Aggregate accuracy, ROC and AUC for one prediction run."""
    counts = confusion(predicted, truth)
    curve = roc(scores, truth)
    return EvaluationReport(acc=accuracy(counts), auc=curve.auc,
                            roc=curve, counts=counts)


def save_roc_csv(curve: RocCurve, path):
    with open(str(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["fpr", "tpr"])
        for fpr, tpr in curve.points:
            writer.writerow([repr(float(fpr)), repr(float(tpr))])


def report_to_dict(report: EvaluationReport) -> dict:
    return {
        "acc": report.acc,
        "auc": report.auc,
        "counts": {"tp": report.counts.tp, "tn": report.counts.tn,
                   "fp": report.counts.fp, "fn": report.counts.fn},
    }
