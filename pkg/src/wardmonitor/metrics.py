"""Evaluation helpers: regression errors, one-vs-rest confusion counts,
precision/recall/F1, balanced accuracy, and the chronological data split.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import errors
from .activity import ActivityDecision
from .domain import ActivityLabel

TRAIN_FRACTION = 0.8
MIN_SPLIT_SIZE = 5


def mae(pred, truth) -> float:
    p, t = _aligned(pred, truth)
    return float(np.mean(np.abs(p - t)))


def mse(pred, truth) -> float:
    p, t = _aligned(pred, truth)
    return float(np.mean((p - t) ** 2))


def _aligned(pred, truth) -> tuple[np.ndarray, np.ndarray]:
    p = np.asarray(pred, dtype=float)
    t = np.asarray(truth, dtype=float)
    if p.shape != t.shape:
        raise errors.DimensionMismatch(f"shapes differ: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise errors.DimensionMismatch("empty input")
    return p, t


@dataclass(frozen=True)
class LabelCounts:
    tp: int
    fp: int
    fn: int
    tn: int

    @property
    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    @property
    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    @property
    def f1(self) -> float:
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if (p + r) else 0.0


@dataclass(frozen=True)
class ConfusionCounts:
    """One-vs-rest tp/fp/fn/tn per label; totals conserved for each."""

    per_label: dict[ActivityLabel, LabelCounts]
    total: int


def _status(d) -> ActivityLabel:
    if isinstance(d, ActivityDecision):
        return d.current_status
    if isinstance(d, ActivityLabel):
        return d
    raise TypeError(f"expected a decision or label, got {type(d).__name__}")


def confusion(decisions, truths) -> ConfusionCounts:
    """Count one-vs-rest outcomes of current_status against truth."""
    predicted = [_status(d) for d in decisions]
    truths = list(truths)
    if len(predicted) != len(truths):
        raise errors.DimensionMismatch(
            f"{len(predicted)} decisions vs {len(truths)} truths"
        )
    if not truths:
        raise errors.DimensionMismatch("empty input")
    per_label = {}
    total = len(truths)
    for label in ActivityLabel:
        tp = sum(1 for p, t in zip(predicted, truths) if p is label and t is label)
        fp = sum(1 for p, t in zip(predicted, truths) if p is label and t is not label)
        fn = sum(1 for p, t in zip(predicted, truths) if p is not label and t is label)
        per_label[label] = LabelCounts(tp=tp, fp=fp, fn=fn, tn=total - tp - fp - fn)
    return ConfusionCounts(per_label=per_label, total=total)


def balanced_accuracy(decisions, truths) -> float:
    """Mean per-label recall over the labels present in the truth set."""
    counts = confusion(decisions, truths)
    present = {t for t in truths}
    recalls = [counts.per_label[label].recall for label in present]
    return float(np.mean(recalls))


def split(instances):
    """Chronological split: first 80% train, last 20% test, order kept."""
    items = list(instances)
    if len(items) < MIN_SPLIT_SIZE:
        raise errors.TooFewInstances(
            f"need at least {MIN_SPLIT_SIZE} instances, got {len(items)}"
        )
    cut = int(TRAIN_FRACTION * len(items))
    return items[:cut], items[cut:]


def save_metrics_csv(counts: ConfusionCounts, balanced_acc: float, path) -> None:
    """Metrics report: one row per label, then a balanced-accuracy row."""
    with open(path, "w") as fh:
        fh.write("label,tp,fp,fn,tn,precision,recall,f1\n")
        for label in ActivityLabel:
            c = counts.per_label[label]
            fh.write(
                f"{label.name},{c.tp},{c.fp},{c.fn},{c.tn},"
                f"{c.precision!r},{c.recall!r},{c.f1!r}\n"
            )
        fh.write(f"balanced_accuracy,{balanced_acc!r}\n")
