"""Two-class evaluation: per-class precision/recall/F1, macro averages, accuracy."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class Metrics:
    """Evaluation summary over the cooperative (+1) and adversarial (-1) classes."""

    positive: ClassMetrics
    negative: ClassMetrics
    macro_precision: float
    macro_recall: float
    macro_f1: float
    accuracy: float

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "macro_recall": self.macro_recall,
            "macro_f1": self.macro_f1,
            "positive": vars(self.positive).copy(),
            "negative": vars(self.negative).copy(),
        }


def _safe_div(num, den) -> float:
    return num / den if den else 0.0  # 0/0 convention


def _class_metrics(pred, gold, label) -> ClassMetrics:
    tp = int(np.sum((pred == label) & (gold == label)))
    fp = int(np.sum((pred == label) & (gold != label)))
    fn = int(np.sum((pred != label) & (gold == label)))
    precision = _safe_div(tp, tp + fp)
    recall = _safe_div(tp, tp + fn)
    f1 = _safe_div(2 * precision * recall, precision + recall)
    return ClassMetrics(precision, recall, f1, int(np.sum(gold == label)))


def evaluate(predictions, gold) -> Metrics:
    """Score +1/-1 predictions against gold labels.

    Macro averages are the unweighted mean over the two classes; empty
    denominators count as zero.
    """
    pred = np.asarray(predictions).reshape(-1)
    truth = np.asarray(gold).reshape(-1)
    if pred.size != truth.size:
        raise ValueError(f"{pred.size} predictions for {truth.size} gold labels")
    if pred.size == 0:
        raise ValueError("nothing to evaluate")
    for arr, name in ((pred, "predictions"), (truth, "gold")):
        if not np.all(np.isin(arr, (-1, 1))):
            raise ValueError(f"{name} must be +1 or -1")

    pos = _class_metrics(pred, truth, 1)
    neg = _class_metrics(pred, truth, -1)
    return Metrics(
        positive=pos,
        negative=neg,
        macro_precision=(pos.precision + neg.precision) / 2,
        macro_recall=(pos.recall + neg.recall) / 2,
        macro_f1=(pos.f1 + neg.f1) / 2,
        accuracy=float(np.mean(pred == truth)),
    )


def format_metrics(metrics: Metrics) -> str:
    """Human-readable table."""
    rows = [
        ("class", "precision", "recall", "f1", "support"),
        ("+1 cooperative", f"{metrics.positive.precision:.3f}", f"{metrics.positive.recall:.3f}",
         f"{metrics.positive.f1:.3f}", str(metrics.positive.support)),
        ("-1 adversarial", f"{metrics.negative.precision:.3f}", f"{metrics.negative.recall:.3f}",
         f"{metrics.negative.f1:.3f}", str(metrics.negative.support)),
        ("macro", f"{metrics.macro_precision:.3f}", f"{metrics.macro_recall:.3f}",
         f"{metrics.macro_f1:.3f}", str(metrics.positive.support + metrics.negative.support)),
    ]
    widths = [max(len(r[c]) for r in rows) for c in range(5)]
    lines = ["  ".join(cell.ljust(w) for cell, w in zip(row, widths)) for row in rows]
    lines.append(f"accuracy  {metrics.accuracy:.3f}")
    return "\n".join(lines)
