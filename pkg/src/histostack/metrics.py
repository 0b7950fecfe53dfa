"""Confusion matrices and the five quality metrics, per class and aggregate.

Rows of the confusion matrix are ground truth, columns are predictions.
Per-class metrics treat that class as positive one-vs-rest. Aggregate
accuracy is trace/total; the other four aggregate as the positive-class
values for binary problems and macro averages otherwise (the averaging mode
is recorded in the report so tables stay self-describing). A 0/0 ratio
defines the metric as 0 and flags it degenerate rather than raising.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from decimal import ROUND_HALF_UP, Decimal

import numpy as np

from .errors import BadLabel, ShapeError

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "specificity")


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # (k, k) int64, rows = truth, cols = predicted
    class_names: list[str]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_dict(self) -> dict:
        return {"counts": self.counts.tolist(), "class_names": list(self.class_names)}

    @classmethod
    def from_dict(cls, d: dict) -> "ConfusionMatrix":
        return cls(
            counts=np.asarray(d["counts"], dtype=np.int64),
            class_names=list(d["class_names"]),
        )

    def to_csv(self) -> str:
        lines = ["truth\\pred," + ",".join(self.class_names)]
        for name, row in zip(self.class_names, self.counts):
            lines.append(name + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"


@dataclass
class ClassMetrics:
    name: str
    tp: int
    tn: int
    fp: int
    fn: int
    accuracy: float
    precision: float
    recall: float
    f1: float
    specificity: float
    degenerate: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class MetricsReport:
    per_class: list[ClassMetrics]
    aggregate: dict[str, float]
    positive_class: str | None
    averaging: str  # "positive_class" for binary, "macro" otherwise

    def to_dict(self) -> dict:
        return {
            "per_class": [c.to_dict() for c in self.per_class],
            "aggregate": dict(self.aggregate),
            "positive_class": self.positive_class,
            "averaging": self.averaging,
        }


def round_percent(fraction: float, places: int = 2) -> float:
    """Half-up percentage rounding, e.g. 0.996377 -> 99.64."""
    q = Decimal(1).scaleb(-places)
    return float(Decimal(repr(fraction * 100.0)).quantize(q, rounding=ROUND_HALF_UP))


def format_percent(fraction: float) -> str:
    return f"{round_percent(fraction):.2f}%"


def confusion(y_true, y_pred, n_classes: int, class_names: list[str] | None = None) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape or y_true.ndim != 1:
        raise ShapeError(f"label vectors differ: {y_true.shape} vs {y_pred.shape}")
    for name, v in (("y_true", y_true), ("y_pred", y_pred)):
        if v.size and (v.min() < 0 or v.max() >= n_classes):
            raise BadLabel(f"{name} contains labels outside [0, {n_classes})")
    counts = np.zeros((n_classes, n_classes), dtype=np.int64)
    np.add.at(counts, (y_true, y_pred), 1)
    if class_names is None:
        class_names = [str(i) for i in range(n_classes)]
    if len(class_names) != n_classes:
        raise ShapeError(f"{len(class_names)} class names for {n_classes} classes")
    return ConfusionMatrix(counts=counts, class_names=list(class_names))


def _ratio(num: float, den: float, flag: str, degenerate: list[str]) -> float:
    if den == 0:
        degenerate.append(flag)
        return 0.0
    return num / den


def compute_metrics(cm: ConfusionMatrix, positive_class: str | None = None) -> MetricsReport:
    """Per-class one-vs-rest metrics plus the aggregate row.

    For binary matrices the aggregate equals the positive class's one-vs-rest
    values (default positive class: the second class name, which puts
    'malignant' positive for a sorted benign/malignant pair).
    """
    counts = cm.counts
    k = counts.shape[0]
    total = cm.total
    if total <= 0:
        raise ShapeError("confusion matrix is empty")
    per_class: list[ClassMetrics] = []
    for c in range(k):
        tp = int(counts[c, c])
        fn = int(counts[c].sum() - tp)
        fp = int(counts[:, c].sum() - tp)
        tn = total - tp - fn - fp
        degenerate: list[str] = []
        per_class.append(
            ClassMetrics(
                name=cm.class_names[c],
                tp=tp,
                tn=tn,
                fp=fp,
                fn=fn,
                accuracy=(tp + tn) / total,
                precision=_ratio(tp, tp + fp, "precision", degenerate),
                recall=_ratio(tp, tp + fn, "recall", degenerate),
                f1=_ratio(2 * tp, 2 * tp + fp + fn, "f1", degenerate),
                specificity=_ratio(tn, tn + fp, "specificity", degenerate),
                degenerate=degenerate,
            )
        )
    trace_accuracy = float(np.trace(counts)) / total
    if k == 2:
        if positive_class is None:
            positive_class = cm.class_names[1]
        if positive_class not in cm.class_names:
            raise BadLabel(f"positive class {positive_class!r} not in {cm.class_names}")
        pos = per_class[cm.class_names.index(positive_class)]
        aggregate = {
            "accuracy": trace_accuracy,
            "precision": pos.precision,
            "recall": pos.recall,
            "f1": pos.f1,
            "specificity": pos.specificity,
        }
        averaging = "positive_class"
    else:
        positive_class = None
        aggregate = {"accuracy": trace_accuracy}
        for metric in ("precision", "recall", "f1", "specificity"):
            aggregate[metric] = float(np.mean([getattr(c, metric) for c in per_class]))
        averaging = "macro"
    return MetricsReport(
        per_class=per_class,
        aggregate=aggregate,
        positive_class=positive_class,
        averaging=averaging,
    )
