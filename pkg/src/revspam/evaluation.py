"""Confusion counts, accuracy/precision/recall/F1 and model comparison tables."""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

# undefined metrics (zero denominators) are reported as None / JSON null
UNDEFINED = None
CSV_UNDEFINED = "NA"
TABLE_COLUMNS = ("model", "accuracy", "precision", "recall", "f1")


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fp: int
    tn: int
    fn: int

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.tn + self.fn

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "tn": self.tn, "fn": self.fn}


def confusion(predictions: Sequence[float], labels: Sequence[int], threshold: float = 0.5,
              ) -> ConfusionMatrix:
    """Count outcomes; a score equal to ``threshold`` is predicted positive.

    ``labels`` use the detection orientation (1 = spam).
    """
    p = np.asarray(predictions, dtype=np.float64)
    y = np.asarray(labels)
    if p.shape != y.shape:
        raise ValueError(f"length mismatch: {p.size} predictions, {y.size} labels")
    pos = p >= threshold
    actual = y == 1
    return ConfusionMatrix(tp=int(np.sum(pos & actual)), fp=int(np.sum(pos & ~actual)),
                           tn=int(np.sum(~pos & ~actual)), fn=int(np.sum(~pos & actual)))


@dataclass(frozen=True)
class MetricsReport:
    model_name: str
    accuracy: float | None
    precision: float | None
    recall: float | None
    f1: float | None
    confusion: ConfusionMatrix | None = None

    def to_dict(self) -> dict:
        d = {"model": self.model_name, "accuracy": self.accuracy, "precision": self.precision,
             "recall": self.recall, "f1": self.f1}
        if self.confusion is not None:
            d["confusion"] = self.confusion.to_dict()
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        cm = ConfusionMatrix(**d["confusion"]) if d.get("confusion") else None
        return cls(d["model"], d["accuracy"], d["precision"], d["recall"], d["f1"], cm)


def _ratio(num: int, den: int) -> Fraction | None:
    return Fraction(num, den) if den else UNDEFINED


def exact_metrics(cm: ConfusionMatrix) -> dict[str, Fraction | None]:
    """Accuracy, precision, recall and F1 as exact fractions (None if undefined)."""
    if cm.total < 1:
        raise ValueError("confusion matrix is empty")
    accuracy = _ratio(cm.tp + cm.tn, cm.total)
    precision = _ratio(cm.tp, cm.tp + cm.fp)
    recall = _ratio(cm.tp, cm.tp + cm.fn)
    if precision is None or recall is None or precision + recall == 0:
        f1 = UNDEFINED
    else:
        f1 = 2 * (precision * recall) / (precision + recall)
    return {"accuracy": accuracy, "precision": precision, "recall": recall, "f1": f1}


def metrics(cm: ConfusionMatrix, model_name: str = "") -> MetricsReport:
    exact = exact_metrics(cm)
    as_float = {k: (None if v is None else float(v)) for k, v in exact.items()}
    return MetricsReport(model_name, confusion=cm, **as_float)


def _pct(x: float | None) -> str:
    return CSV_UNDEFINED if x is None else f"{100 * x:.2f}"


def compare_models(reports: Sequence[MetricsReport]) -> list[dict]:
    """Table rows sorted by accuracy (descending), then model name.

    Metric cells are percentage strings with two decimals.
    """
    if not reports:
        raise ValueError("no reports to compare")
    ordered = sorted(reports, key=lambda r: (-(r.accuracy if r.accuracy is not None else -1.0),
                                             r.model_name))
    return [{"model": r.model_name, "accuracy": _pct(r.accuracy), "precision": _pct(r.precision),
             "recall": _pct(r.recall), "f1": _pct(r.f1)} for r in ordered]


def comparison_csv(table: Sequence[dict]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=TABLE_COLUMNS, lineterminator="\n")
    w.writeheader()
    w.writerows(table)
    return buf.getvalue()


def format_table(table: Sequence[dict]) -> str:
    """Fixed-width text rendering for terminals."""
    lines = [f"{'Model':<8}{'Accuracy':>10}{'Precision':>11}{'Recall':>9}{'F1':>9}"]
    for row in table:
        lines.append(f"{row['model']:<8}{row['accuracy']:>10}{row['precision']:>11}"
                     f"{row['recall']:>9}{row['f1']:>9}")
    return "\n".join(lines)
