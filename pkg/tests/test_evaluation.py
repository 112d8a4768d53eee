import json
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from revspam.evaluation import (
    ConfusionMatrix,
    MetricsReport,
    compare_models,
    comparison_csv,
    confusion,
    exact_metrics,
    format_table,
    metrics,
)


def reference(tp, fp, tn, fn):
    """The four ratios straight from their definitions, in rationals."""
    acc = Fraction(tp + tn, tp + tn + fp + fn)
    prec = Fraction(tp, tp + fp) if tp + fp else None
    rec = Fraction(tp, tp + fn) if tp + fn else None
    f1 = None
    if prec is not None and rec is not None and prec + rec:
        f1 = 2 * prec * rec / (prec + rec)
    return acc, prec, rec, f1


counts = st.integers(0, 10_000)


@given(counts, counts, counts, counts)
def test_exact_metrics_match_definitions(tp, fp, tn, fn):
    if tp + fp + tn + fn == 0:
        return
    cm = ConfusionMatrix(tp, fp, tn, fn)
    e = exact_metrics(cm)
    assert (e["accuracy"], e["precision"], e["recall"], e["f1"]) == reference(tp, fp, tn, fn)
    rep = metrics(cm)
    for got, want in zip((rep.accuracy, rep.precision, rep.recall, rep.f1),
                         reference(tp, fp, tn, fn)):
        assert got == (None if want is None else float(want))


def test_f1_is_2tp_over_2tp_fp_fn():
    cm = ConfusionMatrix(7, 3, 11, 5)
    assert exact_metrics(cm)["f1"] == Fraction(14, 22)


def test_confusion_threshold_inclusive():
    cm = confusion([0.5, 0.49, 0.9, 0.1], [1, 1, 0, 0])
    assert cm == ConfusionMatrix(tp=1, fp=1, tn=1, fn=1)
    with pytest.raises(ValueError):
        confusion([0.1], [1, 0])


def test_perfect_and_degenerate():
    perfect = metrics(confusion([1, 0, 1], [1, 0, 1]))
    assert (perfect.accuracy, perfect.precision, perfect.recall, perfect.f1) == (1, 1, 1, 1)
    none_pos = metrics(ConfusionMatrix(0, 0, 5, 0))
    assert none_pos.precision is None and none_pos.recall is None and none_pos.f1 is None
    assert json.loads(none_pos.to_json())["precision"] is None
    with pytest.raises(ValueError):
        exact_metrics(ConfusionMatrix(0, 0, 0, 0))


def test_report_roundtrip():
    rep = metrics(ConfusionMatrix(3, 1, 4, 2), "lr")
    assert MetricsReport.from_dict(json.loads(rep.to_json())) == rep


def test_comparison_sorted_by_accuracy():
    reps = [metrics(ConfusionMatrix(5, 5, 5, 5), "b"), metrics(ConfusionMatrix(9, 0, 9, 2), "a"),
            metrics(ConfusionMatrix(5, 5, 5, 5), "a2"), metrics(ConfusionMatrix(0, 0, 5, 5), "z")]
    table = compare_models(reps)
    assert [r["model"] for r in table] == ["a", "a2", "b", "z"]
    assert table[0]["accuracy"] == "90.00"
    assert table[-1]["precision"] == "NA"
    csv_text = comparison_csv(table)
    assert csv_text.splitlines()[0] == "model,accuracy,precision,recall,f1"
    assert "Accuracy" in format_table(table)
    with pytest.raises(ValueError):
        compare_models([])


def test_random_predictions_conserve_total():
    rng = np.random.default_rng(0)
    p, y = rng.random(500), rng.integers(0, 2, 500)
    cm = confusion(p, y)
    assert cm.total == 500 and cm.tp + cm.fn == y.sum()
