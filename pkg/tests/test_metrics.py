import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from etdcnn.dataset import Label
from etdcnn.metrics import (
    ConfusionMatrix,
    confusion,
    evaluate,
    f1_from,
    prf_accuracy,
    roc_auc,
    roc_curve,
    write_roc_csv,
)

from oracles import pair_auc

# reference confusion table, Normal as the positive row
REFERENCE_CM = ConfusionMatrix(tp=11536, fn=140, fp=109, tn=1085)


def test_confusion_counts_and_orientation():
    y_true = [0, 0, 0, 1, 1, 0]
    y_pred = [0, 1, 0, 1, 0, 0]
    cm = confusion(y_true, y_pred)
    assert (cm.tp, cm.fn, cm.fp, cm.tn) == (3, 1, 1, 1)
    flipped = confusion(y_true, y_pred, Label.THEFT)
    assert (flipped.tp, flipped.fn, flipped.fp, flipped.tn) == (cm.tn, cm.fp, cm.fn, cm.tp)
    assert cm.flipped() == flipped


def test_confusion_perfect_and_mismatch():
    cm = confusion([0, 1, 1], [0, 1, 1])
    assert cm.fn == cm.fp == 0
    with pytest.raises(ValueError):
        confusion([0, 1], [0])


def test_reference_table_values():
    assert REFERENCE_CM.total == 12870
    p, r, f1, acc = prf_accuracy(REFERENCE_CM)
    assert p == pytest.approx(11536 / 11645)
    assert r == pytest.approx(11536 / 11676)
    assert (round(p, 5), round(r, 5), round(f1, 5), round(acc, 5)) == (0.99064, 0.98801, 0.98932, 0.98065)
    assert round(f1, 3) == 0.989 and round(acc, 3) == 0.981


def test_f1_from_precision_recall_pair():
    f1 = f1_from(0.988, 0.990)
    assert abs(f1 - 0.98899) < 1e-5 and round(f1, 3) == 0.989
    assert f1_from(0.990, 0.988) == f1_from(0.988, 0.990)


def test_zero_denominators():
    # every prediction Theft while positive class Normal is absent from the truth
    cm = confusion([1, 1, 1], [1, 1, 1], Label.NORMAL)
    assert prf_accuracy(cm)[:3] == (0.0, 0.0, 0.0)
    with pytest.raises(ValueError):
        prf_accuracy(ConfusionMatrix(0, 0, 0, 0))


@pytest.mark.parametrize(
    "scores, y, want",
    [
        ([0.9, 0.1], [1, 0], 1.0),
        ([0.3] * 6, [1, 0, 1, 0, 0, 1], 0.5),
        ([0.8, 0.4, 0.6, 0.2], [1, 1, 0, 0], 0.75),
    ],
)
def test_auc_examples(scores, y, want):
    assert roc_auc(scores, y) == pytest.approx(want, abs=1e-15)
    assert pair_auc(scores, [v == 1 for v in y]) == pytest.approx(want)


def test_auc_single_class():
    with pytest.raises(ValueError, match="undefined"):
        roc_auc([0.1, 0.2], [1, 1])


@st.composite
def scores_labels(draw):
    n = draw(st.integers(2, 200))
    seed = draw(st.integers(0, 2**32 - 1))
    rng = np.random.default_rng(seed)
    # coarse grids force plenty of tied scores
    levels = draw(st.sampled_from([3, 11, 0]))
    s = rng.integers(0, levels, n) / levels if levels else rng.uniform(0, 1, n)
    y = rng.integers(0, 2, n)
    y[0], y[1] = 0, 1
    return s.tolist(), y.tolist()


@settings(max_examples=100, deadline=None)
@given(scores_labels())
def test_auc_equals_pair_count(data):
    s, y = data
    assert abs(roc_auc(s, y) - pair_auc(s, [v == 1 for v in y])) < 1e-9


@settings(max_examples=60, deadline=None)
@given(scores_labels())
def test_auc_monotone_invariance_and_complement(data):
    s, y = data
    s = np.asarray(s)
    base = roc_auc(s, y)
    assert abs(roc_auc(np.exp(3 * s) + 2, y) - base) < 1e-12
    assert abs(roc_auc(-s, y) + base - 1.0) < 1e-12


def test_roc_curve_endpoints():
    fpr, tpr, thr = roc_curve([0.1, 0.4, 0.35, 0.8], [0, 0, 1, 1])
    assert (fpr[0], tpr[0], fpr[-1], tpr[-1]) == (0, 0, 1, 1)
    assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)
    assert thr[0] == np.inf


def test_evaluate_report_and_exports(tmp_path):
    y = [0, 0, 1, 1, 0]
    pred = [0, 1, 1, 1, 0]
    scores = [0.1, 0.7, 0.9, 0.8, 0.2]
    rep = evaluate(y, pred, scores)
    assert rep.matrix.positive_class is Label.NORMAL
    assert rep.oriented("theft").matrix == rep.matrix.flipped()
    assert rep.auc == 1.0
    d = json.loads(rep.to_json())
    assert d["positive_class"] == "normal" and d["other_orientation"]["confusion"]["positive_class"] == "theft"
    path = tmp_path / "roc.csv"
    write_roc_csv(path, scores, y)
    rows = path.read_text().splitlines()
    assert rows[0] == "fpr,tpr" and rows[1] == "0.0,0.0" and rows[-1] == "1.0,1.0"
