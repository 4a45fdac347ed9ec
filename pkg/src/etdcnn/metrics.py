"""Confusion matrix, precision/recall/F1/accuracy and ROC AUC.

By default Normal is the positive class, so a matrix laid out as

    actual \\ detected   Normal   Theft
    Normal               tp       fn
    Theft                fp       tn

Reports always carry the theft-as-positive view as well.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numpy as np

from .dataset import Label


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int
    fn: int
    fp: int
    tn: int
    positive_class: Label = Label.NORMAL

    def __post_init__(self):
        if min(self.tp, self.fn, self.fp, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fn + self.fp + self.tn

    def flipped(self) -> "ConfusionMatrix":
        other = Label.THEFT if self.positive_class == Label.NORMAL else Label.NORMAL
        return ConfusionMatrix(self.tn, self.fp, self.fn, self.tp, other)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["positive_class"] = self.positive_class.name.lower()
        return d


def _labels(seq) -> np.ndarray:
    return np.array([int(Label.parse(v)) for v in seq], dtype=np.int64)


def confusion(y_true, y_pred, positive_class=Label.NORMAL) -> ConfusionMatrix:
    yt, yp = _labels(y_true), _labels(y_pred)
    if yt.size != yp.size:
        raise ValueError(f"length mismatch: {yt.size} true labels vs {yp.size} predictions")
    if yt.size == 0:
        raise ValueError("need at least one sample")
    pos = int(Label.parse(positive_class))
    t, p = yt == pos, yp == pos
    return ConfusionMatrix(
        tp=int(np.sum(t & p)),
        fn=int(np.sum(t & ~p)),
        fp=int(np.sum(~t & p)),
        tn=int(np.sum(~t & ~p)),
        positive_class=Label.parse(positive_class),
    )


def f1_from(precision: float, recall: float) -> float:
    s = precision + recall
    return 2.0 * precision * recall / s if s > 0 else 0.0


def prf_accuracy(cm: ConfusionMatrix) -> tuple[float, float, float, float]:
    """(precision, recall, f1, accuracy); zero denominators give 0."""
    if cm.total == 0:
        raise ValueError("empty confusion matrix")
    precision = cm.tp / (cm.tp + cm.fp) if cm.tp + cm.fp else 0.0
    recall = cm.tp / (cm.tp + cm.fn) if cm.tp + cm.fn else 0.0
    return precision, recall, f1_from(precision, recall), (cm.tp + cm.tn) / cm.total


def roc_curve(scores, y_true, positive_class=Label.THEFT) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """ROC points (fpr, tpr, thresholds), one per distinct score, starting at (0, 0).

    Higher scores mean "more likely ``positive_class``".
    """
    s = np.asarray(scores, dtype=np.float64).reshape(-1)
    pos = _labels(y_true) == int(Label.parse(positive_class))
    if s.size != pos.size:
        raise ValueError("scores and labels differ in length")
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    if n_pos == 0 or n_neg == 0:
        raise ValueError("ROC AUC is undefined unless both classes are present")
    order = np.argsort(-s, kind="mergesort")
    s, pos = s[order], pos[order]
    # last index of each run of equal scores
    ends = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tps = np.cumsum(pos)[ends]
    fps = (ends + 1) - tps
    tpr = np.r_[0.0, tps / n_pos]
    fpr = np.r_[0.0, fps / n_neg]
    thresholds = np.r_[np.inf, s[ends]]
    return fpr, tpr, thresholds


def roc_auc(scores, y_true, positive_class=Label.THEFT) -> float:
    fpr, tpr, _ = roc_curve(scores, y_true, positive_class)
    return float(np.sum(np.diff(fpr) * (tpr[1:] + tpr[:-1]) / 2.0))


@dataclass(frozen=True)
class OrientedReport:
    matrix: ConfusionMatrix
    precision: float
    recall: float
    f1: float
    accuracy: float

    @classmethod
    def from_matrix(cls, cm: ConfusionMatrix) -> "OrientedReport":
        return cls(cm, *prf_accuracy(cm))

    def to_dict(self) -> dict:
        return {
            "confusion": self.matrix.to_dict(),
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "accuracy": self.accuracy,
        }


@dataclass(frozen=True)
class MetricsReport:
    primary: OrientedReport
    other: OrientedReport
    auc: float

    @property
    def matrix(self) -> ConfusionMatrix:
        return self.primary.matrix

    @property
    def precision(self) -> float:
        return self.primary.precision

    @property
    def recall(self) -> float:
        return self.primary.recall

    @property
    def f1(self) -> float:
        return self.primary.f1

    @property
    def accuracy(self) -> float:
        return self.primary.accuracy

    def oriented(self, positive_class) -> OrientedReport:
        label = Label.parse(positive_class)
        return self.primary if self.primary.matrix.positive_class == label else self.other

    def to_dict(self) -> dict:
        return {
            "positive_class": self.primary.matrix.positive_class.name.lower(),
            "auc": self.auc,
            **self.primary.to_dict(),
            "other_orientation": self.other.to_dict(),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n"


def evaluate(y_true, y_pred, theft_scores, positive_class=Label.NORMAL) -> MetricsReport:
    """Full report. ``theft_scores`` are higher for more theft-like samples."""
    cm = confusion(y_true, y_pred, positive_class)
    auc = roc_auc(theft_scores, y_true, Label.THEFT)
    return MetricsReport(OrientedReport.from_matrix(cm), OrientedReport.from_matrix(cm.flipped()), auc)


def write_roc_csv(path, scores, y_true, positive_class=Label.THEFT) -> None:
    fpr, tpr, _ = roc_curve(scores, y_true, positive_class)
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["fpr", "tpr"])
        w.writerows(zip(map(repr, fpr.tolist()), map(repr, tpr.tolist())))
