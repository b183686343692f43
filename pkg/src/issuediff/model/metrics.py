"""Classifier evaluation: ROC curve with trapezoid AUC, corner-threshold
selection, confusion counts, false-positive reduction rate, macro F1."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Dict, Optional, Tuple

import numpy as np

from ..errors import SingleClassEvalSet


@dataclass(frozen=True)
class ConfusionCounts:
    """Count vocabulary: gp/gn ground-truth positives/negatives, p/n
    predicted positives/negatives, tp/tn/fp/fn the four cells."""

    gp: int
    p: int
    tp: int
    gn: int
    n: int
    tn: int
    fp: int
    fn: int

    def __post_init__(self) -> None:
        checks = (
            ("gp = tp + fn", self.gp == self.tp + self.fn),
            ("gn = tn + fp", self.gn == self.tn + self.fp),
            ("p = tp + fp", self.p == self.tp + self.fp),
            ("n = tn + fn", self.n == self.tn + self.fn),
        )
        for label, ok in checks:
            if not ok:
                raise ValueError(f"inconsistent confusion counts: {label} violated")
        if min(self.gp, self.p, self.tp, self.gn, self.n, self.tn, self.fp, self.fn) < 0:
            raise ValueError("confusion counts must be non-negative")

    def to_dict(self) -> Dict[str, int]:
        return {
            "GP": self.gp,
            "P": self.p,
            "TP": self.tp,
            "GN": self.gn,
            "N": self.n,
            "TN": self.tn,
            "FP": self.fp,
            "FN": self.fn,
        }


def confusion_counts(scores, labels, threshold: float) -> ConfusionCounts:
    """Counts for the prediction rule score >= threshold."""
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    pred = scores >= threshold
    pos = labels == 1
    tp = int(np.count_nonzero(pred & pos))
    fp = int(np.count_nonzero(pred & ~pos))
    fn = int(np.count_nonzero(~pred & pos))
    tn = int(np.count_nonzero(~pred & ~pos))
    return ConfusionCounts(
        gp=tp + fn,
        p=tp + fp,
        tp=tp,
        gn=tn + fp,
        n=tn + fn,
        tn=tn,
        fp=fp,
        fn=fn,
    )


def fprr(counts: ConfusionCounts) -> Optional[float]:
    """False-positive reduction rate in percent; None when no ground-truth
    negatives exist."""
    if counts.gn == 0:
        return None
    return (counts.gn - counts.fp) / counts.gn * 100.0


def macro_f1(counts: ConfusionCounts) -> float:
    def f1(tp: int, predicted: int, actual: int) -> float:
        precision = tp / predicted if predicted else 0.0
        recall = tp / actual if actual else 0.0
        if precision + recall == 0.0:
            return 0.0
        return 2.0 * precision * recall / (precision + recall)

    return 0.5 * (
        f1(counts.tp, counts.p, counts.gp) + f1(counts.tn, counts.n, counts.gn)
    )


@dataclass(frozen=True)
class RocCurve:
    """Operating points in descending-threshold order, starting at
    (0,0,inf) and ending at (1,1,min score)."""

    points: Tuple[Tuple[float, float, float], ...]
    auc: float
    corner_threshold: float


def roc_auc(scores, labels) -> RocCurve:
    scores = np.asarray(scores, dtype=np.float64)
    labels = np.asarray(labels).astype(np.int64)
    gp = int(labels.sum())
    gn = len(labels) - gp
    if gp == 0 or gn == 0:
        raise SingleClassEvalSet(f"need both classes, got {gp} positives of {len(labels)}")
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    pos = (labels[order] == 1).astype(np.int64)
    cum_tp = np.cumsum(pos)
    cum_fp = np.cumsum(1 - pos)
    run_ends = np.append(np.nonzero(np.diff(s))[0], len(s) - 1)
    fprs = np.concatenate(([0.0], cum_fp[run_ends] / gn))
    tprs = np.concatenate(([0.0], cum_tp[run_ends] / gp))
    thresholds = np.concatenate(([math.inf], s[run_ends]))
    auc = float(np.sum(np.diff(fprs) * (tprs[1:] + tprs[:-1]) * 0.5))

    best_dist = math.inf
    corner = math.inf
    for f, t, thr in zip(fprs, tprs, thresholds):
        dist = math.sqrt(f * f + (1.0 - t) * (1.0 - t))
        if dist < best_dist:
            best_dist = dist
            corner = float(thr)
    points = tuple(
        (float(f), float(t), float(thr)) for f, t, thr in zip(fprs, tprs, thresholds)
    )
    return RocCurve(points=points, auc=auc, corner_threshold=corner)


@dataclass(frozen=True)
class EvalReport:
    counts: ConfusionCounts
    fprr: Optional[float]
    f1: float
    auc: Optional[float]
    threshold: float

    def to_dict(self) -> Dict:
        return {
            "counts": self.counts.to_dict(),
            "fprr": self.fprr,
            "f1": self.f1,
            "auc": self.auc,
            "threshold": self.threshold,
        }


def evaluate(scores, labels, threshold: float) -> EvalReport:
    """Threshold the scores and report counts, FPRR, macro F1, and AUC.

    AUC is None when the labels hold a single class (no curve exists);
    FPRR is None when there are no ground-truth negatives.
    """
    if not math.isfinite(threshold) and threshold != math.inf:
        raise ValueError(f"threshold must be finite or +inf, got {threshold}")
    counts = confusion_counts(scores, labels, threshold)
    try:
        auc: Optional[float] = roc_auc(scores, labels).auc
    except SingleClassEvalSet:
        auc = None
    return EvalReport(
        counts=counts,
        fprr=fprr(counts),
        f1=macro_f1(counts),
        auc=auc,
        threshold=threshold,
    )
