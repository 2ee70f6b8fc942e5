"""Evaluation metrics, implemented here so the harness stands alone.

Macro averaging over the two classes, zero denominators scored as 0, and
the midrank Mann-Whitney form of ROC-AUC: the same conventions the
upstream reports use, re-derived rather than imported.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "roc_auc")


def _safe_div(num: float, den: float) -> float:
    return num / den if den else 0.0


def confusion_metrics(pred: Sequence[int], labels: Sequence[int]) -> dict[str, float]:
    p = np.asarray(pred)
    y = np.asarray(labels)
    if p.shape != y.shape or p.ndim != 1 or not len(y):
        raise ValueError("pred and labels must be equal-length non-empty vectors")
    precisions, recalls, f1s = [], [], []
    for cls in (0, 1):
        tp = int(np.sum((p == cls) & (y == cls)))
        fp = int(np.sum((p == cls) & (y != cls)))
        fn = int(np.sum((p != cls) & (y == cls)))
        prec = _safe_div(tp, tp + fp)
        rec = _safe_div(tp, tp + fn)
        precisions.append(prec)
        recalls.append(rec)
        f1s.append(_safe_div(2.0 * prec * rec, prec + rec))
    return {
        "accuracy": float(np.mean(p == y)),
        "precision": float(np.mean(precisions)),
        "recall": float(np.mean(recalls)),
        "f1": float(np.mean(f1s)),
    }


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney estimator with midranks for tied scores."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    n_pos = int(np.sum(y == 1))
    n_neg = int(np.sum(y == 0))
    if not n_pos or not n_neg:
        raise ValueError("roc_auc needs both classes present")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(len(s), dtype=np.float64)
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[order[j + 1]] == s[order[i]]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    rank_sum = float(np.sum(ranks[y == 1]))
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def summarize(probs: Sequence[float], labels: Sequence[int]) -> dict[str, float]:
    """The five-metric dictionary for one validation pass."""
    probs = np.asarray(probs, dtype=np.float64)
    pred = (probs > 0.5).astype(int)
    out = confusion_metrics(pred, labels)
    out["roc_auc"] = roc_auc(probs, labels)
    return out
