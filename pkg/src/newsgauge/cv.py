"""Seeded stratified k-fold evaluation shared across all models.

The fold assignment is built once (per-class seeded shuffle, round-robin
deal) and reused for every model so scores stay comparable. Reports carry
a hash of the canonical fold-spec JSON; any consumer can verify it is
evaluating against the very same split.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

import numpy as np

from .forest import train_rf
from .models import GNB, LOGREG, RF, Dataset, ModelError, TrainConfig, predict_proba_matrix, train_gnb, train_logreg

METRIC_NAMES = ("accuracy", "precision", "recall", "f1", "roc_auc")


class EvalError(ValueError):
    """Raised for invalid folds, labels, or score inputs."""


@dataclass(frozen=True)
class FoldSpec:
    seed: int
    k: int
    assignment: tuple[int, ...]

    def test_indices(self, fold: int) -> np.ndarray:
        mask = np.asarray(self.assignment) == fold
        return np.nonzero(mask)[0]

    def train_indices(self, fold: int) -> np.ndarray:
        mask = np.asarray(self.assignment) != fold
        return np.nonzero(mask)[0]


@dataclass(frozen=True)
class MetricsReport:
    model_kind: str
    fold_spec_hash: str
    per_fold: tuple[dict[str, float], ...]
    mean: dict[str, float]
    std: dict[str, float]


def canonical_fold_json(spec: FoldSpec) -> str:
    """Canonical serialization; its sha256 is the cross-component contract."""
    payload = {"seed": spec.seed, "k": spec.k, "assignment": list(spec.assignment)}
    return json.dumps(payload, sort_keys=True, separators=(",", ":"))


def fold_spec_hash(spec: FoldSpec) -> str:
    return hashlib.sha256(canonical_fold_json(spec).encode("utf-8")).hexdigest()


def write_fold_spec(spec: FoldSpec, path: str | Path) -> None:
    Path(path).write_text(canonical_fold_json(spec) + "\n", encoding="utf-8")


def read_fold_spec(path: str | Path) -> FoldSpec:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return FoldSpec(int(payload["seed"]), int(payload["k"]), tuple(int(v) for v in payload["assignment"]))


def stratified_kfold(labels: Sequence[int], k: int, seed: int) -> FoldSpec:
    """Per-class seeded shuffle, then a round-robin deal into k folds."""
    y = np.asarray(labels)
    if k < 2:
        raise EvalError("k must be >= 2")
    rng = np.random.default_rng(seed)
    assignment = np.full(len(y), -1, dtype=np.int64)
    for cls in np.unique(y):
        rows = np.nonzero(y == cls)[0]
        if len(rows) < k:
            raise EvalError(f"class {cls!r} has {len(rows)} rows, fewer than k={k}")
        shuffled = rng.permutation(rows)
        for i, row in enumerate(shuffled):
            assignment[row] = i % k
    return FoldSpec(seed, k, tuple(int(a) for a in assignment))


def roc_auc(scores: Sequence[float], labels: Sequence[int]) -> float:
    """Mann-Whitney AUC with midranks for tied scores."""
    s = np.asarray(scores, dtype=np.float64)
    y = np.asarray(labels)
    if len(s) != len(y):
        raise EvalError("scores and labels differ in length")
    n_pos = int((y == 1).sum())
    n_neg = int((y == 0).sum())
    if n_pos == 0 or n_neg == 0:
        raise EvalError("ROC AUC needs both classes present")
    order = np.argsort(s, kind="mergesort")
    ranks = np.empty(len(s), dtype=np.float64)
    i = 0
    while i < len(s):
        j = i
        while j + 1 < len(s) and s[order[j + 1]] == s[order[i]]:
            j += 1
        ranks[order[i:j + 1]] = (i + j) / 2.0 + 1.0
        i = j + 1
    rank_sum = float(ranks[y == 1].sum())
    return (rank_sum - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg)


def confusion_metrics(pred: Sequence[int], labels: Sequence[int]) -> dict[str, float]:
    """Accuracy plus macro-averaged precision, recall, and F1."""
    p = np.asarray(pred)
    y = np.asarray(labels)
    if len(p) != len(y):
        raise EvalError("predictions and labels differ in length")
    if len(y) == 0:
        raise EvalError("cannot score an empty set")
    accuracy = float((p == y).mean())
    precisions, recalls, f1s = [], [], []
    for cls in (0, 1):
        tp = int(((p == cls) & (y == cls)).sum())
        fp = int(((p == cls) & (y != cls)).sum())
        fn = int(((p != cls) & (y == cls)).sum())
        precision = tp / (tp + fp) if tp + fp else 0.0
        recall = tp / (tp + fn) if tp + fn else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        precisions.append(precision)
        recalls.append(recall)
        f1s.append(f1)
    return {
        "accuracy": accuracy,
        "precision": float(np.mean(precisions)),
        "recall": float(np.mean(recalls)),
        "f1": float(np.mean(f1s)),
    }


def train_model(data: Dataset, cfg: TrainConfig, registry_version: str = "default-1"):
    if cfg.model_kind == GNB:
        return train_gnb(data, cfg, registry_version)
    if cfg.model_kind == LOGREG:
        return train_logreg(data, cfg, registry_version)
    if cfg.model_kind == RF:
        return train_rf(data, cfg, registry_version)
    raise ModelError(f"unknown model kind {cfg.model_kind!r}")


def cross_validate(
    data: Dataset, cfg: TrainConfig, spec: FoldSpec, registry_version: str = "default-1"
) -> MetricsReport:
    """Train on k-1 folds, score the held-out fold, aggregate mean and std."""
    if len(spec.assignment) != len(data.labels):
        raise EvalError("fold spec does not cover the dataset")
    per_fold: list[dict[str, float]] = []
    for fold in range(spec.k):
        train_rows = spec.train_indices(fold)
        test_rows = spec.test_indices(fold)
        train = Dataset(
            data.features[train_rows],
            data.labels[train_rows],
            tuple(data.row_ids[i] for i in train_rows),
        )
        try:
            model = train_model(train, cfg, registry_version)
        except Exception as exc:
            raise EvalError(f"fold {fold}: training failed ({exc})")
        proba = predict_proba_matrix(model, data.features[test_rows])
        pred = (proba > 0.5).astype(np.int64)
        y_test = data.labels[test_rows]
        metrics = confusion_metrics(pred, y_test)
        metrics["roc_auc"] = roc_auc(proba, y_test)
        per_fold.append({name: metrics[name] for name in METRIC_NAMES})
    mean = {name: float(np.mean([m[name] for m in per_fold])) for name in METRIC_NAMES}
    std = {name: float(np.std([m[name] for m in per_fold])) for name in METRIC_NAMES}
    return MetricsReport(cfg.model_kind, fold_spec_hash(spec), tuple(per_fold), mean, std)


def report_to_json(report: MetricsReport) -> str:
    payload = {
        "model_kind": report.model_kind,
        "fold_spec_hash": report.fold_spec_hash,
        "per_fold": list(report.per_fold),
        "mean": report.mean,
        "std": report.std,
    }
    return json.dumps(payload, sort_keys=True, indent=2) + "\n"


def report_from_json(text: str) -> MetricsReport:
    payload = json.loads(text)
    return MetricsReport(
        payload["model_kind"],
        payload["fold_spec_hash"],
        tuple(payload["per_fold"]),
        payload["mean"],
        payload["std"],
    )


_TABLE_HEADERS = {
    "accuracy": "Accuracy",
    "precision": "Precision",
    "recall": "Recall",
    "f1": "F1",
    "roc_auc": "ROC AUC",
}


def render_table(reports: Sequence[MetricsReport]) -> str:
    """Text table, one row per model, mean +/- std per metric."""
    header = ["Model"] + [_TABLE_HEADERS[name] for name in METRIC_NAMES]
    rows = [header]
    for report in reports:
        cells = [report.model_kind]
        for name in METRIC_NAMES:
            cells.append(f"{report.mean[name]:.4f} ± {report.std[name]:.4f}")
        rows.append(cells)
    widths = [max(len(row[i]) for row in rows) for i in range(len(header))]
    lines = []
    for i, row in enumerate(rows):
        lines.append("  ".join(cell.ljust(widths[j]) for j, cell in enumerate(row)).rstrip())
        if i == 0:
            lines.append("  ".join("-" * widths[j] for j in range(len(header))))
    return "\n".join(lines) + "\n"
