"""CPU classifiers: Gaussian naive Bayes and logistic regression.

Both are deterministic. GNB stores per-class Gaussian moments with
variance smoothing; logistic regression standardizes features internally
and minimizes class-weighted logistic loss by full-batch gradient descent
with a backtracking line search. The random forest lives in forest.py.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, asdict
from pathlib import Path
from typing import Any

import numpy as np

from .labels import HIGH, LOW

GNB = "GNB"
LOGREG = "LOGREG"
RF = "RF"
MODEL_KINDS = (GNB, LOGREG, RF)

_FORMAT = "newsgauge-model"
_FORMAT_VERSION = 1


class ModelError(ValueError):
    """Raised for invalid datasets, configs, or model files."""


@dataclass(frozen=True)
class TrainConfig:
    model_kind: str
    rf_trees: int = 200
    rf_max_features: str = "sqrt"
    rf_bootstrap: bool = True
    logreg_max_iter: int = 1000
    logreg_lr: float = 1.0
    logreg_tol: float = 1e-6
    class_weight: str = "balanced"
    seed: int = 42
    gnb_var_smoothing: float = 1e-9

    def __post_init__(self) -> None:
        if self.model_kind not in MODEL_KINDS:
            raise ModelError(f"unknown model kind {self.model_kind!r}")
        if self.rf_trees < 1:
            raise ModelError("rf_trees must be >= 1")
        if self.logreg_max_iter < 1:
            raise ModelError("logreg_max_iter must be >= 1")
        if self.gnb_var_smoothing <= 0:
            raise ModelError("gnb_var_smoothing must be > 0")
        if self.class_weight not in ("balanced", "none"):
            raise ModelError(f"unknown class_weight {self.class_weight!r}")
        if self.rf_max_features != "sqrt":
            raise ModelError(f"unsupported rf_max_features {self.rf_max_features!r}")


@dataclass(frozen=True)
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    row_ids: tuple[str, ...]

    def __post_init__(self) -> None:
        X = np.asarray(self.features, dtype=np.float64)
        y = np.asarray(self.labels)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y.astype(np.int64))
        if X.ndim != 2:
            raise ModelError("features must be a 2-D matrix")
        if X.shape[0] != len(y) or X.shape[0] != len(self.row_ids):
            raise ModelError("features, labels and row_ids disagree on row count")
        if not np.all(np.isfinite(X)):
            raise ModelError("features contain non-finite values")
        if y.size and not np.isin(y, (0, 1)).all():
            raise ModelError("labels must be 0 (LOW) or 1 (HIGH)")


def _require_two_classes(y: np.ndarray) -> None:
    if len(y) < 2 or len(np.unique(y)) < 2:
        raise ModelError("training needs at least two rows with both classes present")


def class_weights(y: np.ndarray, scheme: str) -> np.ndarray:
    """Per-class weights: balanced gives n / (2 * n_c), none gives ones."""
    if scheme == "none":
        return np.ones(2)
    n = len(y)
    counts = np.bincount(y, minlength=2).astype(np.float64)
    with np.errstate(divide="ignore"):
        w = n / (2.0 * counts)
    return np.where(np.isfinite(w), w, 0.0)


@dataclass(frozen=True)
class GnbModel:
    kind: str
    priors: np.ndarray
    means: np.ndarray
    variances: np.ndarray
    registry_version: str
    config: TrainConfig

    @property
    def n_features(self) -> int:
        return self.means.shape[1]


@dataclass(frozen=True)
class LogregModel:
    kind: str
    weights: np.ndarray
    intercept: float
    feature_mean: np.ndarray
    feature_scale: np.ndarray
    n_iterations: int
    registry_version: str
    config: TrainConfig

    @property
    def n_features(self) -> int:
        return len(self.weights)


def train_gnb(data: Dataset, cfg: TrainConfig, registry_version: str = "default-1") -> GnbModel:
    """Per-class Gaussian moments with smoothed variances."""
    X, y = data.features, data.labels
    _require_two_classes(y)
    epsilon = cfg.gnb_var_smoothing * float(np.var(X, axis=0).max())
    means = np.empty((2, X.shape[1]))
    variances = np.empty((2, X.shape[1]))
    priors = np.empty(2)
    for c in (0, 1):
        rows = X[y == c]
        means[c] = rows.mean(axis=0)
        variances[c] = rows.var(axis=0) + epsilon
        priors[c] = len(rows) / len(y)
    if not np.all(variances > 0):
        raise ModelError("smoothed variances must be positive")
    return GnbModel(GNB, priors, means, variances, registry_version, cfg)


def _sigmoid(z: np.ndarray) -> np.ndarray:
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def _logistic_loss(Xs: np.ndarray, y: np.ndarray, s: np.ndarray, w: np.ndarray, b: float) -> float:
    z = Xs @ w + b
    # log(1 + e^z) - y z, stable in both tails
    per_row = np.logaddexp(0.0, z) - y * z
    return float(np.dot(s, per_row) / s.sum())


def _logistic_grad(
    Xs: np.ndarray, y: np.ndarray, s: np.ndarray, w: np.ndarray, b: float
) -> tuple[np.ndarray, float]:
    z = Xs @ w + b
    residual = s * (_sigmoid(z) - y)
    denom = s.sum()
    return Xs.T @ residual / denom, float(residual.sum() / denom)


def train_logreg(data: Dataset, cfg: TrainConfig, registry_version: str = "default-1") -> LogregModel:
    """Full-batch gradient descent with Armijo backtracking."""
    X, y = data.features, data.labels.astype(np.float64)
    _require_two_classes(data.labels)
    mean = X.mean(axis=0)
    scale = X.std(axis=0)
    scale = np.where(scale > 0, scale, 1.0)
    Xs = (X - mean) / scale
    per_class = class_weights(data.labels, cfg.class_weight)
    s = per_class[data.labels]

    w = np.zeros(X.shape[1])
    b = 0.0
    loss = _logistic_loss(Xs, y, s, w, b)
    iterations = 0
    for iterations in range(1, cfg.logreg_max_iter + 1):
        gw, gb = _logistic_grad(Xs, y, s, w, b)
        grad_sq = float(gw @ gw) + gb * gb
        if np.sqrt(grad_sq) < cfg.logreg_tol:
            iterations -= 1
            break
        step = cfg.logreg_lr
        for _ in range(60):
            cand_w = w - step * gw
            cand_b = b - step * gb
            cand_loss = _logistic_loss(Xs, y, s, cand_w, cand_b)
            if cand_loss <= loss - 1e-4 * step * grad_sq:
                break
            step *= 0.5
        if not np.isfinite(cand_loss):
            raise ModelError("logistic loss became non-finite, check feature scaling")
        if cand_loss > loss:
            break
        w, b, loss = cand_w, cand_b, cand_loss
    return LogregModel(LOGREG, w, b, mean, scale, iterations, registry_version, cfg)


def _check_matrix(model: Any, x: np.ndarray) -> np.ndarray:
    X = np.asarray(x, dtype=np.float64)
    single = X.ndim == 1
    if single:
        X = X[None, :]
    if X.ndim != 2 or X.shape[1] != model.n_features:
        raise ModelError(
            f"feature vector length {X.shape[-1]} does not match model ({model.n_features})"
        )
    return X


def _gnb_log_joint(model: GnbModel, X: np.ndarray) -> np.ndarray:
    out = np.empty((len(X), 2))
    for c in (0, 1):
        var = model.variances[c]
        diff = X - model.means[c]
        log_lik = -0.5 * (np.log(2.0 * np.pi * var) + diff * diff / var).sum(axis=1)
        out[:, c] = np.log(model.priors[c]) + log_lik
    return out


def predict_proba_matrix(model: Any, x: np.ndarray) -> np.ndarray:
    """Probability of HIGH for each row."""
    X = _check_matrix(model, np.asarray(x))
    if model.kind == GNB:
        joint = _gnb_log_joint(model, X)
        peak = joint.max(axis=1, keepdims=True)
        norm = peak[:, 0] + np.log(np.exp(joint - peak).sum(axis=1))
        return np.exp(joint[:, 1] - norm)
    if model.kind == LOGREG:
        Xs = (X - model.feature_mean) / model.feature_scale
        return _sigmoid(Xs @ model.weights + model.intercept)
    if model.kind == RF:
        from .forest import rf_predict_proba

        return rf_predict_proba(model, X)
    raise ModelError(f"unknown model kind {model.kind!r}")


def predict_proba(model: Any, x: np.ndarray) -> float:
    return float(predict_proba_matrix(model, np.asarray(x, dtype=np.float64).reshape(1, -1))[0])


def predict(model: Any, x: np.ndarray) -> str:
    """HIGH strictly above probability 0.5, ties go LOW."""
    return HIGH if predict_proba(model, x) > 0.5 else LOW


def _config_dict(cfg: TrainConfig) -> dict[str, Any]:
    return asdict(cfg)


def save_model(model: Any, path: str | Path) -> None:
    path = Path(path)
    if model.kind == RF:
        from .forest import save_forest

        save_forest(model, path)
        return
    payload: dict[str, Any] = {
        "format": _FORMAT,
        "format_version": _FORMAT_VERSION,
        "kind": model.kind,
        "registry_version": model.registry_version,
        "config": _config_dict(model.config),
    }
    if model.kind == GNB:
        payload["parameters"] = {
            "priors": model.priors.tolist(),
            "means": model.means.tolist(),
            "variances": model.variances.tolist(),
        }
    elif model.kind == LOGREG:
        payload["parameters"] = {
            "weights": model.weights.tolist(),
            "intercept": model.intercept,
            "feature_mean": model.feature_mean.tolist(),
            "feature_scale": model.feature_scale.tolist(),
            "n_iterations": model.n_iterations,
        }
    else:
        raise ModelError(f"cannot serialize model kind {model.kind!r}")
    path.write_text(json.dumps(payload, sort_keys=True) + "\n", encoding="utf-8")


def load_model(path: str | Path) -> Any:
    path = Path(path)
    head = path.open("rb").read(6)
    if head.startswith(b"NGRF"):
        from .forest import load_forest

        return load_forest(path)
    try:
        payload = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ModelError(f"{path.name}: not a model file ({exc})")
    if payload.get("format") != _FORMAT:
        raise ModelError(f"{path.name}: not a model file")
    cfg = TrainConfig(**payload["config"])
    params = payload["parameters"]
    kind = payload["kind"]
    if kind == GNB:
        return GnbModel(
            GNB,
            np.asarray(params["priors"]),
            np.asarray(params["means"]),
            np.asarray(params["variances"]),
            payload["registry_version"],
            cfg,
        )
    if kind == LOGREG:
        return LogregModel(
            LOGREG,
            np.asarray(params["weights"]),
            float(params["intercept"]),
            np.asarray(params["feature_mean"]),
            np.asarray(params["feature_scale"]),
            int(params["n_iterations"]),
            payload["registry_version"],
            cfg,
        )
    raise ModelError(f"{path.name}: unknown model kind {kind!r}")
