"""Random forest built from CART trees with class-weighted Gini splits.

Determinism is the whole point: each tree draws its bootstrap sample and
per-node feature subsets from its own rng seeded as seed XOR tree index,
so serial and parallel training produce identical forests. Numeric ties
in the split search go to the lowest feature index, then the lowest
threshold.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .models import RF, Dataset, ModelError, TrainConfig, _require_two_classes, class_weights

_MAGIC = b"NGRF0001"
_LEAF = -1


@dataclass(frozen=True)
class Tree:
    """Flat node arrays; feature = -1 marks a leaf carrying p(HIGH)."""

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)


@dataclass(frozen=True)
class RfModel:
    kind: str
    trees: tuple[Tree, ...]
    n_features: int
    registry_version: str
    config: TrainConfig


class _TreeBuilder:
    def __init__(self, X: np.ndarray, y: np.ndarray, sample_weight: np.ndarray,
                 n_candidates: int, rng: np.random.Generator) -> None:
        self.X = X
        self.y = y
        self.w0 = np.where(y == 0, sample_weight, 0.0)
        self.w1 = np.where(y == 1, sample_weight, 0.0)
        self.n_candidates = n_candidates
        self.rng = rng
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []

    def _new_node(self) -> int:
        self.feature.append(_LEAF)
        self.threshold.append(math.nan)
        self.left.append(_LEAF)
        self.right.append(_LEAF)
        self.value.append(0.0)
        return len(self.feature) - 1

    def _leaf_value(self, idx: np.ndarray) -> float:
        w0 = self.w0[idx].sum()
        w1 = self.w1[idx].sum()
        total = w0 + w1
        return float(w1 / total) if total > 0 else 0.0

    def _best_split(self, idx: np.ndarray) -> tuple[int, float] | None:
        n_total = self.X.shape[1]
        feats = self.rng.choice(n_total, size=min(self.n_candidates, n_total), replace=False)
        best_impurity = math.inf
        best: tuple[int, float] | None = None
        for f in sorted(int(f) for f in feats):
            vals = self.X[idx, f]
            order = np.argsort(vals, kind="stable")
            sv = vals[order]
            cuts = np.nonzero(sv[:-1] < sv[1:])[0]
            if len(cuts) == 0:
                continue
            cw0 = np.cumsum(self.w0[idx][order])
            cw1 = np.cumsum(self.w1[idx][order])
            total0, total1 = cw0[-1], cw1[-1]
            total = total0 + total1
            l0, l1 = cw0[cuts], cw1[cuts]
            r0, r1 = total0 - l0, total1 - l1
            wl, wr = l0 + l1, r0 + r1
            gini_l = 1.0 - (l0 / wl) ** 2 - (l1 / wl) ** 2
            gini_r = 1.0 - (r0 / wr) ** 2 - (r1 / wr) ** 2
            impurity = (wl * gini_l + wr * gini_r) / total
            k = int(np.argmin(impurity))
            if impurity[k] < best_impurity:
                best_impurity = float(impurity[k])
                cut = cuts[k]
                best = (f, float((sv[cut] + sv[cut + 1]) / 2.0))
        return best

    def build(self, idx: np.ndarray) -> int:
        root = self._new_node()
        stack = [(root, idx)]
        while stack:
            node, node_idx = stack.pop()
            labels = self.y[node_idx]
            if len(node_idx) < 2 or labels.min() == labels.max():
                self.value[node] = self._leaf_value(node_idx)
                continue
            split = self._best_split(node_idx)
            if split is None:
                self.value[node] = self._leaf_value(node_idx)
                continue
            f, thr = split
            go_left = self.X[node_idx, f] <= thr
            self.feature[node] = f
            self.threshold[node] = thr
            left = self._new_node()
            right = self._new_node()
            self.left[node] = left
            self.right[node] = right
            # Right pushed first so the left child is expanded next; rng
            # draws therefore follow depth-first left-to-right order.
            stack.append((right, node_idx[~go_left]))
            stack.append((left, node_idx[go_left]))
        return root

    def to_tree(self) -> Tree:
        return Tree(
            np.asarray(self.feature, dtype=np.int32),
            np.asarray(self.threshold, dtype=np.float64),
            np.asarray(self.left, dtype=np.int32),
            np.asarray(self.right, dtype=np.int32),
            np.asarray(self.value, dtype=np.float64),
        )


def _train_tree(X: np.ndarray, y: np.ndarray, base_weight: np.ndarray,
                n_candidates: int, cfg: TrainConfig, tree_index: int) -> Tree:
    rng = np.random.default_rng(cfg.seed ^ tree_index)
    if cfg.rf_bootstrap:
        idx = np.sort(rng.integers(0, len(y), size=len(y)))
    else:
        idx = np.arange(len(y))
    builder = _TreeBuilder(X, y, base_weight, n_candidates, rng)
    builder.build(idx)
    return builder.to_tree()


def train_rf(
    data: Dataset, cfg: TrainConfig, registry_version: str = "default-1", n_jobs: int = 1
) -> RfModel:
    """Seeded bootstrap forest; sqrt-of-d features tried per node.

    n_jobs is a concurrency hint only: every tree derives its own rng from
    seed XOR tree index, so any worker count yields the identical forest.
    """
    X, y = data.features, data.labels
    _require_two_classes(y)
    n, d = X.shape
    n_candidates = max(1, int(math.isqrt(d)))
    per_class = class_weights(y, cfg.class_weight)
    base_weight = per_class[y]
    indices = range(cfg.rf_trees)
    if n_jobs != 1:
        from concurrent.futures import ThreadPoolExecutor

        workers = n_jobs if n_jobs > 0 else None
        with ThreadPoolExecutor(max_workers=workers) as pool:
            trees = list(pool.map(
                lambda i: _train_tree(X, y, base_weight, n_candidates, cfg, i), indices
            ))
    else:
        trees = [_train_tree(X, y, base_weight, n_candidates, cfg, i) for i in indices]
    return RfModel(RF, tuple(trees), d, registry_version, cfg)


def _tree_predict(tree: Tree, X: np.ndarray) -> np.ndarray:
    node = np.zeros(len(X), dtype=np.int32)
    rows = np.arange(len(X))
    while True:
        mask = tree.feature[node[rows]] >= 0
        rows = rows[mask]
        if len(rows) == 0:
            break
        cur = node[rows]
        go_left = X[rows, tree.feature[cur]] <= tree.threshold[cur]
        node[rows] = np.where(go_left, tree.left[cur], tree.right[cur])
    return tree.value[node]


def rf_predict_proba(model: RfModel, X: np.ndarray) -> np.ndarray:
    """Mean of per-tree class-probability votes."""
    total = np.zeros(len(X))
    for tree in model.trees:
        total += _tree_predict(tree, X)
    return total / len(model.trees)


def save_forest(model: RfModel, path: str | Path) -> None:
    from .models import _config_dict

    header = {
        "format": "newsgauge-forest",
        "format_version": 1,
        "kind": RF,
        "registry_version": model.registry_version,
        "config": _config_dict(model.config),
        "n_features": model.n_features,
        "tree_sizes": [tree.n_nodes for tree in model.trees],
    }
    blob = json.dumps(header, sort_keys=True).encode("utf-8")
    with open(path, "wb") as out:
        out.write(_MAGIC)
        out.write(len(blob).to_bytes(8, "little"))
        out.write(blob)
        for tree in model.trees:
            out.write(tree.feature.astype("<i4").tobytes())
            out.write(tree.left.astype("<i4").tobytes())
            out.write(tree.right.astype("<i4").tobytes())
            out.write(tree.threshold.astype("<f8").tobytes())
            out.write(tree.value.astype("<f8").tobytes())


def load_forest(path: str | Path) -> RfModel:
    with open(path, "rb") as handle:
        if handle.read(len(_MAGIC)) != _MAGIC:
            raise ModelError(f"{Path(path).name}: not a forest file")
        size = int.from_bytes(handle.read(8), "little")
        header = json.loads(handle.read(size).decode("utf-8"))
        trees = []
        for n_nodes in header["tree_sizes"]:
            feature = np.frombuffer(handle.read(4 * n_nodes), dtype="<i4")
            left = np.frombuffer(handle.read(4 * n_nodes), dtype="<i4")
            right = np.frombuffer(handle.read(4 * n_nodes), dtype="<i4")
            threshold = np.frombuffer(handle.read(8 * n_nodes), dtype="<f8")
            value = np.frombuffer(handle.read(8 * n_nodes), dtype="<f8")
            trees.append(Tree(feature, threshold, left, right, value))
    cfg = TrainConfig(**header["config"])
    return RfModel(RF, tuple(trees), int(header["n_features"]), header["registry_version"], cfg)
