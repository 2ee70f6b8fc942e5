"""Random forest tests: determinism, tie-breaks, and a hand-traced forest."""

import math

import numpy as np
import pytest

from newsgauge.forest import (
    RfModel,
    Tree,
    _TreeBuilder,
    load_forest,
    rf_predict_proba,
    save_forest,
    train_rf,
)
from newsgauge.models import Dataset, ModelError, TrainConfig, load_model, predict_proba_matrix

CFG = TrainConfig(model_kind="RF", rf_trees=12, seed=42)


def make_dataset(X, y):
    X = np.asarray(X, dtype=np.float64)
    return Dataset(X, np.asarray(y), tuple(f"r{i}" for i in range(len(X))))


def blob_dataset(rng, n=200, d=8, sep=3.0):
    y = rng.integers(0, 2, n)
    y[0], y[1] = 0, 1
    X = rng.normal(0.0, 1.0, (n, d)) + sep * y[:, None]
    return make_dataset(X, y)


def forests_equal(a: RfModel, b: RfModel) -> bool:
    if len(a.trees) != len(b.trees):
        return False
    for ta, tb in zip(a.trees, b.trees):
        if not (np.array_equal(ta.feature, tb.feature)
                and np.array_equal(ta.left, tb.left)
                and np.array_equal(ta.right, tb.right)
                and np.array_equal(ta.threshold, tb.threshold, equal_nan=True)
                and np.array_equal(ta.value, tb.value)):
            return False
    return True


# ------------------------------------------------------------- determinism

def test_same_seed_reproduces_forest_bitwise():
    rng = np.random.default_rng(1)
    data = blob_dataset(rng)
    assert forests_equal(train_rf(data, CFG), train_rf(data, CFG))


@pytest.mark.parametrize("n_jobs", [4, -1])
def test_parallel_training_identical_to_serial(n_jobs):
    rng = np.random.default_rng(2)
    data = blob_dataset(rng, n=120, d=6)
    serial = train_rf(data, CFG, n_jobs=1)
    parallel = train_rf(data, CFG, n_jobs=n_jobs)
    assert forests_equal(serial, parallel)


def test_different_seed_changes_forest():
    rng = np.random.default_rng(3)
    data = blob_dataset(rng, n=80, d=6)
    a = train_rf(data, CFG)
    b = train_rf(data, TrainConfig(model_kind="RF", rf_trees=12, seed=43))
    assert not forests_equal(a, b)


# ---------------------------------------------------------------- splitting

def _builder(X, y, n_candidates, seed=0):
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y)
    return _TreeBuilder(X, y, np.ones(len(y)), n_candidates,
                        np.random.default_rng(seed))


def test_duplicate_columns_split_on_lowest_feature_index():
    # columns 0 and 1 are identical and both perfectly separate the labels;
    # the builder walks candidate features in sorted order and only accepts
    # strict improvements, so the tie goes to feature 0
    X = [[0, 0, 0], [0, 0, 1], [1, 1, 0], [1, 1, 1]]
    y = [0, 0, 1, 1]
    builder = _builder(X, y, n_candidates=3)
    root = builder.build(np.arange(4))
    tree = builder.to_tree()
    assert tree.feature[root] == 0
    assert tree.threshold[root] == 0.5


def test_equal_impurity_cuts_take_lowest_threshold():
    # cuts at 0.5 and 2.5 both give weighted impurity 1/3; argmin returns
    # the first, so the threshold is the lower midpoint
    builder = _builder([[0.0], [1.0], [2.0], [3.0]], [0, 1, 0, 1], n_candidates=1)
    split = builder._best_split(np.arange(4))
    assert split == (0, 0.5)


def test_constant_feature_yields_no_split():
    builder = _builder([[1.0], [1.0], [1.0]], [0, 1, 0], n_candidates=1)
    assert builder._best_split(np.arange(3)) is None


def test_memorizes_distinct_points_without_bootstrap():
    rng = np.random.default_rng(4)
    X = rng.normal(0.0, 1.0, (40, 5))
    y = rng.integers(0, 2, 40)
    y[0], y[1] = 0, 1
    data = make_dataset(X, y)
    cfg = TrainConfig(model_kind="RF", rf_trees=5, rf_bootstrap=False, seed=7)
    model = train_rf(data, cfg)
    proba = rf_predict_proba(model, data.features)
    assert np.array_equal((proba > 0.5).astype(int), y)


def test_balanced_weights_shift_mixed_leaf_value():
    # all rows identical -> single mixed leaf; balanced weighting values
    # the lone HIGH row as much as both LOW rows together
    X = [[0.0], [0.0], [0.0]]
    y = [0, 0, 1]
    cfg_balanced = TrainConfig(model_kind="RF", rf_trees=1, rf_bootstrap=False)
    cfg_plain = TrainConfig(model_kind="RF", rf_trees=1, rf_bootstrap=False,
                            class_weight="none")
    p_balanced = rf_predict_proba(train_rf(make_dataset(X, y), cfg_balanced),
                                  np.array([[0.0]]))
    p_plain = rf_predict_proba(train_rf(make_dataset(X, y), cfg_plain),
                               np.array([[0.0]]))
    assert p_balanced[0] == pytest.approx(0.5)
    assert p_plain[0] == pytest.approx(1 / 3)


# ------------------------------------------------------- hand-traced forest

def _tree(feature, threshold, left, right, value):
    return Tree(np.array(feature, dtype=np.int32),
                np.array(threshold, dtype=np.float64),
                np.array(left, dtype=np.int32),
                np.array(right, dtype=np.int32),
                np.array(value, dtype=np.float64))


HAND_FOREST = RfModel(
    "RF",
    (
        # x0 <= 0.5 ? 0.2 : 0.8
        _tree([0, -1, -1], [0.5, math.nan, math.nan], [1, -1, -1], [2, -1, -1],
              [0.0, 0.2, 0.8]),
        # x1 <= 1.0 ? 0.0 : (x0 <= 2.0 ? 0.5 : 1.0)
        _tree([1, -1, 0, -1, -1], [1.0, math.nan, 2.0, math.nan, math.nan],
              [1, -1, 3, -1, -1], [2, -1, 4, -1, -1], [0.0, 0.0, 0.0, 0.5, 1.0]),
        # constant 0.6
        _tree([-1], [math.nan], [-1], [-1], [0.6]),
    ),
    2,
    "default-1",
    TrainConfig(model_kind="RF", rf_trees=3),
)


@pytest.mark.parametrize("x,expected", [
    ([0.4, 2.0], (0.2 + 0.5 + 0.6) / 3),
    ([3.0, 0.5], (0.8 + 0.0 + 0.6) / 3),
    ([0.5, 1.0], (0.2 + 0.0 + 0.6) / 3),  # boundary values route left
    ([2.5, 1.5], (0.8 + 1.0 + 0.6) / 3),
])
def test_hand_traced_votes(x, expected):
    got = rf_predict_proba(HAND_FOREST, np.array([x]))
    assert got[0] == pytest.approx(expected, abs=1e-15)


def test_hand_forest_batch_matches_single():
    probes = np.array([[0.4, 2.0], [3.0, 0.5], [0.5, 1.0], [2.5, 1.5]])
    batch = rf_predict_proba(HAND_FOREST, probes)
    singles = [rf_predict_proba(HAND_FOREST, probes[i : i + 1])[0] for i in range(4)]
    assert np.array_equal(batch, np.array(singles))


# ---------------------------------------------------------------- accuracy

def test_blob_accuracy():
    rng = np.random.default_rng(5)
    data = blob_dataset(rng, n=200, d=8, sep=3.0)
    model = train_rf(data, TrainConfig(model_kind="RF", rf_trees=30))
    proba = rf_predict_proba(model, data.features)
    assert np.all((proba >= 0.0) & (proba <= 1.0))
    assert (((proba > 0.5).astype(int)) == data.labels).mean() >= 0.95


# ------------------------------------------------------------ serialization

def test_save_load_round_trip(tmp_path):
    rng = np.random.default_rng(6)
    data = blob_dataset(rng, n=80, d=5)
    model = train_rf(data, CFG)
    path = tmp_path / "forest.model"
    save_forest(model, path)
    assert path.read_bytes()[:8] == b"NGRF0001"
    back = load_forest(path)
    assert forests_equal(model, back)
    assert back.config == model.config
    probe = rng.normal(1.0, 1.0, (20, 5))
    assert np.array_equal(rf_predict_proba(model, probe), rf_predict_proba(back, probe))


def test_load_model_dispatches_on_magic(tmp_path):
    rng = np.random.default_rng(8)
    data = blob_dataset(rng, n=60, d=4)
    model = train_rf(data, CFG)
    path = tmp_path / "any.model"
    save_forest(model, path)
    back = load_model(path)  # generic loader sniffs the forest magic
    assert isinstance(back, RfModel)
    probe = rng.normal(0.0, 1.0, (10, 4))
    assert np.array_equal(predict_proba_matrix(back, probe),
                          rf_predict_proba(model, probe))


def test_load_forest_rejects_wrong_magic(tmp_path):
    path = tmp_path / "bad.model"
    path.write_bytes(b"XXXX1111" + b"\x00" * 32)
    with pytest.raises(ModelError, match="not a forest file"):
        load_forest(path)
