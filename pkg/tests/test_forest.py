import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hpotune.errors import AllZeroCounts, DimensionMismatch, EmptyDataset, TuneError
from hpotune.forest import (DecisionTree, ForestModel, LabeledDataset, RFHyperParams, best_split,
                            impurity, predict, predict_batch, train_forest, train_tree, training_accuracy,
                            vote_label)
from hpotune.rng import SeededRandomStream

from oracles import CartOracle, IMPURITY, exhaustive_split

XOR = LabeledDataset(np.array([[0.0, 0.0], [1.0, 1.0], [0.0, 1.0], [1.0, 0.0]]), np.array(["A", "A", "B", "B"]))


def random_dataset(rng, n, f, n_classes=2, levels=None):
    if levels:
        X = rng.integers(0, levels, size=(n, f)).astype(float)
    else:
        X = rng.normal(size=(n, f))
    y = np.array(["ABCD"[k] for k in rng.integers(0, n_classes, n)])
    return LabeledDataset(X, y)


@st.composite
def small_datasets(draw, max_rows=30, max_features=3):
    n = draw(st.integers(1, max_rows))
    f = draw(st.integers(1, max_features))
    levels = draw(st.sampled_from([2, 3, 5, 1000]))
    X = np.array(draw(st.lists(st.lists(st.integers(0, levels - 1), min_size=f, max_size=f),
                               min_size=n, max_size=n)), dtype=float)
    k = draw(st.integers(1, 3))
    y = np.array(draw(st.lists(st.sampled_from("ABC"[:k]), min_size=n, max_size=n)))
    return LabeledDataset(X, y)


# ---------------------------------------------------------------- impurity

@pytest.mark.parametrize("counts, gini, ent", [
    ([10, 0], 0.0, 0.0),
    ([5, 5], 0.5, 1.0),
    ([3, 1], 0.375, 0.8112781244591328),
])
def test_impurity_examples(counts, gini, ent):
    assert impurity(counts, "gini") == pytest.approx(gini, abs=1e-12)
    assert impurity(counts, "entropy") == pytest.approx(ent, abs=1e-12)
    assert impurity([3, 1], "entropy") == pytest.approx(0.8113, abs=1e-4)


def test_impurity_rejects_all_zero():
    with pytest.raises(AllZeroCounts):
        impurity([0, 0], "gini")


@given(st.lists(st.integers(0, 50), min_size=1, max_size=5).filter(lambda c: sum(c) > 0))
def test_impurity_matches_oracle(counts):
    labels = [str(i) for i, k in enumerate(counts) for _ in range(k)]
    for crit, fn in IMPURITY.items():
        assert impurity(counts, crit) == pytest.approx(fn(labels), abs=1e-12)


# ---------------------------------------------------------------- best_split

def test_single_class_has_no_split():
    assert best_split([[1.0], [2.0]], ["A", "A"], [0], "gini") is None


def test_constant_feature_has_no_split():
    assert best_split([[1.0], [1.0]], ["A", "B"], [0], "gini") is None


def test_separable_midpoint():
    s = best_split([[1.0], [2.0], [3.0], [4.0]], ["A", "A", "B", "B"], [0], "gini")
    assert (s.feature, s.threshold, s.impurity) == (0, 2.5, 0.0)


def test_xor_split_has_weighted_gini_half():
    s = best_split(XOR.features, XOR.labels, [0, 1], "gini")
    assert s.impurity == pytest.approx(0.5)
    # every candidate ties, so the lowest (feature, threshold) wins
    assert (s.feature, s.threshold) == (0, 0.5)


@given(small_datasets(), st.sampled_from(["gini", "entropy"]))
def test_best_split_matches_exhaustive_oracle(data, crit):
    rows = data.features.tolist()
    labels = data.labels.tolist()
    got = best_split(data.features, data.labels, range(data.n_features), crit)
    want = exhaustive_split(rows, labels, crit)
    if want is None:
        assert got is None
    else:
        assert (got.feature, got.threshold) == want


# ---------------------------------------------------------------- trees

def test_depth_one_tree_has_at_most_one_split():
    data = random_dataset(np.random.default_rng(0), 200, 4)
    tree = train_tree(data, np.arange(200), RFHyperParams(1, 4, 1, "gini"), SeededRandomStream(0))
    assert (tree.feature >= 0).sum() <= 1
    assert tree.max_split_depth <= 1


def test_xor_depth_two_is_learned_exactly():
    hp = RFHyperParams(1, 2, 2, "entropy")
    tree = train_tree(XOR, np.arange(4), hp, SeededRandomStream(1))
    model = ForestModel([tree], hp, ["A", "B"], 2)
    assert predict_batch(model, XOR.features) == XOR.labels.tolist()


def test_same_seed_gives_identical_tree():
    data = random_dataset(np.random.default_rng(2), 150, 5)
    hp = RFHyperParams(1, 2, 6, "gini")
    idx = np.random.default_rng(3).integers(0, 150, 150)
    a = train_tree(data, idx, hp, SeededRandomStream(9))
    b = train_tree(data, idx, hp, SeededRandomStream(9))
    assert json.dumps(a.to_dict()) == json.dumps(b.to_dict())


def test_leaf_tie_goes_to_smallest_label():
    data = LabeledDataset(np.array([[0.0], [0.0]]), np.array(["UP", "DOWN"]))
    model = train_forest(data, RFHyperParams(1, 1, 3), 0, bootstrap=False)
    assert predict(model, [0.0]) == "DOWN"


def test_root_split_equals_best_split():
    rng = np.random.default_rng(4)
    for trial in range(30):
        data = random_dataset(rng, int(rng.integers(2, 80)), int(rng.integers(1, 5)), 3, levels=4)
        hp = RFHyperParams(1, data.n_features, 1, ["gini", "entropy"][trial % 2])
        tree = train_tree(data, np.arange(data.n_rows), hp, SeededRandomStream(trial))
        s = best_split(data.features, data.labels, range(data.n_features), hp.criterion)
        if s is None:
            assert tree.n_nodes == 1
        else:
            assert (tree.feature[0], tree.threshold[0]) == (s.feature, s.threshold)


def test_bootstrap_weights_match_weighted_best_split():
    rng = np.random.default_rng(5)
    data = random_dataset(rng, 60, 3, levels=6)
    idx = rng.integers(0, 60, 60)
    tree = train_tree(data, idx, RFHyperParams(1, 3, 1, "gini"), SeededRandomStream(0))
    s = best_split(data.features, data.labels, range(3), "gini", weights=np.bincount(idx, minlength=60))
    assert (tree.feature[0], tree.threshold[0]) == (s.feature, s.threshold)


@settings(max_examples=150)
@given(small_datasets(), st.sampled_from(["gini", "entropy"]), st.integers(1, 6))
def test_single_tree_matches_cart_oracle(data, crit, depth):
    hp = RFHyperParams(1, data.n_features, depth, crit)
    model = train_forest(data, hp, 0, bootstrap=False)
    oracle = CartOracle(data.features.tolist(), data.labels.tolist(), depth, crit)
    probes = np.vstack([data.features, np.random.default_rng(0).uniform(-1, 1000, size=(20, data.n_features))])
    assert predict_batch(model, probes) == [oracle.predict(r) for r in probes.tolist()]


def test_unbounded_tree_fits_distinct_rows_exactly():
    data = random_dataset(np.random.default_rng(6), 300, 3)
    model = train_forest(data, RFHyperParams(1, 3, 10_000), 0, bootstrap=False)
    assert training_accuracy(model, data) == 1.0


def test_max_features_larger_than_feature_count_is_clamped():
    data = random_dataset(np.random.default_rng(7), 100, 3)
    model = train_forest(data, RFHyperParams(5, 10, 4), 0)
    for t in model.trees:
        assert t.subset.shape[1] == 3


# ---------------------------------------------------------------- forests

def test_forest_size_and_determinism():
    data = random_dataset(np.random.default_rng(8), 120, 4)
    hp = RFHyperParams(50, 2, 4, "gini")
    a = train_forest(data, hp, 1)
    assert len(a.trees) == 50
    assert a.to_json() == train_forest(data, hp, 1).to_json()
    assert a.to_json() != train_forest(data, hp, 2).to_json()


def test_json_round_trip_is_byte_identical():
    data = random_dataset(np.random.default_rng(9), 80, 3)
    model = train_forest(data, RFHyperParams(7, 2, 5, "entropy"), 3)
    text = model.to_json()
    back = ForestModel.from_json(text)
    assert back.to_json() == text
    assert predict_batch(back, data.features) == predict_batch(model, data.features)


def test_forest_invariants_over_randomized_runs():
    rng = np.random.default_rng(10)
    for run in range(200):
        n, f = int(rng.integers(5, 120)), int(rng.integers(1, 9))
        data = random_dataset(rng, n, f, int(rng.integers(2, 4)), levels=[None, 3, 10][run % 3])
        hp = RFHyperParams(int(rng.integers(1, 4)), int(rng.integers(1, 11)), int(rng.integers(1, 9)),
                           ["gini", "entropy"][run % 2])
        model = train_forest(data, hp, run)
        n_sub = min(hp.max_features, f)
        for tree in model.trees:
            assert tree.max_split_depth <= hp.max_depth
            for nd in np.flatnonzero(tree.feature >= 0):
                sub = tree.subset[nd]
                assert len(set(sub.tolist())) == n_sub and sub.min() >= 0 and sub.max() < f
                assert tree.feature[nd] in sub
                # children partition the parent's in-bag counts
                assert (tree.counts[tree.left[nd]] + tree.counts[tree.right[nd]] == tree.counts[nd]).all()


def test_feature_subsets_are_uniform():
    data = random_dataset(np.random.default_rng(11), 50, 4)
    model = train_forest(data, RFHyperParams(3000, 2, 1), 0)
    freq = np.zeros(4)
    for t in model.trees:
        freq[t.subset[0]] += 1
    assert np.allclose(freq / freq.sum(), 0.25, atol=0.02)


def test_empty_dataset_rejected():
    with pytest.raises(EmptyDataset):
        train_forest(LabeledDataset(np.zeros((0, 2)), np.array([], dtype=str)), RFHyperParams(1, 1, 1), 0)


@pytest.mark.parametrize("kwargs", [dict(n_estimators=0, max_features=1, max_depth=1),
                                    dict(n_estimators=1, max_features=0, max_depth=1),
                                    dict(n_estimators=1, max_features=1, max_depth=1, criterion="mse")])
def test_hyperparameter_validation(kwargs):
    with pytest.raises(TuneError):
        RFHyperParams(**kwargs)


# ---------------------------------------------------------------- voting

def _leaf(label_index):
    z = np.zeros(1, dtype=np.int64)
    return DecisionTree(np.array([-1]), np.zeros(1), z - 1, z - 1, z, np.array([[1, 1]]),
                        np.array([label_index]), np.full((1, 1), -1))


def _forest(labels):
    idx = {"DOWN": 0, "UP": 1}
    return ForestModel([_leaf(idx[l]) for l in labels], RFHyperParams(len(labels), 1, 1), ["DOWN", "UP"], 1)


@pytest.mark.parametrize("votes, expected", [(["UP"], "UP"), (["UP", "UP", "DOWN"], "UP"), (["UP", "DOWN"], "DOWN")])
def test_majority_vote(votes, expected):
    assert predict(_forest(votes), [0.3]) == expected
    assert vote_label(votes) == expected


def test_prediction_dimension_checked():
    with pytest.raises(DimensionMismatch):
        predict(_forest(["UP"]), [0.1, 0.2])
