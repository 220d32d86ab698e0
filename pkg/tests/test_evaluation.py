import threading

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hpotune.errors import ClassWithSingleRow, EmptyInput, EmptyMatrix, KTooLarge, LengthMismatch
from hpotune.evaluation import (CVObjective, EvaluationReport, compute_metrics, default_threads, holdout_evaluate,
                                kfold_indices, make_cv_objective, minmax_apply, minmax_fit, stratified_holdout)
from hpotune.forest import LabeledDataset
from hpotune.space import Categorical, IntegerRange, SearchSpace

from oracles import count_metrics

SPACE = SearchSpace([("n_estimators", IntegerRange(1, 20)), ("max_features", IntegerRange(1, 3)),
                     ("max_depth", IntegerRange(1, 6)), ("criterion", Categorical(["entropy", "gini"]))])
CONFIG = {"n_estimators": 5, "max_features": 2, "max_depth": 4, "criterion": "gini"}


def dataset(n=200, seed=0):
    rng = np.random.default_rng(seed)
    X = rng.normal(size=(n, 3))
    y = np.where(X[:, 0] + 0.5 * rng.normal(size=n) > 0, "UP", "DOWN")
    return LabeledDataset(X, y)


# ---------------------------------------------------------------- normalization

def test_minmax_examples():
    m = minmax_fit([[2.0], [4.0], [6.0]])
    assert minmax_apply(m, [[2.0], [4.0], [6.0]]).ravel().tolist() == [0.0, 0.5, 1.0]
    assert minmax_apply(minmax_fit([[7.0], [7.0]]), [[7.0], [7.0]]).ravel().tolist() == [0.0, 0.0]
    assert minmax_apply(minmax_fit([[0.0], [10.0]]), [[15.0]]).item() == 1.5


def test_minmax_empty_rejected():
    with pytest.raises(EmptyMatrix):
        minmax_fit(np.zeros((0, 3)))


@given(st.lists(st.lists(st.floats(-1e9, 1e9), min_size=3, max_size=3), min_size=1, max_size=40))
def test_normalized_training_data_lies_in_unit_box(rows):
    X = np.array(rows)
    Z = minmax_apply(minmax_fit(X), X)
    assert np.all(Z >= 0.0) and np.all(Z <= 1.0)


# ---------------------------------------------------------------- splitting

def test_stratified_holdout_proportions():
    data = LabeledDataset(np.arange(100.0)[:, None], np.array(["A"] * 60 + ["B"] * 40))
    train, test = stratified_holdout(data, 0.2, 1)
    assert test.class_counts() == {"A": 12, "B": 8}
    assert train.n_rows == 80
    assert not set(train.features.ravel()) & set(test.features.ravel())
    again = stratified_holdout(data, 0.2, 1)[1]
    assert np.array_equal(again.features, test.features)


def test_stratified_holdout_elec2_scale():
    labels = np.array(["UP"] * 19237 + ["DOWN"] * 26075)
    data = LabeledDataset(np.zeros((len(labels), 1)), labels)
    _, test = stratified_holdout(data, 0.2, 0)
    assert test.n_rows == 9062
    assert test.class_counts() == {"DOWN": 5215, "UP": 3847}


def test_single_row_class_cannot_be_stratified():
    data = LabeledDataset(np.zeros((5, 1)), np.array(["A", "A", "A", "A", "B"]))
    with pytest.raises(ClassWithSingleRow):
        stratified_holdout(data, 0.2, 0)


@pytest.mark.parametrize("n, k, sizes", [(10, 5, [2] * 5), (11, 5, [3, 2, 2, 2, 2])])
def test_kfold_sizes(n, k, sizes):
    assert sorted((len(f) for f in kfold_indices(n, k, 0)), reverse=True) == sizes


@given(st.integers(2, 300), st.integers(2, 10), st.integers(0, 1000))
def test_kfold_is_partition(n, k, seed):
    if n < k:
        with pytest.raises(KTooLarge):
            kfold_indices(n, k, seed)
        return
    folds = kfold_indices(n, k, seed)
    allidx = np.concatenate(folds)
    assert len(folds) == k and sorted(allidx.tolist()) == list(range(n))
    assert max(map(len, folds)) - min(map(len, folds)) <= 1


# ---------------------------------------------------------------- metrics

def test_metrics_hand_example():
    r = compute_metrics(list("AAABB"), list("AABBA"))
    assert r.accuracy == 0.6
    a = r.per_class["A"]
    assert a["precision"] == pytest.approx(2 / 3) and a["recall"] == pytest.approx(2 / 3)
    assert a["f1"] == pytest.approx(2 / 3)
    assert (r.confusion.tp("A"), r.confusion.fp("A"), r.confusion.fn("A"), r.confusion.tn("A")) == (2, 1, 1, 1)


def test_perfect_and_all_wrong():
    r = compute_metrics(["UP", "DOWN", "UP"], ["UP", "DOWN", "UP"])
    assert r.accuracy == 1.0 and all(v == 1.0 for m in r.per_class.values() for v in m.values())
    r = compute_metrics(["UP", "DOWN", "UP"], ["DOWN", "UP", "DOWN"])
    assert r.accuracy == 0.0
    assert all(m["precision"] == 0.0 and m["recall"] == 0.0 for m in r.per_class.values())


def test_metric_errors():
    with pytest.raises(LengthMismatch):
        compute_metrics(["A"], ["A", "B"])
    with pytest.raises(EmptyInput):
        compute_metrics([], [])


def test_metrics_match_counting_oracle_on_random_vectors():
    rng = np.random.default_rng(2024)
    for _ in range(1000):
        n = int(rng.integers(1, 201))
        t = [("UP", "DOWN")[k] for k in rng.integers(0, 2, n)]
        p = [("UP", "DOWN")[k] for k in rng.integers(0, 2, n)]
        got, want = compute_metrics(t, p), count_metrics(t, p)
        assert got.accuracy == want["accuracy"]
        for c, m in want["per_class"].items():
            conf = got.confusion
            assert (conf.tp(c), conf.fp(c), conf.fn(c), conf.tn(c)) == (m["tp"], m["fp"], m["fn"], m["tn"])
            for key in ("precision", "recall", "f1"):
                assert got.per_class[c][key] == m[key]


@given(st.lists(st.tuples(st.sampled_from("ABC"), st.sampled_from("ABC")), min_size=1, max_size=100), st.randoms())
def test_metric_properties(pairs, rnd):
    t, p = map(list, zip(*pairs))
    r = compute_metrics(t, p)
    counts = r.confusion.counts
    assert counts.sum() == len(t)
    assert r.accuracy == pytest.approx(np.trace(counts) / len(t), abs=0)
    for m in r.per_class.values():
        assert 0 <= m["f1"] <= max(m["precision"], m["recall"]) + 1e-15
        if m["precision"] + m["recall"] > 0:
            hm = 2 * m["precision"] * m["recall"] / (m["precision"] + m["recall"])
            assert m["f1"] == pytest.approx(hm)
    rnd.shuffle(pairs)
    t2, p2 = map(list, zip(*pairs))
    assert compute_metrics(t2, p2).to_dict() == r.to_dict()


def test_report_round_trip():
    r = compute_metrics(list("AAABB"), list("AABBA"))
    back = EvaluationReport.from_dict(r.to_dict())
    assert back.to_dict() == r.to_dict()


# ---------------------------------------------------------------- objective

def test_perfectly_learnable_data_scores_one():
    rng = np.random.default_rng(1)
    y = np.where(rng.random(100) < 0.5, "UP", "DOWN")
    X = np.column_stack([rng.normal(size=100), (y == "UP").astype(float), rng.normal(size=100)])
    obj = make_cv_objective(LabeledDataset(X, y), SPACE, 5, 0)
    assert obj({"n_estimators": 10, "max_features": 3, "max_depth": 3, "criterion": "gini"}) == 1.0


def test_objective_is_pure_and_threads_do_not_matter():
    data = dataset()
    a = CVObjective(data, SPACE, 5, 3, threads=1)
    b = CVObjective(data, SPACE, 5, 3, threads=4)
    assert a(CONFIG) == a(CONFIG) == b(CONFIG)
    assert a.n_fits == 2


def test_objective_matches_manual_cross_validation():
    from hpotune.evaluation import normalize_pair
    from hpotune.forest import RFHyperParams, predict_batch, train_forest
    from hpotune.rng import SeededRandomStream

    data = dataset(120, 4)
    obj = CVObjective(data, SPACE, 4, 11)
    accs = []
    for j, val in enumerate(kfold_indices(data.n_rows, 4, 11)):
        fit_idx = np.setdiff1d(np.arange(data.n_rows), val)
        fit, held = normalize_pair(data.take(fit_idx), data.take(val))
        model = train_forest(fit, RFHyperParams.from_config(CONFIG), SeededRandomStream(11).derive_seed("fold", j))
        accs.append(np.mean(np.array(predict_batch(model, held.features)) == held.labels))
    assert obj.fold_scores(CONFIG) == pytest.approx(accs, abs=0)
    assert obj(CONFIG) == np.mean(accs)


def test_cache_returns_stored_score_without_refitting():
    obj = CVObjective(dataset(), SPACE, 5, 0, cache=True)
    s = obj(CONFIG)
    assert obj(dict(CONFIG)) == s and obj.n_fits == 1 and obj.n_calls == 2
    obj.clear_cache()
    assert obj(CONFIG) == s and obj.n_fits == 2


def test_objective_is_safe_across_threads():
    obj = CVObjective(dataset(), SPACE, 5, 0, threads=1)
    expected = obj(CONFIG)
    out = []
    threads = [threading.Thread(target=lambda: out.append(obj(CONFIG))) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert out == [expected] * 4


def test_tune_threads_env(monkeypatch):
    monkeypatch.setenv("TUNE_THREADS", "3")
    assert default_threads() == 3
    monkeypatch.delenv("TUNE_THREADS")
    assert default_threads() >= 1


def test_holdout_evaluation_reports_both_accuracies():
    train, test = stratified_holdout(dataset(300, 5), 0.2, 0)
    report, train_acc = holdout_evaluate(train, test, CONFIG, 1)
    assert 0.5 < report.accuracy <= 1.0 and 0.5 < train_acc <= 1.0
    assert report.confusion.total == test.n_rows
    assert report.wall_time_seconds > 0
