"""Preprocessing, data splits, classification metrics and the CV objective."""
from __future__ import annotations

import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import ClassWithSingleRow, EmptyInput, EmptyMatrix, KTooLarge, LengthMismatch, TuneError
from .forest import LabeledDataset, PresortedData, RFHyperParams, predict_batch, train_forest
from .rng import SeededRandomStream
from .space import SearchSpace, round_half_away


# ---------------------------------------------------------------- normalization

@dataclass(frozen=True)
class NormalizationModel:
    mins: np.ndarray
    maxs: np.ndarray


def minmax_fit(features) -> NormalizationModel:
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or X.shape[0] == 0:
        raise EmptyMatrix("min-max fit needs a non-empty 2-D matrix")
    return NormalizationModel(X.min(axis=0), X.max(axis=0))


def minmax_apply(model: NormalizationModel, features) -> np.ndarray:
    """``(x - min) / (max - min)``; constant training columns map to 0. No clipping."""
    X = np.asarray(features, dtype=float)
    span = model.maxs - model.mins
    safe = np.where(span > 0, span, 1.0)
    out = (X - model.mins) / safe
    out[..., span <= 0] = 0.0
    return out


def normalize_pair(train: LabeledDataset, other: LabeledDataset) -> tuple[LabeledDataset, LabeledDataset]:
    """Fit on ``train``, apply to both."""
    model = minmax_fit(train.features)
    return (
        LabeledDataset(minmax_apply(model, train.features), train.labels, list(train.feature_names)),
        LabeledDataset(minmax_apply(model, other.features), other.labels, list(other.feature_names)),
    )


# ---------------------------------------------------------------- splitting

def stratified_holdout(data: LabeledDataset, test_fraction: float, seed: int):
    """Per-class shuffled split; each class contributes ``round(test_fraction * n_class)`` rows.

    Returns ``(train, test)``; both keep the source row order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise TuneError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    labels = data.labels.astype(str)
    stream = SeededRandomStream(seed).child("holdout")
    test_idx = []
    for cls in sorted(set(labels)):
        idx = np.flatnonzero(labels == cls)
        if len(idx) < 2:
            raise ClassWithSingleRow(f"class {cls!r} has a single row and cannot be stratified")
        idx = stream.child(cls).generator.permutation(idx)
        n_test = int(round_half_away(test_fraction * len(idx)))
        test_idx.append(idx[:n_test])
    test_idx = np.sort(np.concatenate(test_idx)) if test_idx else np.array([], dtype=np.int64)
    mask = np.ones(data.n_rows, dtype=bool)
    mask[test_idx] = False
    return data.take(np.flatnonzero(mask)), data.take(test_idx)


def kfold_indices(n_rows: int, k: int, seed: int) -> list[np.ndarray]:
    """Shuffled partition of ``range(n_rows)`` into ``k`` folds differing in size by at most one."""
    if k < 2:
        raise TuneError("k must be at least 2")
    if n_rows < k:
        raise KTooLarge(f"cannot split {n_rows} rows into {k} folds")
    perm = SeededRandomStream(seed).child("kfold").generator.permutation(n_rows)
    return [np.asarray(f, dtype=np.int64) for f in np.array_split(perm, k)]


# ---------------------------------------------------------------- metrics

@dataclass
class ConfusionMatrix:
    labels: list
    counts: np.ndarray  # counts[true, predicted]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def _i(self, cls) -> int:
        return self.labels.index(cls)

    def tp(self, cls) -> int:
        i = self._i(cls)
        return int(self.counts[i, i])

    def fp(self, cls) -> int:
        i = self._i(cls)
        return int(self.counts[:, i].sum() - self.counts[i, i])

    def fn(self, cls) -> int:
        i = self._i(cls)
        return int(self.counts[i, :].sum() - self.counts[i, i])

    def tn(self, cls) -> int:
        return self.total - self.tp(cls) - self.fp(cls) - self.fn(cls)

    def to_dict(self) -> dict:
        return {"labels": list(self.labels), "counts": self.counts.tolist()}


def _ratio(num: float, den: float) -> float:
    return float(num / den) if den > 0 else 0.0


@dataclass
class EvaluationReport:
    accuracy: float
    per_class: dict
    confusion: ConfusionMatrix
    wall_time_seconds: float = 0.0

    def to_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "per_class": {k: dict(v) for k, v in self.per_class.items()},
            "confusion": self.confusion.to_dict(),
            "wall_time_seconds": self.wall_time_seconds,
        }

    @classmethod
    def from_dict(cls, d: dict) -> EvaluationReport:
        conf = ConfusionMatrix(list(d["confusion"]["labels"]), np.asarray(d["confusion"]["counts"], dtype=np.int64))
        return cls(float(d["accuracy"]), {k: dict(v) for k, v in d["per_class"].items()}, conf,
                   float(d.get("wall_time_seconds", 0.0)))


def compute_metrics(true_labels: Sequence, predicted_labels: Sequence,
                    labels: Sequence[str] | None = None) -> EvaluationReport:
    """Accuracy plus one-vs-rest precision, recall and f1 for every class.

    Zero denominators give 0.0.
    """
    t = np.asarray(true_labels).astype(str)
    p = np.asarray(predicted_labels).astype(str)
    if t.shape != p.shape:
        raise LengthMismatch(f"{len(t)} true labels but {len(p)} predictions")
    if t.size == 0:
        raise EmptyInput("no labels to score")
    classes = sorted(set(t) | set(p)) if labels is None else list(labels)
    index = {c: i for i, c in enumerate(classes)}
    counts = np.zeros((len(classes), len(classes)), dtype=np.int64)
    np.add.at(counts, (np.array([index[x] for x in t]), np.array([index[x] for x in p])), 1)
    conf = ConfusionMatrix(classes, counts)
    per_class = {}
    for c in classes:
        tp, fp, fn = conf.tp(c), conf.fp(c), conf.fn(c)
        precision = _ratio(tp, tp + fp)
        recall = _ratio(tp, tp + fn)
        f1 = _ratio(2 * precision * recall, precision + recall)
        per_class[c] = {"precision": precision, "recall": recall, "f1": f1}
    accuracy = float(np.mean(t == p))
    return EvaluationReport(accuracy, per_class, conf)


# ---------------------------------------------------------------- objective

def default_threads() -> int:
    env = os.environ.get("TUNE_THREADS")
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


class CVObjective:
    """Mean k-fold cross-validated accuracy of a forest configuration.

    Folds, their min-max scaling and the presorted training arrays are
    prepared once; each call only trains and scores forests. The score is a
    pure function of the configuration. With ``cache=True`` repeated
    configurations return the stored score without retraining.
    """

    def __init__(self, train_data: LabeledDataset, space: SearchSpace | None, k: int = 5,
                 base_seed: int = 0, *, cache: bool = False, threads: int | None = None):
        if train_data.n_rows == 0:
            raise EmptyInput("objective needs training data")
        self.space = space
        self.k = k
        self.base_seed = base_seed
        self.class_labels = sorted(set(train_data.labels.astype(str)))
        self.threads = default_threads() if threads is None else max(1, threads)
        root = SeededRandomStream(base_seed)
        self._folds = []
        for j, val_idx in enumerate(kfold_indices(train_data.n_rows, k, base_seed)):
            mask = np.ones(train_data.n_rows, dtype=bool)
            mask[val_idx] = False
            fit, val = normalize_pair(train_data.take(np.flatnonzero(mask)), train_data.take(val_idx))
            self._folds.append((
                PresortedData(fit, self.class_labels),
                val.features,
                val.labels.astype(str),
                root.derive_seed("fold", j),
            ))
        self._cache = {} if cache else None
        self._lock = threading.Lock()
        self.n_calls = 0
        self.n_fits = 0

    def clear_cache(self) -> None:
        with self._lock:
            if self._cache is not None:
                self._cache.clear()

    def fold_scores(self, config: dict) -> list[float]:
        hp = RFHyperParams.from_config(config)

        def run(fold):
            pre, Xv, yv, seed = fold
            model = train_forest(pre, hp, seed)
            return float(np.mean(np.asarray(predict_batch(model, Xv)) == yv))

        if self.threads > 1:
            with ThreadPoolExecutor(min(self.threads, self.k)) as pool:
                return list(pool.map(run, self._folds))
        return [run(f) for f in self._folds]

    def __call__(self, config: dict) -> float:
        key = self.space.key(config) if self.space is not None else tuple(sorted(config.items()))
        with self._lock:
            self.n_calls += 1
            if self._cache is not None and key in self._cache:
                return self._cache[key]
        score = float(np.mean(self.fold_scores(config)))
        with self._lock:
            self.n_fits += 1
            if self._cache is not None:
                self._cache[key] = score
        return score


def make_cv_objective(train_data: LabeledDataset, space: SearchSpace, k: int = 5,
                      base_seed: int = 0, **kwargs) -> CVObjective:
    return CVObjective(train_data, space, k, base_seed, **kwargs)


def holdout_evaluate(train: LabeledDataset, test: LabeledDataset, config: dict, seed: int):
    """Fit scaling and a forest on ``train``; score on ``test``.

    Returns ``(test_report, train_accuracy)``.
    """
    t0 = time.perf_counter()
    fit, held = normalize_pair(train, test)
    labels = sorted(set(train.labels.astype(str)) | set(test.labels.astype(str)))
    model = train_forest(fit, RFHyperParams.from_config(config), seed, class_labels=labels)
    report = compute_metrics(held.labels, predict_batch(model, held.features), labels)
    train_acc = float(np.mean(np.asarray(predict_batch(model, fit.features)) == fit.labels.astype(str)))
    report.wall_time_seconds = time.perf_counter() - t0
    return report, train_acc
