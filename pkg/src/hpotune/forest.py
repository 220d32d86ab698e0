"""Random-forest classifier with four hyperparameters.

The forest exposes ``n_estimators``, ``max_features``, ``max_depth`` and
``criterion``. Each tree sees a bootstrap sample of ``n_rows`` draws with
replacement and, at every node, a fresh uniform subset of
``min(max_features, n_features)`` candidate features. Depth is counted in
splits: a tree with ``max_depth=1`` is a stump.

Trees are grown by a compiled breadth-first builder (:mod:`hpotune._kernels`).
Feature orderings are computed once per dataset and shared across trees, see
:class:`PresortedData`.
"""
from __future__ import annotations

import functools
import json
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence

import numpy as np

from . import _kernels
from .errors import AllZeroCounts, DimensionMismatch, EmptyDataset, LengthMismatch, TuneError
from .rng import SeededRandomStream, as_stream

CRITERIA = {"gini": _kernels.GINI, "entropy": _kernels.ENTROPY}
MODEL_FORMAT_VERSION = 1


@dataclass(frozen=True)
class RFHyperParams:
    n_estimators: int
    max_features: int
    max_depth: int
    criterion: str = "gini"

    def __post_init__(self):
        for name in ("n_estimators", "max_features", "max_depth"):
            v = getattr(self, name)
            if isinstance(v, bool) or not isinstance(v, (int, np.integer)) or v < 1:
                raise TuneError(f"{name} must be a positive integer, got {v!r}")
        if self.criterion not in CRITERIA:
            raise TuneError(f"criterion must be one of {sorted(CRITERIA)}, got {self.criterion!r}")

    @classmethod
    def from_config(cls, config: dict) -> RFHyperParams:
        return cls(
            n_estimators=int(config["n_estimators"]),
            max_features=int(config["max_features"]),
            max_depth=int(config["max_depth"]),
            criterion=str(config["criterion"]),
        )


@dataclass
class LabeledDataset:
    features: np.ndarray
    labels: np.ndarray
    feature_names: list = field(default_factory=list)

    def __post_init__(self):
        self.features = np.ascontiguousarray(self.features, dtype=float)
        if self.features.ndim != 2:
            raise DimensionMismatch("features must be a 2-D matrix")
        self.labels = np.asarray(self.labels, dtype=object)
        if self.labels.shape != (self.features.shape[0],):
            raise LengthMismatch(
                f"{self.features.shape[0]} feature rows but {self.labels.shape[0]} labels"
            )
        if not np.all(np.isfinite(self.features)):
            raise TuneError("features contain NaN or infinite values")
        if not self.feature_names:
            self.feature_names = [f"x{i}" for i in range(self.features.shape[1])]

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def take(self, idx) -> LabeledDataset:
        idx = np.asarray(idx, dtype=np.int64)
        return LabeledDataset(self.features[idx], self.labels[idx], list(self.feature_names))

    def class_counts(self) -> dict:
        values, counts = np.unique(self.labels.astype(str), return_counts=True)
        return {str(v): int(c) for v, c in zip(values, counts)}


def impurity(class_counts: Sequence[int], criterion: str) -> float:
    """Gini ``1 - sum p^2`` or entropy ``-sum p log2 p`` of a class-count vector."""
    counts = np.asarray(class_counts, dtype=float)
    total = counts.sum()
    if total <= 0:
        raise AllZeroCounts("impurity needs at least one positive count")
    p = counts / total
    if criterion == "gini":
        return float(1.0 - np.sum(p * p))
    if criterion == "entropy":
        nz = p[p > 0]
        return float(-np.sum(nz * np.log2(nz)))
    raise TuneError(f"unknown criterion {criterion!r}")


class Split(NamedTuple):
    feature: int
    threshold: float
    impurity: float


def best_split(features, labels, feature_subset: Sequence[int], criterion: str,
               weights=None) -> Split | None:
    """Best midpoint split over ``feature_subset``, or ``None``.

    Minimizes the size-weighted mean child impurity. Ties go to the lower
    feature index, then the lower threshold. ``None`` means the rows are a
    single class or no candidate threshold exists.
    """
    X = np.asarray(features, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    classes, y = np.unique(np.asarray(labels).astype(str), return_inverse=True)
    w = np.ones(len(y), dtype=np.int64) if weights is None else np.asarray(weights, dtype=np.int64)
    keep = w > 0
    X, y, w = X[keep], y[keep], w[keep]
    if len(y) == 0:
        raise EmptyDataset("best_split needs at least one row")
    node_counts = np.bincount(y, weights=w, minlength=len(classes))
    if np.count_nonzero(node_counts) <= 1:
        return None
    total = node_counts.sum()
    best = None
    for f in sorted(feature_subset):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        onehot = np.zeros((len(y), len(classes)))
        onehot[np.arange(len(y)), y[order]] = w[order]
        left = np.cumsum(onehot, axis=0)
        for r in np.nonzero(xs[1:] > xs[:-1])[0]:
            lc = left[r]
            rc = node_counts - lc
            nl, nr = lc.sum(), rc.sum()
            imp = (nl * _counts_impurity(lc, criterion) + nr * _counts_impurity(rc, criterion)) / total
            if best is None or imp < best.impurity - _kernels._TIE_EPS:
                t = 0.5 * (xs[r] + xs[r + 1])
                if t >= xs[r + 1]:
                    t = xs[r]
                best = Split(int(f), float(t), float(imp))
    return best


def _counts_impurity(counts, criterion):
    return impurity(counts, criterion) if counts.sum() > 0 else 0.0


@dataclass
class DecisionTree:
    """Flat node arrays; ``feature[i] == -1`` marks a leaf.

    ``left``/``right`` are child node indices, ``counts`` the in-bag class
    counts reaching each node, ``label`` the majority class index and
    ``subset`` the candidate features drawn at nodes that were considered
    for splitting (``-1`` padded).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    depth: np.ndarray
    counts: np.ndarray
    label: np.ndarray
    subset: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def max_split_depth(self) -> int:
        """Largest number of split nodes on any root-to-leaf path."""
        return int(self.depth.max())

    def apply(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        out = np.empty(len(X), dtype=np.int64)
        for i, row in enumerate(X):
            nd = 0
            while self.feature[nd] >= 0:
                nd = self.left[nd] if row[self.feature[nd]] <= self.threshold[nd] else self.right[nd]
            out[i] = nd
        return out

    def to_dict(self) -> dict:
        return {
            "feature": self.feature.tolist(),
            "threshold": [float(t).hex() for t in self.threshold],
            "left": self.left.tolist(),
            "right": self.right.tolist(),
            "depth": self.depth.tolist(),
            "counts": self.counts.tolist(),
            "label": self.label.tolist(),
            "subset": self.subset.tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> DecisionTree:
        n_cls = len(d["counts"][0]) if d["counts"] else 0
        sub = np.asarray(d["subset"], dtype=np.int64)
        return cls(
            feature=np.asarray(d["feature"], dtype=np.int64),
            threshold=np.array([float.fromhex(t) for t in d["threshold"]]),
            left=np.asarray(d["left"], dtype=np.int64),
            right=np.asarray(d["right"], dtype=np.int64),
            depth=np.asarray(d["depth"], dtype=np.int64),
            counts=np.asarray(d["counts"], dtype=np.int64).reshape(-1, n_cls),
            label=np.asarray(d["label"], dtype=np.int64),
            subset=sub.reshape(len(d["feature"]), -1),
        )


class PresortedData:
    """Dense training arrays plus per-feature argsort, reusable across trees."""

    def __init__(self, data: LabeledDataset, class_labels: Sequence[str] | None = None):
        if data.n_rows == 0:
            raise EmptyDataset("cannot train on an empty dataset")
        labels = data.labels.astype(str)
        self.class_labels = sorted(set(labels)) if class_labels is None else list(class_labels)
        index = {c: i for i, c in enumerate(self.class_labels)}
        self.X = np.ascontiguousarray(data.features, dtype=np.float64)
        self.y = np.array([index[c] for c in labels], dtype=np.int64)
        self.order = np.ascontiguousarray(np.argsort(self.X, axis=0, kind="stable").T.astype(np.int64))
        self.sorted_x = np.ascontiguousarray(np.take_along_axis(self.X.T, self.order, axis=1))
        self.n_rows, self.n_features = self.X.shape


def _key_capacity(max_depth: int, n_rows: int) -> int:
    by_depth = (1 << min(max_depth, 40)) - 1
    return max(1, min(by_depth, 2 * n_rows - 1))


@functools.lru_cache(maxsize=8)
def _score_tables(total: int):
    return _kernels.score_tables(total)


def train_tree(data: LabeledDataset | PresortedData, bootstrap_indices, hp: RFHyperParams,
               rng: SeededRandomStream | int) -> DecisionTree:
    rng = as_stream(rng)
    pre = data if isinstance(data, PresortedData) else PresortedData(data)
    idx = np.asarray(bootstrap_indices, dtype=np.int64)
    if idx.size == 0:
        raise EmptyDataset("bootstrap sample is empty")
    w = np.bincount(idx, minlength=pre.n_rows).astype(np.int64)
    n_sub = min(hp.max_features, pre.n_features)
    keys = rng.generator.random((_key_capacity(hp.max_depth, pre.n_rows), pre.n_features))
    inv, klogk = _score_tables(int(idx.size))
    arrays = _kernels.grow_tree(
        pre.X, pre.y, w, pre.order, pre.sorted_x, len(pre.class_labels), hp.max_depth, n_sub,
        CRITERIA[hp.criterion], keys, inv, klogk,
    )
    return DecisionTree(*arrays)


@dataclass
class ForestModel:
    trees: list
    hyperparams: RFHyperParams
    class_labels: list
    feature_count: int

    def __post_init__(self):
        self._flat = None

    def _flatten(self):
        if self._flat is None:
            sizes = [t.n_nodes for t in self.trees]
            offsets = np.zeros(len(sizes) + 1, dtype=np.int64)
            offsets[1:] = np.cumsum(sizes)
            cat = lambda name: np.ascontiguousarray(np.concatenate([getattr(t, name) for t in self.trees]))
            self._flat = (cat("feature"), cat("threshold"), cat("left"), cat("right"), cat("label"), offsets)
        return self._flat

    def votes(self, X) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.feature_count:
            raise DimensionMismatch(f"expected rows of length {self.feature_count}, got shape {X.shape}")
        feat, thr, left, right, label, offsets = self._flatten()
        return _kernels.forest_votes(X, feat, thr, left, right, label, offsets, len(self.class_labels))

    def to_json(self) -> str:
        doc = {
            "format": "hpotune.forest",
            "version": MODEL_FORMAT_VERSION,
            "hyperparams": {
                "n_estimators": self.hyperparams.n_estimators,
                "max_features": self.hyperparams.max_features,
                "max_depth": self.hyperparams.max_depth,
                "criterion": self.hyperparams.criterion,
            },
            "class_labels": list(self.class_labels),
            "feature_count": self.feature_count,
            "trees": [t.to_dict() for t in self.trees],
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> ForestModel:
        doc = json.loads(text)
        if doc.get("format") != "hpotune.forest" or doc.get("version") != MODEL_FORMAT_VERSION:
            raise TuneError("unsupported model document")
        return cls(
            trees=[DecisionTree.from_dict(t) for t in doc["trees"]],
            hyperparams=RFHyperParams.from_config(doc["hyperparams"]),
            class_labels=list(doc["class_labels"]),
            feature_count=int(doc["feature_count"]),
        )


def train_forest(data: LabeledDataset | PresortedData, hp: RFHyperParams, seed: int,
                 *, bootstrap: bool = True, class_labels: Sequence[str] | None = None) -> ForestModel:
    """Train ``hp.n_estimators`` trees; tree ``t`` uses the substream ``(seed, t)``.

    ``bootstrap=False`` feeds every row once to every tree (testing hook).
    """
    if isinstance(data, LabeledDataset) and data.n_rows == 0:
        raise EmptyDataset("cannot train on an empty dataset")
    pre = data if isinstance(data, PresortedData) else PresortedData(data, class_labels)
    root = SeededRandomStream(seed)
    trees = []
    for t in range(hp.n_estimators):
        stream = root.child(t)
        if bootstrap:
            idx = stream.generator.integers(0, pre.n_rows, pre.n_rows)
        else:
            idx = np.arange(pre.n_rows)
        trees.append(train_tree(pre, idx, hp, stream))
    return ForestModel(trees, hp, list(pre.class_labels), pre.n_features)


def predict_batch(model: ForestModel, X) -> list:
    """Majority vote per row; ties go to the lexicographically smallest label."""
    votes = model.votes(X)
    # class_labels is sorted, so argmax's first-maximum rule is the lexicographic tie-break
    return [model.class_labels[i] for i in np.argmax(votes, axis=1)]


def predict(model: ForestModel, row) -> str:
    row = np.asarray(row, dtype=float)
    if row.ndim != 1:
        raise DimensionMismatch("predict takes a single row; use predict_batch for matrices")
    return predict_batch(model, row[None, :])[0]


def training_accuracy(model: ForestModel, data: LabeledDataset) -> float:
    pred = np.asarray(predict_batch(model, data.features), dtype=object)
    return float(np.mean(pred == data.labels.astype(str)))


def vote_label(tree_labels: Sequence[str]) -> str:
    """Majority of a list of per-tree labels (ties -> smallest label)."""
    values, counts = np.unique(np.asarray(tree_labels, dtype=str), return_counts=True)
    return str(values[np.argmax(counts)])


def describe(model: ForestModel) -> dict:
    depths = [t.max_split_depth for t in model.trees]
    return {
        "n_trees": len(model.trees),
        "mean_nodes": float(np.mean([t.n_nodes for t in model.trees])),
        "max_depth_seen": int(max(depths)) if depths else 0,
    }
