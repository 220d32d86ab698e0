"""CSV ingestion and stratified subsampling for tabular classification data."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError, EmptyDataset, MissingColumn, NTooLarge, ParseError, UnknownLabel
from .forest import LabeledDataset
from .rng import SeededRandomStream

log = logging.getLogger(__name__)

ELEC2_FEATURES = ["date", "day", "period", "nswprice", "nswdemand", "vicprice", "vicdemand", "transfer"]


@dataclass(frozen=True)
class DatasetSchema:
    label_column: str
    labels: tuple = ("DOWN", "UP")
    feature_columns: tuple = ()
    rows_expected: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "feature_columns", tuple(self.feature_columns))
        if self.label_column in self.feature_columns:
            raise ConfigError(f"label column {self.label_column!r} is also listed as a feature")
        if len(set(self.feature_columns)) != len(self.feature_columns):
            raise ConfigError("feature columns must be distinct")
        if not self.labels:
            raise ConfigError("schema needs at least one label literal")

    @classmethod
    def from_dict(cls, d: dict) -> DatasetSchema:
        features = [c for c in d.get("feature_columns", []) if c not in set(d.get("drop_columns", []))]
        return cls(
            label_column=d["label_column"],
            labels=tuple(d.get("labels", ("DOWN", "UP"))),
            feature_columns=tuple(features),
            rows_expected=d.get("rows_expected"),
        )

    def to_dict(self) -> dict:
        return {"label_column": self.label_column, "labels": list(self.labels),
                "feature_columns": list(self.feature_columns), "rows_expected": self.rows_expected}


ELEC2_SCHEMA = DatasetSchema("class", ("DOWN", "UP"), tuple(ELEC2_FEATURES), 45312)


def load_csv(path, schema: DatasetSchema) -> LabeledDataset:
    """Parse a headed, comma-separated UTF-8 file.

    Any unparseable feature value or undeclared label aborts the load. Row
    numbers in errors are 1-based file line numbers (the header is line 1).
    """
    path = Path(path)
    allowed = set(schema.labels)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise EmptyDataset(f"{path} is empty") from None
        for col in (schema.label_column, *schema.feature_columns):
            if col not in header:
                raise MissingColumn(f"{path}: column {col!r} not in header")
        fidx = [header.index(c) for c in schema.feature_columns]
        lidx = header.index(schema.label_column)
        rows, labels = [], []
        for lineno, rec in enumerate(reader, start=2):
            if not rec:
                continue
            label = rec[lidx].strip()
            if label not in allowed:
                raise UnknownLabel(lineno, label)
            vals = []
            for j, col in zip(fidx, schema.feature_columns):
                try:
                    v = float(rec[j])
                except (ValueError, IndexError):
                    raise ParseError(lineno, col, rec[j] if j < len(rec) else "") from None
                if not np.isfinite(v):
                    raise ParseError(lineno, col, rec[j])
                vals.append(v)
            rows.append(vals)
            labels.append(label)
    if not rows:
        raise EmptyDataset(f"{path} has a header but no data rows")
    data = LabeledDataset(np.array(rows, dtype=float), np.array(labels, dtype=object), list(schema.feature_columns))
    log.info("loaded %d rows from %s, class counts %s", data.n_rows, path, data.class_counts())
    if schema.rows_expected is not None and data.n_rows != schema.rows_expected:
        log.warning("expected %d rows, found %d", schema.rows_expected, data.n_rows)
    return data


def stratified_quota(class_sizes: list[int], n: int) -> list[int]:
    """Per-class sample sizes proportional to ``class_sizes`` summing exactly to ``n``.

    Largest-remainder rounding: floors first, then the leftover units go to
    the largest fractional parts (earlier classes win ties).
    """
    total = sum(class_sizes)
    exact = [n * c / total for c in class_sizes]
    quota = [int(np.floor(e)) for e in exact]
    order = sorted(range(len(exact)), key=lambda i: (-(exact[i] - quota[i]), i))
    for i in order[: n - sum(quota)]:
        quota[i] += 1
    return quota


def subsample_stratified(data: LabeledDataset, n: int, seed: int) -> LabeledDataset:
    if not 1 <= n <= data.n_rows:
        raise NTooLarge(f"cannot draw {n} rows from {data.n_rows}")
    labels = data.labels.astype(str)
    classes = sorted(set(labels))
    members = [np.flatnonzero(labels == c) for c in classes]
    quota = stratified_quota([len(m) for m in members], n)
    stream = SeededRandomStream(seed).child("subsample")
    picked = [stream.child(c).generator.choice(m, size=q, replace=False) for c, m, q in zip(classes, members, quota)]
    return data.take(np.sort(np.concatenate(picked)))
