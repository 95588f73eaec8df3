"""Tabular data loading, Min-Max normalization and stratified fold plans."""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

RNG_NAME = "splitmix64"


class DataError(ValueError):
    """Raised for malformed input data (bad file, cell, column or label)."""


@dataclass(frozen=True)
class RawTable:
    rows: np.ndarray  # (n, d) float64, raw units
    feature_names: list[str]
    label_values: list[str]  # empty for unlabeled tables
    label_name: str | None = None

    @property
    def n(self) -> int:
        return self.rows.shape[0]

    @property
    def d(self) -> int:
        return self.rows.shape[1]

    @property
    def has_labels(self) -> bool:
        return len(self.label_values) == self.n

    def subset(self, idx: Sequence[int]) -> "RawTable":
        idx = np.asarray(idx, dtype=np.int64)
        labels = [self.label_values[i] for i in idx] if self.has_labels else []
        return RawTable(self.rows[idx], list(self.feature_names), labels, self.label_name)


@dataclass(frozen=True)
class NormalizationParams:
    mins: np.ndarray
    maxs: np.ndarray

    @property
    def d(self) -> int:
        return self.mins.shape[0]


@dataclass(frozen=True)
class LabeledDataset:
    X: np.ndarray
    y: np.ndarray  # 0-based class indices
    label_names: list[str]
    params: NormalizationParams | None = None

    @property
    def C(self) -> int:
        return len(self.label_names)


@dataclass(frozen=True)
class FoldPlan:
    folds: list[list[int]]
    seed: int
    k: int
    rng: str = field(default=RNG_NAME)

    def to_json(self) -> str:
        return json.dumps({"seed": self.seed, "k": self.k, "rng": self.rng, "folds": self.folds})

    def train_test(self, i: int) -> tuple[np.ndarray, np.ndarray]:
        test = np.asarray(sorted(self.folds[i]), dtype=np.int64)
        train = np.asarray(sorted(j for f, fold in enumerate(self.folds) if f != i for j in fold),
                           dtype=np.int64)
        return train, test


def _resolve_label_column(header: list[str], label_column: str | int | None) -> int | None:
    if label_column is None:
        return None
    if isinstance(label_column, int):
        idx = label_column
    elif label_column in header:
        return header.index(label_column)
    else:
        try:
            idx = int(label_column)
        except ValueError:
            raise DataError(f"label column {label_column!r} not found in header") from None
    if not -len(header) <= idx < len(header):
        raise DataError(f"label column index {idx} out of range for {len(header)} columns")
    return idx % len(header)


def load_csv(path: str | Path, label_column: str | int | None = -1,
             optional_label: bool = False) -> RawTable:
    """Read a comma-separated file with a header row.

    ``label_column`` is a header name or an integer position (negative counts
    from the end). With ``optional_label`` a missing named label column yields
    an unlabeled table instead of an error.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"{path}: file not found")
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if not header:
            raise DataError(f"{path}: empty file (header row required)")
        header = [h.strip() for h in header]
        try:
            li = _resolve_label_column(header, label_column)
        except DataError:
            if not optional_label:
                raise
            li = None
        feat_cols = [j for j in range(len(header)) if j != li]
        if not feat_cols:
            raise DataError(f"{path}: no feature columns")
        rows: list[list[float]] = []
        labels: list[str] = []
        for lineno, rec in enumerate(reader, start=2):
            if not rec or all(not c.strip() for c in rec):
                continue
            if len(rec) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} cells, got {len(rec)}")
            vals = []
            for j in feat_cols:
                cell = rec[j].strip()
                try:
                    v = float(cell)
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: column {header[j]!r}: cannot parse {cell!r} as a number"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(f"{path}:{lineno}: column {header[j]!r}: non-finite value {cell!r}")
                vals.append(v)
            rows.append(vals)
            if li is not None:
                labels.append(rec[li].strip())
    if not rows:
        raise DataError(f"{path}: table has no data rows")
    return RawTable(np.asarray(rows, dtype=np.float64), [header[j] for j in feat_cols], labels,
                    None if li is None else header[li])


def fit_normalizer(table: RawTable) -> NormalizationParams:
    return NormalizationParams(table.rows.min(axis=0), table.rows.max(axis=0))


def normalize(rows: np.ndarray, params: NormalizationParams) -> np.ndarray:
    """Apply the Min-Max map; constant features go to 0.0 and nothing is clamped."""
    rows = np.asarray(rows, dtype=np.float64)
    if rows.ndim != 2 or rows.shape[1] != params.d:
        got = rows.shape[1] if rows.ndim == 2 else rows.shape
        raise DataError(f"dimension mismatch: expected d={params.d}, got d={got}")
    span = params.maxs - params.mins
    safe = np.where(span > 0, span, 1.0)
    out = (rows - params.mins) / safe
    out[:, span <= 0] = 0.0
    return out


def _label_sort_key(labels: Sequence[str]):
    try:
        [float(s) for s in labels]
    except ValueError:
        return lambda s: (0, s)
    return lambda s: (float(s), s)


def encode_labels(values: Sequence[str]) -> list[str]:
    """Class names in canonical order (numeric when every label parses as a number)."""
    uniq = set(values)
    return sorted(uniq, key=_label_sort_key(list(uniq)))


def transform(table: RawTable, params: NormalizationParams,
              labels: Sequence[str] | None = None) -> LabeledDataset:
    X = normalize(table.rows, params)
    if not table.has_labels:
        raise DataError("table has no label column")
    names = list(labels) if labels is not None else encode_labels(table.label_values)
    lookup = {name: i for i, name in enumerate(names)}
    y = np.empty(table.n, dtype=np.int64)
    for i, v in enumerate(table.label_values):
        if v not in lookup:
            raise DataError(f"row {i}: unknown label {v!r} under the supplied encoding")
        y[i] = lookup[v]
    return LabeledDataset(X, y, names, params)


class SplitMix64:
    """SplitMix64 generator (Steele, Lea & Flood 2014 constants)."""

    _MASK = (1 << 64) - 1

    def __init__(self, seed: int):
        self.state = seed & self._MASK

    def next_u64(self) -> int:
        self.state = (self.state + 0x9E3779B97F4A7C15) & self._MASK
        z = self.state
        z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & self._MASK
        z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & self._MASK
        return z ^ (z >> 31)

    def below(self, bound: int) -> int:
        """Uniform integer in [0, bound) by rejection (no modulo bias)."""
        limit = (1 << 64) - ((1 << 64) % bound)
        while True:
            r = self.next_u64()
            if r < limit:
                return r % bound

    def shuffle(self, items: list) -> None:
        for i in range(len(items) - 1, 0, -1):
            j = self.below(i + 1)
            items[i], items[j] = items[j], items[i]


def stratified_folds(y: Sequence, k: int, seed: int) -> FoldPlan:
    """Shuffle each class with SplitMix64 and deal its members round-robin.

    Classes are visited in sorted order and share one generator stream; the
    dealing position carries over between classes so fold sizes stay within
    one sample of each other.
    """
    y = list(y)
    n = len(y)
    if k < 2:
        raise DataError(f"fold count must be >= 2, got {k}")
    if k > n:
        raise DataError(f"fold count {k} exceeds sample count {n}")
    rng = SplitMix64(seed)
    folds: list[list[int]] = [[] for _ in range(k)]
    pos = 0
    by_class: dict = {}
    for i, c in enumerate(y):
        by_class.setdefault(c, []).append(i)
    for c in sorted(by_class, key=lambda v: (str(type(v)), v)):
        members = by_class[c]
        rng.shuffle(members)
        for i in members:
            folds[pos % k].append(i)
            pos += 1
    return FoldPlan([sorted(f) for f in folds], seed, k)
