"""Datasets with unit-norm inputs: synthetic generator, CSV ingestion, splits."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ContractError, DataError
from .linalg import Rng


def separation_delta(X) -> float:
    """Exact minimum pairwise Euclidean distance between rows of ``X``."""
    X = np.asarray(X, dtype=np.float64)
    n = len(X)
    if n < 2:
        raise ContractError("separation_delta needs at least two rows")
    best = math.inf
    for i in range(n - 1):
        diff = X[i + 1:] - X[i]
        dist = np.sqrt(np.sum(diff * diff, axis=1))
        best = min(best, float(dist.min()))
    return best


def _readonly(a) -> np.ndarray:
    a = np.array(a, dtype=np.float64)
    a.flags.writeable = False
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Unit-norm inputs ``X`` (n x p) with labels ``Y`` (n x d).

    ``delta`` is the minimum pairwise input distance; it is recomputed on
    construction and is ``inf`` for fewer than two rows.
    """

    X: np.ndarray
    Y: np.ndarray
    name: str = "data"
    delta: float = field(init=False)

    def __post_init__(self):
        X = _readonly(self.X)
        Y = _readonly(self.Y)
        if Y.ndim == 1:
            Y = _readonly(Y[:, None])
        if X.ndim != 2 or len(X) != len(Y):
            raise DataError(f"inconsistent dataset shapes X {X.shape}, Y {Y.shape}")
        norms = np.linalg.norm(X, axis=1)
        if len(X) and np.max(np.abs(norms - 1.0)) > 1e-12:
            raise DataError("dataset inputs must have unit Euclidean norm")
        if not np.all(np.isfinite(Y)):
            raise DataError("labels must be finite")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "delta", separation_delta(X) if len(X) >= 2 else math.inf)

    @property
    def n(self) -> int:
        return len(self.X)

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def d(self) -> int:
        return self.Y.shape[1]

    def subset(self, idx, name: str | None = None) -> "Dataset":
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(self.X[idx], self.Y[idx], name or self.name)


def unit_rows(X) -> np.ndarray:
    X = np.asarray(X, dtype=np.float64)
    norms = np.linalg.norm(X, axis=1, keepdims=True)
    if np.any(norms == 0):
        raise DataError(f"row {int(np.flatnonzero(norms[:, 0] == 0)[0])} has zero norm")
    return X / norms


# --- synthetic data ---------------------------------------------------------


@dataclass(frozen=True)
class SyntheticConfig:
    n: int = 1000
    noise_std: float = 0.1
    seed: int = 0

    def __post_init__(self):
        if self.n < 2:
            raise ContractError(f"synthetic n must be >= 2, got {self.n}")
        if self.noise_std < 0:
            raise ContractError(f"noise_std must be >= 0, got {self.noise_std}")


def synthetic_target(X) -> np.ndarray:
    """Noise-free regression target on 5-dimensional inputs."""
    X = np.asarray(X, dtype=np.float64)
    x1, x2, x3, x4, x5 = (X[:, k] for k in range(5))
    return (
        np.sin(10 * x1 + 20 * x2**3)
        + np.cos(3 * x3 + 5 * x4**2)
        + 2.0 / np.sqrt(1.0 + np.maximum(0.05 + x5, 0.0))
        + 2 * x1 * x5
    )


def gen_synthetic(cfg: SyntheticConfig, name: str = "synthetic") -> Dataset:
    """Gaussian inputs projected to the unit sphere in R^5, scalar noisy labels.

    Inputs come from ``Rng(seed)`` and noise from ``Rng(seed + 1)``, so changing
    ``noise_std`` leaves ``X`` untouched.
    """
    X = unit_rows(Rng(cfg.seed).normals(cfg.n * 5).reshape(cfg.n, 5))
    y = synthetic_target(X)
    if cfg.noise_std > 0:
        y = y + cfg.noise_std * Rng(cfg.seed + 1).normals(cfg.n)
    return Dataset(X, y[:, None], name)


# --- CSV ingestion ----------------------------------------------------------


@dataclass(frozen=True)
class CsvSchema:
    feature_columns: tuple = ()
    categorical_columns: tuple = ()
    label_columns: tuple = ()
    has_header: bool = True
    one_hot_labels: bool = False

    def __post_init__(self):
        for name in ("feature_columns", "categorical_columns", "label_columns"):
            object.__setattr__(self, name, tuple(str(c) for c in getattr(self, name)))
        cols = self.feature_columns + self.categorical_columns + self.label_columns
        if len(set(cols)) != len(cols):
            raise ContractError("CSV schema column sets must be disjoint")
        if not self.label_columns:
            raise ContractError("CSV schema needs at least one label column")
        if not (self.feature_columns or self.categorical_columns):
            raise ContractError("CSV schema needs at least one feature column")
        if self.one_hot_labels and len(self.label_columns) != 1:
            raise ContractError("one_hot_labels needs exactly one label column")


@dataclass(frozen=True, eq=False)
class Table:
    """Raw tabular data before standardization.

    ``numeric`` holds the numeric features, ``categorical`` the raw category
    strings per categorical column, ``Y`` the labels.
    """

    numeric: np.ndarray
    categorical: tuple
    Y: np.ndarray
    numeric_names: tuple
    categorical_names: tuple
    name: str = "csv"


def _parse_float(text: str, row: int, col: str) -> float:
    try:
        v = float(text)
    except ValueError:
        raise DataError(f"row {row}, column {col!r}: cannot parse {text!r} as a number") from None
    if not math.isfinite(v):
        raise DataError(f"row {row}, column {col!r}: non-finite value {text!r}")
    return v


def load_csv(path, schema: CsvSchema) -> Table:
    """Read a comma-separated UTF-8 file into a raw :class:`Table`.

    Without a header, columns are addressed by zero-based index strings.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r]
    if schema.has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        header, rows = [h.strip() for h in rows[0]], rows[1:]
    else:
        header = [str(i) for i in range(len(rows[0]) if rows else 0)]
    pos = {h: i for i, h in enumerate(header)}
    needed = schema.feature_columns + schema.categorical_columns + schema.label_columns
    missing = [c for c in needed if c not in pos]
    if missing:
        raise DataError(f"{path}: missing column(s) {missing}; available {header}")
    if not rows:
        raise DataError(f"{path}: no data rows")

    first = 2 if schema.has_header else 1
    numeric = np.empty((len(rows), len(schema.feature_columns)))
    cats = [[] for _ in schema.categorical_columns]
    labels = []
    for r, row in enumerate(rows):
        line = r + first
        if len(row) != len(header):
            raise DataError(f"{path}: line {line} has {len(row)} fields, expected {len(header)}")
        for j, c in enumerate(schema.feature_columns):
            numeric[r, j] = _parse_float(row[pos[c]].strip(), line, c)
        for j, c in enumerate(schema.categorical_columns):
            cats[j].append(row[pos[c]].strip())
        if schema.one_hot_labels:
            labels.append(row[pos[schema.label_columns[0]]].strip())
        else:
            labels.append([_parse_float(row[pos[c]].strip(), line, c) for c in schema.label_columns])

    if schema.one_hot_labels:
        classes = sorted(set(labels))
        Y = one_hot(labels, classes)
    else:
        Y = np.array(labels, dtype=np.float64)
    return Table(numeric, tuple(tuple(c) for c in cats), Y,
                 schema.feature_columns, schema.categorical_columns, path.stem)


def one_hot(values, categories) -> np.ndarray:
    """One column per category, exactly one 1 per row; unknown values are an error."""
    index = {c: k for k, c in enumerate(categories)}
    out = np.zeros((len(values), len(categories)))
    for r, v in enumerate(values):
        if v not in index:
            raise DataError(f"category {v!r} not seen in training data")
        out[r, index[v]] = 1.0
    return out


@dataclass(frozen=True)
class ZScore:
    mean: np.ndarray
    std: np.ndarray
    categories: tuple


def fit_zscore(train: Table) -> ZScore:
    """Training-set means, population stds and category lists."""
    mean = train.numeric.mean(axis=0)
    std = train.numeric.std(axis=0)
    flat = np.flatnonzero(std == 0)
    if flat.size:
        raise DataError(f"feature column {train.numeric_names[flat[0]]!r} has zero variance")
    cats = tuple(tuple(sorted(set(c))) for c in train.categorical)
    return ZScore(mean, std, cats)


def zscore_features(table: Table, stats: ZScore) -> np.ndarray:
    """Standardized numeric features followed by the one-hot categorical blocks."""
    blocks = [(table.numeric - stats.mean) / stats.std]
    for values, cats in zip(table.categorical, stats.categories):
        blocks.append(one_hot(values, cats))
    return np.hstack(blocks)


def standardize(train: Table, apply_to: Table) -> Dataset:
    """Z-score ``apply_to`` with ``train`` statistics, one-hot expand, unit-normalize rows."""
    feats = zscore_features(apply_to, fit_zscore(train))
    return Dataset(unit_rows(feats), apply_to.Y, apply_to.name)


def load_csv_dataset(path, schema: CsvSchema) -> Dataset:
    table = load_csv(path, schema)
    return standardize(table, table)


def split(data: Dataset, test_fraction: float, seed: int):
    """Seeded random split into ``(train, test)``; the test size is ``round(n * fraction)``."""
    if not 0 < test_fraction < 1:
        raise ContractError(f"test_fraction must be in (0, 1), got {test_fraction}")
    perm = Rng(seed).permutation(data.n)
    n_test = int(round(data.n * test_fraction))
    test_idx = np.sort(perm[:n_test])
    train_idx = np.sort(perm[n_test:])
    return data.subset(train_idx, f"{data.name}-train"), data.subset(test_idx, f"{data.name}-test")
