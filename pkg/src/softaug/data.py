"""Tabular datasets: CSV I/O, min-max normalization, splits, synthetic plants.

Conventions
-----------
* features are (m, d) float64, labels are (m,) float64; both are locked
  read-only after construction.
* normalization is min-max onto [0, 1], fitted on the real training split
  only; out-of-range values transform linearly without clipping.
* CSV files may carry leading '#' comment lines (provenance); the loader
  skips them and the writer emits one.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from .errors import (BudgetError, CatalogError, ContractError, ParseError,
                     SchemaError, ShapeError)
from .rng import SeededRng

PROVENANCES = ("real", "generated", "mixed")


@dataclass
class TabularDataset:
    features: np.ndarray
    labels: np.ndarray
    columns: tuple[str, ...]
    label_name: str = "y"
    provenance: str = "real"

    def __post_init__(self):
        f = np.array(self.features, dtype=np.float64)
        y = np.array(self.labels, dtype=np.float64).reshape(-1)
        if f.ndim != 2:
            raise ShapeError(f"features must be 2-D, got ndim={f.ndim}")
        if f.shape[0] != y.shape[0]:
            raise ShapeError(
                f"{f.shape[0]} feature rows vs {y.shape[0]} labels")
        if len(self.columns) != f.shape[1]:
            raise SchemaError(
                f"{len(self.columns)} column names for {f.shape[1]} features")
        if self.provenance not in PROVENANCES:
            raise ContractError(f"unknown provenance {self.provenance!r}")
        if f.size and not np.all(np.isfinite(f)):
            raise ContractError("features contain non-finite values")
        if y.size and not np.all(np.isfinite(y)):
            raise ContractError("labels contain non-finite values")
        f.setflags(write=False)
        y.setflags(write=False)
        self.features = f
        self.labels = y
        self.columns = tuple(self.columns)

    @property
    def n_rows(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def joint(self) -> np.ndarray:
        """Rows as joint [x, y] vectors, shape (m, d+1)."""
        return np.hstack([self.features, self.labels.reshape(-1, 1)])

    def take(self, indices) -> "TabularDataset":
        idx = np.asarray(indices, dtype=int)
        return TabularDataset(self.features[idx], self.labels[idx],
                              self.columns, self.label_name, self.provenance)

    def with_provenance(self, provenance: str) -> "TabularDataset":
        return TabularDataset(self.features, self.labels, self.columns,
                              self.label_name, provenance)


# ------------------------------------------------------------------- loading

def load_csv(path, label_column: str) -> TabularDataset:
    """Read a real-valued CSV with a header row; one column is the label."""
    path = Path(path)
    try:
        with path.open(newline="") as fh:
            rows = [r for r in csv.reader(fh)]
    except OSError as err:
        raise ParseError(f"cannot read {path}: {err}") from None
    rows = [r for r in rows if r and not (r[0].lstrip().startswith("#"))]
    if not rows:
        raise SchemaError(f"{path}: no header row")
    header = [c.strip() for c in rows[0]]
    if label_column not in header:
        raise SchemaError(f"{path}: label column {label_column!r} not in header {header}")
    label_idx = header.index(label_column)
    feat_names = tuple(c for i, c in enumerate(header) if i != label_idx)
    feats, labels = [], []
    for rnum, row in enumerate(rows[1:], start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}: row {rnum} has {len(row)} cells, expected {len(header)}")
        vals = []
        for cnum, cell in enumerate(row):
            text = cell.strip()
            if not text:
                raise ParseError(
                    f"{path}: row {rnum}, column {header[cnum]!r}: empty cell")
            try:
                v = float(text)
            except ValueError:
                raise ParseError(
                    f"{path}: row {rnum}, column {header[cnum]!r}: "
                    f"cannot parse {cell!r}") from None
            if not np.isfinite(v):
                raise ParseError(
                    f"{path}: row {rnum}, column {header[cnum]!r}: non-finite value")
            vals.append(v)
        labels.append(vals.pop(label_idx))
        feats.append(vals)
    if not feats:
        raise SchemaError(f"{path}: no data rows")
    return TabularDataset(np.array(feats), np.array(labels), feat_names,
                          label_name=label_column, provenance="real")


def save_csv(ds: TabularDataset, path) -> None:
    """Write the dataset with a provenance comment line and a header row."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        fh.write(f"# provenance={ds.provenance} rows={ds.n_rows}\n")
        writer = csv.writer(fh)
        writer.writerow(list(ds.columns) + [ds.label_name])
        for x, y in zip(ds.features, ds.labels):
            writer.writerow([f"{v:.17g}" for v in x] + [f"{y:.17g}"])


# -------------------------------------------------------------- normalization

@dataclass
class NormalizationSpec:
    """Per-column affine maps (x - lo) / (hi - lo); constant columns -> 0.5."""

    feature_lo: np.ndarray
    feature_hi: np.ndarray
    label_lo: float
    label_hi: float

    @property
    def constant_features(self) -> np.ndarray:
        return self.feature_hi <= self.feature_lo

    @property
    def constant_label(self) -> bool:
        return self.label_hi <= self.label_lo

    def to_dict(self) -> dict:
        return {"feature_lo": self.feature_lo.tolist(),
                "feature_hi": self.feature_hi.tolist(),
                "label_lo": self.label_lo, "label_hi": self.label_hi}

    @classmethod
    def from_dict(cls, d: dict) -> "NormalizationSpec":
        return cls(np.asarray(d["feature_lo"], dtype=float),
                   np.asarray(d["feature_hi"], dtype=float),
                   float(d["label_lo"]), float(d["label_hi"]))


def fit_normalizer(ds: TabularDataset) -> NormalizationSpec:
    if ds.n_rows < 1:
        raise ContractError("cannot fit a normalizer on an empty dataset")
    return NormalizationSpec(ds.features.min(axis=0), ds.features.max(axis=0),
                             float(ds.labels.min()), float(ds.labels.max()))


def _forward_col(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    if hi <= lo:
        return np.full_like(x, 0.5)
    return (x - lo) / (hi - lo)


def _inverse_col(x: np.ndarray, lo: float, hi: float) -> np.ndarray:
    return x * (hi - lo) + lo


def apply_normalizer(ds: TabularDataset, spec: NormalizationSpec) -> TabularDataset:
    if ds.n_features != spec.feature_lo.shape[0]:
        raise ShapeError(
            f"dataset has {ds.n_features} features, normalizer expects "
            f"{spec.feature_lo.shape[0]}")
    cols = [_forward_col(ds.features[:, j], spec.feature_lo[j], spec.feature_hi[j])
            for j in range(ds.n_features)]
    feats = np.column_stack(cols) if cols else ds.features.copy()
    labels = _forward_col(ds.labels, spec.label_lo, spec.label_hi)
    return TabularDataset(feats, labels, ds.columns, ds.label_name, ds.provenance)


def invert_normalizer(ds: TabularDataset, spec: NormalizationSpec) -> TabularDataset:
    if ds.n_features != spec.feature_lo.shape[0]:
        raise ShapeError(
            f"dataset has {ds.n_features} features, normalizer expects "
            f"{spec.feature_lo.shape[0]}")
    cols = [_inverse_col(ds.features[:, j], spec.feature_lo[j], spec.feature_hi[j])
            for j in range(ds.n_features)]
    feats = np.column_stack(cols) if cols else ds.features.copy()
    labels = _inverse_col(ds.labels, spec.label_lo, spec.label_hi)
    return TabularDataset(feats, labels, ds.columns, ds.label_name, ds.provenance)


def normalize_labels(y: np.ndarray, spec: NormalizationSpec) -> np.ndarray:
    return _forward_col(np.asarray(y, dtype=float), spec.label_lo, spec.label_hi)


def denormalize_labels(y: np.ndarray, spec: NormalizationSpec) -> np.ndarray:
    return _inverse_col(np.asarray(y, dtype=float), spec.label_lo, spec.label_hi)


# ------------------------------------------------------------------- splits

@dataclass(frozen=True)
class SplitSpec:
    train_count: int
    test_count: int
    seed: int


def split(ds: TabularDataset, spec: SplitSpec) -> tuple[TabularDataset, TabularDataset]:
    """Disjoint (train, test) via a seeded permutation."""
    if spec.train_count < 0 or spec.test_count < 0:
        raise BudgetError("split counts must be non-negative")
    if spec.train_count + spec.test_count > ds.n_rows:
        raise BudgetError(
            f"split wants {spec.train_count}+{spec.test_count} rows, "
            f"dataset has {ds.n_rows}")
    perm = SeededRng(spec.seed).permutation(ds.n_rows)
    train_idx = perm[:spec.train_count]
    test_idx = perm[spec.train_count:spec.train_count + spec.test_count]
    return ds.take(train_idx), ds.take(test_idx)


# ---------------------------------------------------------------- synthetics

def _friedman_truth(x: np.ndarray) -> np.ndarray:
    return (10.0 * np.sin(np.pi * x[:, 0] * x[:, 1])
            + 20.0 * (x[:, 2] - 0.5) ** 2 + 10.0 * x[:, 3] + 5.0 * x[:, 4])


def _sinusoid_truth(x: np.ndarray) -> np.ndarray:
    return np.sin(2.0 * np.pi * x[:, 0]) + 0.5 * np.cos(3.0 * np.pi * x[:, 1])


def _piecewise_truth(x: np.ndarray) -> np.ndarray:
    # two operating regimes switched by the first input
    low = 2.0 * x[:, 1] + x[:, 2]
    high = 1.0 + 0.5 * np.sin(4.0 * np.pi * x[:, 1]) + x[:, 2]
    return np.where(x[:, 0] < 0.5, low, high)


_CATALOG: dict[str, tuple[int, Callable[[np.ndarray], np.ndarray]]] = {
    # name -> (n_features, closed-form label function on U(0,1)^d inputs)
    "friedman-like": (10, _friedman_truth),
    "sinusoid-2d": (2, _sinusoid_truth),
    "piecewise-plant": (3, _piecewise_truth),
}


def synth_names() -> tuple[str, ...]:
    return tuple(_CATALOG)


def synth_truth(name: str) -> Callable[[np.ndarray], np.ndarray]:
    """The noise-free closed form behind a synthetic dataset."""
    if name not in _CATALOG:
        raise CatalogError(f"unknown synthetic dataset {name!r}; have {sorted(_CATALOG)}")
    return _CATALOG[name][1]


def synth_make(name: str, n: int, noise_sd: float, seed: int) -> TabularDataset:
    """Draw n rows with U(0,1) features and optional Gaussian label noise."""
    if name not in _CATALOG:
        raise CatalogError(f"unknown synthetic dataset {name!r}; have {sorted(_CATALOG)}")
    if n < 1:
        raise ContractError(f"need n >= 1 rows, got {n}")
    if noise_sd < 0:
        raise ContractError(f"noise_sd must be >= 0, got {noise_sd}")
    d, truth = _CATALOG[name]
    rng = SeededRng(seed)
    x = rng.uniform(n, d)
    y = truth(x)
    if noise_sd > 0:
        y = y + noise_sd * rng.normal(n, 1).ravel()
    cols = tuple(f"x{j + 1}" for j in range(d))
    return TabularDataset(x, y, cols, label_name="y", provenance="real")


# ------------------------------------------------------------------- concat

def concat(real: TabularDataset, generated: TabularDataset) -> TabularDataset:
    """Stack real rows on top of generated ones; provenance becomes mixed.

    An empty generated set returns the real dataset unchanged. Both inputs
    must live in the same normalization space; that is a caller contract
    the function can only check dimensionally.
    """
    if generated.n_rows == 0:
        return real
    if real.n_features != generated.n_features:
        raise ShapeError(
            f"feature widths differ: {real.n_features} vs {generated.n_features}")
    feats = np.vstack([real.features, generated.features])
    labels = np.concatenate([real.labels, generated.labels])
    return TabularDataset(feats, labels, real.columns, real.label_name, "mixed")
