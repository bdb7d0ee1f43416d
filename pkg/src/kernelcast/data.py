"""Dataset ingestion, label encoding, stratified splitting, and feature scaling."""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from . import rand

SCALER_KINDS = ("none", "standardize", "minmax", "maxabs")


class DataError(ValueError):
    """Malformed input data or invalid data-handling parameters."""


@dataclass
class Dataset:
    """A labeled sample matrix.

    Attributes
    ----------
    features : (n, d) float64 matrix; every entry finite.
    labels : (n,) int64 label ids, or None for unlabeled query sets.
    label_names : ordered label vocabulary; id ``i`` means ``label_names[i]``.

    Treated as immutable by every consumer; operations return new instances.
    """

    features: np.ndarray
    labels: np.ndarray | None
    label_names: list[str]

    def __post_init__(self):
        feats = np.asarray(self.features, dtype=np.float64)
        if feats.ndim != 2:
            raise DataError("features must be a 2-d matrix")
        bad = ~np.isfinite(feats)
        if bad.any():
            r, c = np.argwhere(bad)[0]
            raise DataError(f"non-finite feature value at row {r}, column {c}")
        self.features = feats
        self.label_names = list(self.label_names)
        if self.labels is not None:
            labels = np.asarray(self.labels, dtype=np.int64)
            if labels.ndim != 1 or labels.shape[0] != feats.shape[0]:
                raise DataError("labels must be one id per feature row")
            if labels.size and (labels.min() < 0 or labels.max() >= len(self.label_names)):
                raise DataError("label id out of range of the vocabulary")
            self.labels = labels

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.label_names)

    def subset(self, indices) -> "Dataset":
        indices = np.asarray(indices)
        labels = None if self.labels is None else self.labels[indices]
        return Dataset(self.features[indices], labels, self.label_names)


def encode_labels(raw: list[str], vocabulary: list[str] | None = None) -> tuple[np.ndarray, list[str]]:
    """Map label strings to integer ids.

    Without a vocabulary, ids are assigned in order of first appearance.
    With one, unseen labels are an error.
    """
    if vocabulary is None:
        names: list[str] = []
        index: dict[str, int] = {}
        ids = np.empty(len(raw), dtype=np.int64)
        for i, name in enumerate(raw):
            if name not in index:
                index[name] = len(names)
                names.append(name)
            ids[i] = index[name]
        return ids, names
    index = {name: i for i, name in enumerate(vocabulary)}
    ids = np.empty(len(raw), dtype=np.int64)
    for i, name in enumerate(raw):
        if name not in index:
            raise DataError(f"label {name!r} not in the model vocabulary")
        ids[i] = index[name]
    return ids, list(vocabulary)


def _read_rows(path, has_header: bool) -> tuple[list[str] | None, list[list[str]], int]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [row for row in csv.reader(fh) if row]
    if has_header:
        if not rows:
            raise DataError(f"{path}: empty file")
        return rows[0], rows[1:], 2
    return None, rows, 1


def _resolve_column(label_column, header: list[str] | None, width: int) -> int:
    if isinstance(label_column, str):
        try:
            label_column = int(label_column)
        except ValueError:
            if header is None:
                raise DataError(
                    f"label column {label_column!r} given by name but the file has no header"
                ) from None
            if label_column not in header:
                raise DataError(f"label column {label_column!r} not found in header") from None
            return header.index(label_column)
    idx = int(label_column)
    if idx < 0:
        idx += width
    if not 0 <= idx < width:
        raise DataError(f"label column index {label_column} out of range for {width} columns")
    return idx


def _parse_cell(cell: str, line: int, column: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise DataError(f"cannot parse {cell!r} as a number at line {line}, column {column}") from None
    if not np.isfinite(value):
        raise DataError(f"non-finite value {cell!r} at line {line}, column {column}")
    return value


def load_csv(path, label_column=-1, has_header: bool = False,
             vocabulary: list[str] | None = None) -> Dataset:
    """Load a labeled dataset from an RFC-4180-style CSV file.

    Parameters
    ----------
    label_column : int or str
        Column holding the class label; an integer index (negative counts
        from the end) or, when ``has_header``, a column name.
    vocabulary : optional list of label names
        When given (e.g. from a trained model), labels are encoded against it
        and unseen labels are an error.  Otherwise ids follow first appearance
        and the file must contain at least two classes.
    """
    header, rows, first_line = _read_rows(path, has_header)
    if len(rows) < 2:
        raise DataError(f"{path}: need at least 2 data rows, found {len(rows)}")
    width = len(rows[0])
    if width < 2:
        raise DataError(f"{path}: need at least one feature column plus the label column")
    label_idx = _resolve_column(label_column, header, width)

    features = np.empty((len(rows), width - 1), dtype=np.float64)
    raw_labels: list[str] = []
    for i, row in enumerate(rows):
        line = i + first_line
        if len(row) != width:
            raise DataError(f"{path}: line {line} has {len(row)} cells, expected {width}")
        k = 0
        for j, cell in enumerate(row):
            if j == label_idx:
                raw_labels.append(cell.strip())
                continue
            features[i, k] = _parse_cell(cell.strip(), line, j + 1)
            k += 1

    labels, names = encode_labels(raw_labels, vocabulary)
    if vocabulary is None and len(names) < 2:
        raise DataError(f"{path}: need at least 2 classes, found {len(names)}")
    return Dataset(features, labels, names)


def load_feature_csv(path, has_header: bool = False) -> np.ndarray:
    """Load an unlabeled feature matrix from CSV (every column is a feature)."""
    _, rows, first_line = _read_rows(path, has_header)
    if not rows:
        raise DataError(f"{path}: empty file")
    width = len(rows[0])
    features = np.empty((len(rows), width), dtype=np.float64)
    for i, row in enumerate(rows):
        line = i + first_line
        if len(row) != width:
            raise DataError(f"{path}: line {line} has {len(row)} cells, expected {width}")
        for j, cell in enumerate(row):
            features[i, j] = _parse_cell(cell.strip(), line, j + 1)
    return features


def _round_half_up(x: float) -> int:
    return int(np.floor(x + 0.5))


def stratified_split(ds: Dataset, test_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Split into train/test keeping per-class proportions.

    Each class contributes round(count * test_fraction) samples to the test
    side (clamped so at least one sample per class stays in training).
    Deterministic per seed.
    """
    if not 0.0 < test_fraction < 1.0:
        raise DataError("test_fraction must lie strictly between 0 and 1")
    if ds.labels is None:
        raise DataError("stratified_split requires labels")
    rng = rand.derive(seed, rand.SPLIT)
    test_idx: list[np.ndarray] = []
    train_idx: list[np.ndarray] = []
    for c in range(ds.n_classes):
        members = np.flatnonzero(ds.labels == c)
        if members.size < 2:
            raise DataError(f"class {c} has {members.size} samples; need at least 2 to split")
        perm = rng.permutation(members)
        n_test = min(_round_half_up(members.size * test_fraction), members.size - 1)
        test_idx.append(perm[:n_test])
        train_idx.append(perm[n_test:])
    test = np.sort(np.concatenate(test_idx))
    train = np.sort(np.concatenate(train_idx))
    if test.size == 0:
        raise DataError("test fraction too small: the test side came out empty")
    return ds.subset(train), ds.subset(test)


@dataclass
class FoldPlan:
    """Cross-validation fold assignment: fold_of[i] is the fold of row i."""

    fold_count: int
    fold_of: np.ndarray

    def __post_init__(self):
        self.fold_of = np.asarray(self.fold_of, dtype=np.int64)
        if self.fold_count < 2:
            raise DataError("fold_count must be at least 2")
        present = np.unique(self.fold_of)
        if present.size != self.fold_count or present[0] != 0 or present[-1] != self.fold_count - 1:
            raise DataError("every fold index in [0, fold_count) must appear at least once")


def make_folds(ds: Dataset, fold_count: int, seed: int) -> FoldPlan:
    """Assign rows to stratified CV folds, deterministically per seed.

    Every class must have at least ``fold_count`` samples so that each fold
    sees each class.
    """
    if ds.labels is None:
        raise DataError("make_folds requires labels")
    if fold_count < 2:
        raise DataError("fold_count must be at least 2")
    counts = np.bincount(ds.labels, minlength=ds.n_classes)
    for c, count in enumerate(counts):
        if 0 < count < fold_count:
            raise DataError(f"class {c} has {count} samples; need at least {fold_count} for {fold_count} folds")
    rng = rand.derive(seed, rand.FOLDS)
    fold_of = np.empty(ds.n, dtype=np.int64)
    for c in range(ds.n_classes):
        members = np.flatnonzero(ds.labels == c)
        if members.size == 0:
            continue
        perm = rng.permutation(members)
        # Rotate the dealing start per class so remainders spread over folds.
        start = c % fold_count
        fold_of[perm] = (start + np.arange(perm.size)) % fold_count
    return FoldPlan(fold_count, fold_of)


def split_fold(ds: Dataset, folds: FoldPlan, fold: int) -> tuple[Dataset, Dataset]:
    """Return (train, held-out) datasets for one fold of a plan."""
    if not 0 <= fold < folds.fold_count:
        raise DataError(f"fold {fold} out of range")
    mask = folds.fold_of == fold
    return ds.subset(np.flatnonzero(~mask)), ds.subset(np.flatnonzero(mask))


@dataclass
class ScalerSpec:
    """Fitted feature scaling: transform(x) = (x - offset) / scale.

    Columns flagged inactive were degenerate at fit time (zero spread); the
    transform pins them to 0 regardless of input.
    """

    kind: str
    offset: np.ndarray
    scale: np.ndarray
    active: np.ndarray

    def transform(self, features: np.ndarray) -> np.ndarray:
        features = np.asarray(features, dtype=np.float64)
        if features.ndim != 2 or features.shape[1] != self.offset.shape[0]:
            raise DataError("feature width does not match the fitted scaler")
        out = (features - self.offset) / self.scale
        if not self.active.all():
            out[:, ~self.active] = 0.0
        return out


def fit_scaler(kind: str, ds: Dataset) -> ScalerSpec:
    """Learn scaling statistics from training features only.

    kinds: none (identity), standardize (mean 0 / population std 1),
    minmax (to [0, 1]), maxabs (to [-1, 1]).
    """
    if kind not in SCALER_KINDS:
        raise DataError(f"unknown scaler kind {kind!r}; expected one of {SCALER_KINDS}")
    feats = ds.features
    d = feats.shape[1]
    if kind == "none":
        return ScalerSpec(kind, np.zeros(d), np.ones(d), np.ones(d, dtype=bool))
    if kind == "standardize":
        offset = feats.mean(axis=0)
        spread = feats.std(axis=0)
    elif kind == "minmax":
        offset = feats.min(axis=0)
        spread = feats.max(axis=0) - offset
    else:  # maxabs
        offset = np.zeros(d)
        spread = np.abs(feats).max(axis=0)
    active = spread > 0.0
    scale = np.where(active, spread, 1.0)
    return ScalerSpec(kind, offset, scale, active)


def apply_scaler(spec: ScalerSpec, ds: Dataset) -> Dataset:
    return Dataset(spec.transform(ds.features), ds.labels, ds.label_names)
