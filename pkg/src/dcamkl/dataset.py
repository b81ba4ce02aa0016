"""Labeled feature data: containers, CSV I/O, splitting, standardization.

Feature matrices are stored with one row per feature and one column per
sample throughout the package.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParseError, ValidationError

STD_FLOOR = 1e-8


def _as_matrix(values) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 2:
        raise ValidationError(f"feature values must be 2-D, got shape {arr.shape}")
    return arr


@dataclass(frozen=True)
class FeatureSet:
    """Named d x n feature matrix with per-sample and per-feature identifiers."""

    name: str
    values: np.ndarray          # shape (d, n)
    sample_ids: tuple[str, ...]
    feature_names: tuple[str, ...]

    def __post_init__(self):
        values = _as_matrix(self.values)
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        d, n = values.shape
        if len(self.sample_ids) != n:
            raise ValidationError(
                f"{self.name}: {len(self.sample_ids)} sample ids for {n} columns")
        if len(self.feature_names) != d:
            raise ValidationError(
                f"{self.name}: {len(self.feature_names)} feature names for {d} rows")
        if len(set(self.sample_ids)) != n:
            raise ValidationError(f"{self.name}: duplicate sample ids")
        if not np.isfinite(values).all():
            raise ValidationError(f"{self.name}: non-finite feature values")
        values.setflags(write=False)

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    @property
    def n_samples(self) -> int:
        return self.values.shape[1]

    def take(self, indices) -> "FeatureSet":
        """New FeatureSet restricted to the given column indices, in order."""
        indices = list(indices)
        return FeatureSet(
            name=self.name,
            values=self.values[:, indices],
            sample_ids=tuple(self.sample_ids[i] for i in indices),
            feature_names=self.feature_names,
        )

    def select_ids(self, ids) -> "FeatureSet":
        """New FeatureSet with columns reordered to match ``ids``."""
        pos = {sid: i for i, sid in enumerate(self.sample_ids)}
        try:
            indices = [pos[sid] for sid in ids]
        except KeyError as exc:
            raise ValidationError(f"{self.name}: unknown sample id {exc.args[0]!r}")
        return self.take(indices)


def default_feature_names(prefix: str, d: int) -> tuple[str, ...]:
    return tuple(f"{prefix}_{i}" for i in range(d))


@dataclass(frozen=True)
class LabelVector:
    """Binary labels (+1/-1) aligned with a FeatureSet's sample ids."""

    labels: np.ndarray
    sample_ids: tuple[str, ...]

    def __post_init__(self):
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "sample_ids", tuple(self.sample_ids))
        if labels.ndim != 1:
            raise ValidationError("labels must be a vector")
        if len(self.sample_ids) != labels.shape[0]:
            raise ValidationError("label/sample id length mismatch")
        if len(set(self.sample_ids)) != len(self.sample_ids):
            raise ValidationError("duplicate sample ids in labels")
        if not np.isin(labels, (-1, 1)).all():
            raise ValidationError("labels must be +1 or -1")
        labels.setflags(write=False)

    @property
    def n_samples(self) -> int:
        return self.labels.shape[0]

    def take(self, indices) -> "LabelVector":
        indices = list(indices)
        return LabelVector(
            labels=self.labels[indices],
            sample_ids=tuple(self.sample_ids[i] for i in indices),
        )

    def select_ids(self, ids) -> "LabelVector":
        pos = {sid: i for i, sid in enumerate(self.sample_ids)}
        try:
            indices = [pos[sid] for sid in ids]
        except KeyError as exc:
            raise ValidationError(f"labels: unknown sample id {exc.args[0]!r}")
        return self.take(indices)

    def require_both_classes(self):
        if not ((self.labels == 1).any() and (self.labels == -1).any()):
            raise ValidationError("both classes must be present")


def check_alignment(features: list[FeatureSet], labels: LabelVector | None = None):
    """Require every set (and optionally the labels) to share identical
    sample ids in identical order."""
    if not features:
        raise ValidationError("no feature sets given")
    ref = features[0].sample_ids
    for fs in features[1:]:
        if fs.sample_ids != ref:
            raise ValidationError(
                f"sample ids of {fs.name!r} differ from {features[0].name!r}")
    if labels is not None and labels.sample_ids != ref:
        raise ValidationError("label sample ids differ from feature sample ids")


# ---------------------------------------------------------------------------
# CSV I/O
#
# Feature CSV: header `id,<f1>,...,<fd>`, one row per sample, `.` decimal
# point. Label CSV: header `id,label`, label literal `+1` or `-1`.
# ---------------------------------------------------------------------------

def load_feature_csv(path, name: str | None = None) -> FeatureSet:
    """Load a feature CSV; rows of the file become columns of the matrix."""
    path = str(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file")
        if len(header) < 2 or header[0] != "id":
            raise ParseError(f"{path}: header must be 'id,<feature names...>'")
        feature_names = tuple(header[1:])
        sample_ids: list[str] = []
        rows: list[list[float]] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise ParseError(
                    f"{path}: line {lineno}: expected {len(header)} cells, got {len(row)}")
            sample_ids.append(row[0])
            try:
                vals = [float(cell) for cell in row[1:]]
            except ValueError as exc:
                raise ParseError(f"{path}: line {lineno}: {exc}")
            if not all(math.isfinite(v) for v in vals):
                raise ParseError(f"{path}: line {lineno}: non-finite value")
            rows.append(vals)
    if len(set(sample_ids)) != len(sample_ids):
        raise ValidationError(f"{path}: duplicate sample id")
    values = np.array(rows, dtype=np.float64).T if rows else np.empty((len(feature_names), 0))
    if name is None:
        name = _stem(path)
    return FeatureSet(name=name, values=values, sample_ids=tuple(sample_ids),
                      feature_names=feature_names)


def save_feature_csv(fs: FeatureSet, path):
    """Write a FeatureSet using shortest round-trip float formatting."""
    with open(str(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", *fs.feature_names])
        for j, sid in enumerate(fs.sample_ids):
            writer.writerow([sid, *(repr(float(v)) for v in fs.values[:, j])])


def load_label_csv(path) -> LabelVector:
    path = str(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ParseError(f"{path}: empty file")
        if header != ["id", "label"]:
            raise ParseError(f"{path}: header must be 'id,label'")
        sample_ids: list[str] = []
        labels: list[int] = []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise ParseError(f"{path}: line {lineno}: expected 2 cells")
            if row[1] not in ("+1", "-1"):
                raise ParseError(
                    f"{path}: line {lineno}: label must be '+1' or '-1', got {row[1]!r}")
            sample_ids.append(row[0])
            labels.append(1 if row[1] == "+1" else -1)
    return LabelVector(labels=np.array(labels), sample_ids=tuple(sample_ids))


def save_label_csv(labels: LabelVector, path):
    with open(str(path), "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["id", "label"])
        for sid, lab in zip(labels.sample_ids, labels.labels):
            writer.writerow([sid, "+1" if lab > 0 else "-1"])


def _stem(path: str) -> str:
    base = path.replace("\\", "/").rsplit("/", 1)[-1]
    return base.rsplit(".", 1)[0] if "." in base else base


# ---------------------------------------------------------------------------
# Train/test splitting
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Split:
    """A stratified train/test partition of aligned feature sets."""

    train_features: list[FeatureSet]
    train_labels: LabelVector
    test_features: list[FeatureSet]
    test_labels: LabelVector
    train_indices: tuple[int, ...] = field(repr=False, default=())
    test_indices: tuple[int, ...] = field(repr=False, default=())

    @property
    def train_ids(self) -> tuple[str, ...]:
        return self.train_labels.sample_ids

    @property
    def test_ids(self) -> tuple[str, ...]:
        return self.test_labels.sample_ids


def split_indices(labels: LabelVector, train_fraction: float, seed: int):
    """Deterministic stratified index split.

    Train receives round(train_fraction * n) samples; every class with at
    least two members appears in both partitions. Sample order within each
    partition follows the input order.
    """
    if not (0.0 < train_fraction < 1.0):
        raise ValidationError("train_fraction must be in (0, 1)")
    y = labels.labels
    n = y.shape[0]
    n_train = int(round(train_fraction * n))
    if n_train < 1 or n_train > n - 1:
        raise ValidationError(
            f"split of {n} samples at fraction {train_fraction} leaves an empty partition")

    classes = sorted(set(y.tolist()))
    members = {c: np.flatnonzero(y == c) for c in classes}
    # Per-class quota: floor of the ideal count, then the leftover goes to
    # the classes with the largest fractional remainders (ties by class order).
    ideal = {c: train_fraction * len(members[c]) for c in classes}
    quota = {c: int(math.floor(ideal[c])) for c in classes}
    leftover = n_train - sum(quota.values())
    by_remainder = sorted(classes, key=lambda c: (-(ideal[c] - quota[c]), classes.index(c)))
    for c in by_remainder[:leftover]:
        quota[c] += 1

    def cap(c):
        m = len(members[c])
        return (1, m - 1) if m >= 2 else (0, m)

    for c in classes:
        lo, hi = cap(c)
        quota[c] = min(max(quota[c], lo), hi)
    # Re-balance after clamping so the train total is exact.
    diff = n_train - sum(quota.values())
    while diff != 0:
        step = 1 if diff > 0 else -1
        movable = [c for c in classes
                   if cap(c)[0] <= quota[c] + step <= cap(c)[1]]
        if not movable:
            raise ValidationError("cannot satisfy stratified split constraints")
        # Prefer the class farthest from its ideal allocation.
        c = max(movable, key=lambda c: (step * (ideal[c] - quota[c]), -classes.index(c)))
        quota[c] += step
        diff -= step

    rng = np.random.default_rng(seed)
    train_mask = np.zeros(n, dtype=bool)
    for c in classes:
        order = rng.permutation(len(members[c]))
        chosen = members[c][order[:quota[c]]]
        train_mask[chosen] = True
    train_idx = tuple(int(i) for i in np.flatnonzero(train_mask))
    test_idx = tuple(int(i) for i in np.flatnonzero(~train_mask))
    return train_idx, test_idx


def split(features: list[FeatureSet], labels: LabelVector,
          train_fraction: float, seed: int) -> Split:
    """Stratified split of aligned feature sets and labels."""
    check_alignment(features, labels)
    train_idx, test_idx = split_indices(labels, train_fraction, seed)
    return Split(
        train_features=[fs.take(train_idx) for fs in features],
        train_labels=labels.take(train_idx),
        test_features=[fs.take(test_idx) for fs in features],
        test_labels=labels.take(test_idx),
        train_indices=train_idx,
        test_indices=test_idx,
    )


# ---------------------------------------------------------------------------
# Standardization
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Normalizer:
    """Per-feature mean/std transform fitted on training data."""

    means: np.ndarray
    stds: np.ndarray

    def __post_init__(self):
        means = np.asarray(self.means, dtype=np.float64)
        stds = np.asarray(self.stds, dtype=np.float64)
        object.__setattr__(self, "means", means)
        object.__setattr__(self, "stds", stds)
        if means.shape != stds.shape or means.ndim != 1:
            raise ValidationError("means/stds must be matching vectors")
        if (stds <= 0).any():
            raise ValidationError("stds must be positive")


def fit_normalizer(train: FeatureSet) -> Normalizer:
    """Fit per-feature mean and sample std (ddof=1) on training data only.

    Constant features get their std floored so the transform maps them to 0.
    """
    if train.n_samples < 2:
        raise ValidationError("need at least 2 samples to fit a normalizer")
    means = train.values.mean(axis=1)
    stds = train.values.std(axis=1, ddof=1)
    stds = np.maximum(stds, STD_FLOOR)
    return Normalizer(means=means, stds=stds)


def apply_normalizer(norm: Normalizer, data: FeatureSet) -> FeatureSet:
    """Standardize ``data`` with the fitted statistics."""
    if norm.means.shape[0] != data.dim:
        raise ValidationError(
            f"normalizer dimension {norm.means.shape[0]} != data dimension {data.dim}")
    values = (data.values - norm.means[:, None]) / norm.stds[:, None]
    return FeatureSet(name=data.name, values=values,
                      sample_ids=data.sample_ids, feature_names=data.feature_names)
