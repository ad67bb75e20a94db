"""Datasets, CSV ingestion, synthetic generators and train/test splitting.

Label convention: 1 = anomaly (positive class), 0 = normal.
"""
import csv
import math
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path
from typing import NamedTuple

import numpy as np

SCALE_FLOOR = 1e-12


class DataError(ValueError):
    """Raised for malformed input data or violated dataset contracts."""


class SpecSyntaxError(DataError):
    """A generator spec string is malformed (as opposed to out of range)."""


class Sample(NamedTuple):
    features: np.ndarray
    label: int


def _frozen(a):
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Dataset:
    """Labeled numeric samples.

    ``X`` has shape ``(n, dim)`` and ``y`` shape ``(n,)``. Both arrays are
    copied and made read-only on construction.
    """

    name: str
    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y)
        if X.ndim == 1 and X.size == 0:
            X = X.reshape(0, 0)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        if y.shape != (X.shape[0],):
            raise DataError(f"label count {y.shape} does not match {X.shape[0]} samples")
        if y.size and not np.isin(y, (0, 1)).all():
            raise DataError("labels must be 0 (normal) or 1 (anomaly)")
        if not np.isfinite(X).all():
            raise DataError("features must be finite")
        object.__setattr__(self, "X", _frozen(X))
        object.__setattr__(self, "y", _frozen(y.astype(np.int64)))

    @property
    def dim(self):
        return self.X.shape[1]

    @property
    def n_anomalies(self):
        return int(self.y.sum())

    @property
    def n_normals(self):
        return len(self) - self.n_anomalies

    @property
    def samples(self):
        return [Sample(x, int(label)) for x, label in zip(self.X, self.y)]

    def __len__(self):
        return self.X.shape[0]

    def subset(self, idx, name=None):
        idx = np.asarray(idx, dtype=np.int64)
        return Dataset(name or self.name, self.X[idx], self.y[idx])

    def concat(self, other, name=None):
        if len(self) and len(other) and other.dim != self.dim:
            raise DataError(f"dimension mismatch: {self.dim} vs {other.dim}")
        return Dataset(
            name or self.name,
            np.vstack([self.X, other.X]) if len(other) else self.X,
            np.concatenate([self.y, other.y]),
        )

    def equals(self, other):
        return (
            self.name == other.name
            and np.array_equal(self.X, other.X)
            and np.array_equal(self.y, other.y)
        )


@dataclass(frozen=True, eq=False)
class SplitPair:
    train: Dataset
    test: Dataset
    beta: float
    train_idx: np.ndarray
    test_idx: np.ndarray


def contamination_rate(dataset):
    """Fraction of anomalies, computed exactly before conversion to float."""
    if len(dataset) == 0:
        raise DataError("contamination rate of an empty dataset is undefined")
    return float(Fraction(dataset.n_anomalies, len(dataset)))


def load_csv(path, label_column="label"):
    """Read a headered CSV of numeric features plus a 0/1 label column."""
    path = Path(path)
    if not path.is_file():
        raise DataError(f"no such file: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise DataError(f"{path}: empty file") from None
        if label_column not in header:
            raise DataError(f"{path}: label column {label_column!r} not found in header")
        li = header.index(label_column)
        feat_cols = [j for j in range(len(header)) if j != li]
        rows, labels = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DataError(f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}")
            try:
                lab = float(row[li])
            except ValueError:
                raise DataError(f"{path}:{lineno}: non-numeric label {row[li]!r}") from None
            if lab not in (0.0, 1.0):
                raise DataError(f"{path}:{lineno}: label {row[li]!r} outside {{0, 1}}")
            feats = []
            for j in feat_cols:
                try:
                    v = float(row[j])
                except ValueError:
                    raise DataError(
                        f"{path}:{lineno}: non-numeric value {row[j]!r} in column {header[j]!r}"
                    ) from None
                if not math.isfinite(v):
                    raise DataError(f"{path}:{lineno}: non-finite value in column {header[j]!r}")
                feats.append(v)
            rows.append(feats)
            labels.append(int(lab))
    X = np.array(rows, dtype=np.float64).reshape(len(rows), len(feat_cols))
    return Dataset(path.stem, X, np.array(labels, dtype=np.int64))


def save_csv(dataset, path, label_column="label"):
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{j}" for j in range(dataset.dim)] + [label_column])
        for x, lab in zip(dataset.X, dataset.y):
            w.writerow([repr(float(v)) for v in x] + [int(lab)])


def generate_gaussian_circle(n_normal, n_anomaly, radius=2.5, noise_sigma=0.1, seed=0):
    """Normals from a standard 2-D Gaussian, anomalies on a noisy circle.

    Anomalies are ``radius * (cos θ, sin θ)`` plus isotropic Gaussian noise of
    standard deviation ``noise_sigma``, with θ uniform on [0, 2π).
    """
    if n_normal < 1 or n_anomaly < 0:
        raise DataError("need n_normal >= 1 and n_anomaly >= 0")
    if radius < 0 or noise_sigma < 0:
        raise DataError("radius and noise_sigma must be non-negative")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0x61]))
    normals = rng.standard_normal((n_normal, 2))
    theta = rng.uniform(0.0, 2 * np.pi, n_anomaly)
    ring = radius * np.column_stack([np.cos(theta), np.sin(theta)])
    anomalies = ring + noise_sigma * rng.standard_normal((n_anomaly, 2))
    X = np.vstack([normals, anomalies])
    y = np.concatenate([np.zeros(n_normal, np.int64), np.ones(n_anomaly, np.int64)])
    name = f"circle:{n_normal},{n_anomaly},{radius:g},{noise_sigma:g}"
    return Dataset(name, X, y)


def _split_rng(seed):
    return np.random.default_rng(np.random.SeedSequence([int(seed), 0x73]))


def split_train_test(dataset, beta, seed=0, stratified=False):
    """Random train/test split with ``round(beta * N)`` samples in the test set.

    With ``stratified=True`` each class is split separately so per-class
    proportions are preserved to within one sample.
    """
    if not 0 < beta < 1:
        raise DataError(f"beta must lie in (0, 1), got {beta}")
    n = len(dataset)
    if n == 0:
        raise DataError("cannot split an empty dataset")
    rng = _split_rng(seed)
    if stratified:
        test_parts = []
        for cls in (0, 1):
            idx = np.flatnonzero(dataset.y == cls)
            idx = idx[rng.permutation(idx.size)]
            test_parts.append(idx[: int(math.floor(beta * idx.size + 0.5))])
        test_idx = np.sort(np.concatenate(test_parts))
        mask = np.ones(n, bool)
        mask[test_idx] = False
        train_idx = np.flatnonzero(mask)
    else:
        perm = rng.permutation(n)
        n_test = int(math.floor(beta * n + 0.5))
        test_idx = np.sort(perm[:n_test])
        train_idx = np.sort(perm[n_test:])
    if test_idx.size == 0 or train_idx.size == 0:
        raise DataError(f"beta={beta} leaves an empty train or test set for N={n}")
    return SplitPair(
        dataset.subset(train_idx, dataset.name + "/train"),
        dataset.subset(test_idx, dataset.name + "/test"),
        beta,
        _frozen(train_idx),
        _frozen(test_idx),
    )


def clean_subset(dataset):
    """Label-0 samples of ``dataset`` in their original order."""
    keep = np.flatnonzero(dataset.y == 0)
    if keep.size == 0:
        raise DataError(f"{dataset.name}: no normal samples to train on")
    return dataset.subset(keep, dataset.name + "/clean")


@dataclass(frozen=True, eq=False)
class Normalizer:
    mean: np.ndarray
    scale: np.ndarray

    def apply(self, dataset):
        return apply_normalizer(self, dataset)


def fit_normalizer(clean):
    """Per-feature z-score statistics of ``clean`` (labels are ignored)."""
    X = clean.X if isinstance(clean, Dataset) else np.asarray(clean, dtype=np.float64)
    if X.shape[0] == 0:
        raise DataError("cannot fit a normalizer on no samples")
    mean = X.mean(axis=0)
    scale = np.maximum(X.std(axis=0), SCALE_FLOOR)
    return Normalizer(_frozen(mean), _frozen(scale))


def apply_normalizer(norm, dataset):
    if len(dataset) and dataset.dim != norm.mean.shape[0]:
        raise DataError(f"normalizer fitted on dim {norm.mean.shape[0]}, got {dataset.dim}")
    if len(dataset) == 0:
        return dataset
    return Dataset(dataset.name, (dataset.X - norm.mean) / norm.scale, dataset.y)


def parse_generator_spec(spec):
    """Parse ``circle:n_normal,n_anomaly,radius,sigma`` into a parameter dict."""
    kind, sep, rest = spec.partition(":")
    if kind != "circle" or not sep:
        raise SpecSyntaxError(f"unknown generator {spec!r}: expected 'circle:n_normal,n_anomaly,radius,sigma'")
    parts = rest.split(",")
    if len(parts) != 4:
        raise SpecSyntaxError(
            f"generator spec {spec!r}: expected 4 comma-separated values after 'circle:', got {len(parts)}"
        )
    names = ("n_normal", "n_anomaly", "radius", "noise_sigma")
    out = {}
    for pos, (name, raw) in enumerate(zip(names, parts), start=1):
        raw = raw.strip()
        try:
            out[name] = int(raw) if pos <= 2 else float(raw)
        except ValueError:
            raise SpecSyntaxError(f"generator spec {spec!r}: field {pos} ({name}) is not a number: {raw!r}") from None
    if out["n_normal"] < 1:
        raise DataError(f"generator spec {spec!r}: n_normal must be >= 1")
    if out["n_anomaly"] < 0:
        raise DataError(f"generator spec {spec!r}: n_anomaly must be >= 0")
    if not out["radius"] > 0:
        raise DataError(f"generator spec {spec!r}: radius must be positive")
    if out["noise_sigma"] < 0:
        raise DataError(f"generator spec {spec!r}: sigma must be non-negative")
    return out


def resolve_source(source, seed=0, label_column="label"):
    """Dataset from a generator spec string or a CSV path.

    Generated datasets are redrawn from ``seed``; CSV datasets ignore it.
    """
    if isinstance(source, Dataset):
        return source
    source = str(source)
    if source.startswith("circle:"):
        return generate_gaussian_circle(**parse_generator_spec(source), seed=seed)
    return load_csv(source, label_column=label_column)
