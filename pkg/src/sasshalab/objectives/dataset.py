# src/sasshalab/objectives/dataset.py
"""
dataset
=======

- **Module:** `src/sasshalab/objectives/dataset.py`

Datasets, CSV ingestion, label-noise injection, mini-batch sampling and
the synthetic generators used by the desk-scale studies.

Overview
--------
- **Dataset**:
  Features (n×p float64), integer labels in ``[0, n_classes)``, a boolean
  `noise_mask` marking corrupted labels, and optional regression targets.

- **load_csv**:
  Rows of ``p`` floats followed by one integer label. A first row whose
  first field is not numeric is treated as a header and skipped.

- **inject_label_noise**:
  Corrupts exactly ``round(fraction * n)`` labels (half rounds up), each to
  a uniformly chosen *different* class.

- **minibatch / MinibatchSampler**:
  Sampling without replacement. The sampler walks an epoch as a random
  permutation consumed in chunks; the last chunk of an epoch may be short.

- **make_blobs / make_teacher_data / train_val_split**:
  Synthetic problems and disjoint random splits.
"""

import csv
from pathlib import Path
from typing import Iterator, Optional

import numpy as np
from pydantic import model_validator

from sasshalab.exception.base_exceptions import DatasetParseError, PreconditionError
from sasshalab.lab_base_model import NumericModel
from sasshalab.numkit.rng import RngStream
from sasshalab.objectives.base_objective import Batch


class Dataset(NumericModel):
    """
    Labelled examples.

    Attributes
    ----------
    features : ndarray
        n×p float64 matrix.
    labels : ndarray
        n integer labels in ``[0, n_classes)``.
    n_classes : int
        Number of classes C.
    noise_mask : ndarray, optional
        n booleans marking corrupted labels; all false when omitted.
    targets : ndarray, optional
        n×k regression targets used by the MSE loss instead of one-hot labels.
    """
    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    noise_mask: Optional[np.ndarray] = None
    targets: Optional[np.ndarray] = None

    @model_validator(mode="after")
    def _validate(self) -> "Dataset":
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if self.features.ndim != 2 or self.features.shape[0] < 1:
            raise PreconditionError(f"Dataset: features must be a non-empty n×p matrix, got shape {self.features.shape}")
        n = self.features.shape[0]
        if self.labels.size != n:
            raise PreconditionError(f"Dataset: {self.labels.size} labels for {n} rows")
        if self.n_classes < 1 or self.labels.min() < 0 or self.labels.max() >= self.n_classes:
            raise PreconditionError(f"Dataset: labels must lie in [0, {self.n_classes})")
        if self.noise_mask is None:
            self.noise_mask = np.zeros(n, dtype=bool)
        self.noise_mask = np.asarray(self.noise_mask, dtype=bool).reshape(-1)
        if self.noise_mask.size != n:
            raise PreconditionError("Dataset: noise_mask length must equal the number of rows")
        if self.targets is not None:
            self.targets = np.asarray(self.targets, dtype=np.float64)
            if self.targets.ndim == 1:
                self.targets = self.targets[:, None]
            if self.targets.shape[0] != n:
                raise PreconditionError("Dataset: targets must have one row per example")
        return self

    @property
    def n(self) -> int:
        return int(self.features.shape[0])

    @property
    def p(self) -> int:
        return int(self.features.shape[1])

    @property
    def noise_fraction(self) -> float:
        return float(np.mean(self.noise_mask))

    def subset(self, indices) -> "Dataset":
        idx = np.asarray(indices, dtype=np.int64)
        return Dataset(
            features=self.features[idx],
            labels=self.labels[idx],
            n_classes=self.n_classes,
            noise_mask=self.noise_mask[idx],
            targets=None if self.targets is None else self.targets[idx])


def _is_number(field: str) -> bool:
    try:
        float(field)
    except ValueError:
        return False
    return True


def load_csv(path) -> Dataset:
    """
    Parse a comma-separated dataset file.

    Parameters
    ----------
    path : str or Path
        File whose rows are ``p`` floats followed by an integer label.

    Returns
    -------
    Dataset
        Rows in file order; ``n_classes = max(label) + 1`` (at least 2).

    Raises
    ------
    DatasetParseError
        On empty files, ragged rows, non-numeric fields or non-integer /
        negative labels; the message names the 1-based line.
    """
    path = Path(path)
    rows: list[list[float]] = []
    labels: list[int] = []
    width = None
    with path.open("r", newline="") as handle:
        for line_no, record in enumerate(csv.reader(handle), start=1):
            fields = [f.strip() for f in record]
            if not fields or all(f == "" for f in fields):
                continue
            if line_no == 1 and not _is_number(fields[0]):
                continue
            if len(fields) < 2:
                raise DatasetParseError("expected at least one feature and a label", line=line_no)
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise DatasetParseError(f"ragged row: {len(fields)} fields, expected {width}", line=line_no)
            try:
                values = [float(f) for f in fields[:-1]]
            except ValueError:
                raise DatasetParseError("non-numeric feature field", line=line_no) from None
            try:
                label = int(fields[-1])
            except ValueError:
                raise DatasetParseError(f"label '{fields[-1]}' is not an integer", line=line_no) from None
            if label < 0:
                raise DatasetParseError(f"label {label} is negative", line=line_no)
            rows.append(values)
            labels.append(label)
    if not rows:
        raise DatasetParseError("empty dataset file", line=1)
    return Dataset(
        features=np.array(rows, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
        n_classes=max(max(labels) + 1, 2))


def round_half_up(value: float) -> int:
    return int(np.floor(value + 0.5))


def inject_label_noise(ds: Dataset, fraction: float, rng: RngStream) -> Dataset:
    """
    Corrupt a fraction of labels.

    Parameters
    ----------
    ds : Dataset
        Source dataset (left untouched).
    fraction : float
        Corruption fraction in ``[0, 1]``.
    rng : RngStream
        Stream deciding which rows and which wrong labels.

    Returns
    -------
    Dataset
        Copy with exactly ``round(fraction * n)`` labels replaced by a
        uniformly chosen different class, and `noise_mask` marking them.

    Raises
    ------
    PreconditionError
        If `fraction` is outside ``[0, 1]`` or the dataset has fewer than
        two classes.
    """
    if not 0.0 <= fraction <= 1.0:
        raise PreconditionError(f"inject_label_noise: fraction must lie in [0, 1], got {fraction}")
    if ds.n_classes < 2:
        raise PreconditionError("inject_label_noise: at least two classes required")
    k = round_half_up(fraction * ds.n)
    labels = ds.labels.copy()
    mask = ds.noise_mask.copy()
    if k > 0:
        chosen = rng.permutation(ds.n)[:k]
        offsets = rng.integers(1, ds.n_classes, size=k)
        labels[chosen] = (labels[chosen] + offsets) % ds.n_classes
        mask[chosen] = True
    return Dataset(
        features=ds.features, labels=labels, n_classes=ds.n_classes,
        noise_mask=mask, targets=ds.targets)


def minibatch(rng: RngStream, n: int, size: int) -> Batch:
    """
    Draw one batch of `size` distinct indices out of ``range(n)``.

    Raises
    ------
    PreconditionError
        If ``size < 1`` or ``size > n``.
    """
    if size < 1 or size > n:
        raise PreconditionError(f"minibatch: size must lie in [1, {n}], got {size}")
    return Batch(indices=rng.permutation(n)[:size].astype(np.int64))


class MinibatchSampler:
    """
    Epoch-wise sampler: each epoch is a fresh permutation consumed in chunks.

    The union of one epoch's batches is every index exactly once.

    Parameters
    ----------
    rng : RngStream
        Stream owned by this sampler.
    n : int
        Dataset size.
    size : int
        Batch size, ``1 <= size <= n``.
    """

    def __init__(self, rng: RngStream, n: int, size: int):
        if size < 1 or size > n:
            raise PreconditionError(f"MinibatchSampler: size must lie in [1, {n}], got {size}")
        self.rng = rng
        self.n = n
        self.size = size
        self.epoch = 0
        self._order = np.empty(0, dtype=np.int64)
        self._cursor = 0

    @property
    def batches_per_epoch(self) -> int:
        return -(-self.n // self.size)

    def next_batch(self) -> Batch:
        if self._cursor >= self._order.size:
            self._order = self.rng.permutation(self.n).astype(np.int64)
            self._cursor = 0
            self.epoch += 1
        chunk = self._order[self._cursor: self._cursor + self.size]
        self._cursor += self.size
        return Batch(indices=chunk)

    def epoch_batches(self) -> list[Batch]:
        """Batches for one complete fresh epoch."""
        self._cursor = self._order.size
        first = self.next_batch()
        return [first] + [self.next_batch() for _ in range(self.batches_per_epoch - 1)]

    def __iter__(self) -> Iterator[Batch]:
        while True:
            yield self.next_batch()


def make_blobs(
        rng: RngStream,
        n: int,
        p: int = 2,
        n_classes: int = 2,
        separation: float = 2.0,
        spread: float = 1.0) -> Dataset:
    """
    Gaussian blobs: one isotropic cluster per class.

    Class centers are random directions scaled to `separation`; labels are
    balanced and shuffled.
    """
    if n < 1 or p < 1 or n_classes < 2:
        raise PreconditionError("make_blobs: need n >= 1, p >= 1 and n_classes >= 2")
    centers = rng.normal((n_classes, p))
    centers *= separation / np.maximum(np.linalg.norm(centers, axis=1, keepdims=True), 1e-12)
    labels = rng.permutation(np.arange(n) % n_classes).astype(np.int64)
    features = centers[labels] + spread * rng.normal((n, p))
    return Dataset(features=features, labels=labels, n_classes=n_classes)


def make_teacher_data(
        rng: RngStream,
        n: int,
        p: int,
        hidden: int = 8,
        n_classes: int = 2) -> Dataset:
    """
    Labels (and regression targets) produced by a random one-hidden-layer
    tanh teacher network on Gaussian inputs.
    """
    if n < 1 or p < 1 or hidden < 1 or n_classes < 2:
        raise PreconditionError("make_teacher_data: need n, p, hidden >= 1 and n_classes >= 2")
    features = rng.normal((n, p))
    w1 = rng.normal((p, hidden)) / np.sqrt(p)
    w2 = rng.normal((hidden, n_classes)) / np.sqrt(hidden)
    outputs = np.tanh(features @ w1) @ w2
    return Dataset(
        features=features, labels=np.argmax(outputs, axis=1),
        n_classes=n_classes, targets=outputs)


def train_val_split(ds: Dataset, val_fraction: float, rng: RngStream) -> tuple[Dataset, Dataset]:
    """
    Disjoint random split into (train, validation).

    Raises
    ------
    PreconditionError
        If either side would be empty.
    """
    n_val = round_half_up(val_fraction * ds.n)
    if not 0 < n_val < ds.n:
        raise PreconditionError(
            f"train_val_split: fraction {val_fraction} leaves an empty side for n={ds.n}")
    order = rng.permutation(ds.n)
    return ds.subset(np.sort(order[n_val:])), ds.subset(np.sort(order[:n_val]))
