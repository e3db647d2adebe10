# src/sasshalab/objectives/base_objective.py
"""
base_objective
==============

- **Module:** `src/sasshalab/objectives/base_objective.py`

The objective protocol shared by every problem in the suite.

Overview
--------
- **Batch**:
  Validated list of unique example indices. ``None`` in place of a batch
  always means the full batch.

- **Objective**:
  Abstract base exposing `value`, `grad`, `hvp` on a batch. Deterministic
  objectives (quadratics, the mixture landscape, tape objectives) ignore the
  batch. Evaluation never mutates the objective, so the same batch can be
  evaluated repeatedly with identical results; the optimizers rely on this
  to share one batch between the gradient, the perturbed gradient and the
  Hessian probes of a step.

- **SupervisedObjective**:
  Objectives over a `Dataset`. Per-example losses are averaged over the
  batch. Adds `accuracy` and `rebind` (same model on another dataset, used
  for validation splits).
"""

from abc import ABC, abstractmethod
from typing import Callable, Optional

import numpy as np

from sasshalab.exception.base_exceptions import DimensionMismatchError, PreconditionError
from sasshalab.lab_base_model import NumericModel


class Batch(NumericModel):
    """
    Mini-batch of example indices.

    Attributes
    ----------
    indices : ndarray
        Unique indices into a dataset, in sampling order.
    """
    indices: np.ndarray

    @classmethod
    def of(cls, indices, n: int) -> "Batch":
        """
        Validate and build a batch for a dataset of `n` examples.

        Raises
        ------
        PreconditionError
            If indices repeat or fall outside ``[0, n)``.
        """
        idx = np.asarray(indices, dtype=np.int64).reshape(-1)
        if idx.size == 0:
            raise PreconditionError("Batch: at least one index required")
        if idx.min() < 0 or idx.max() >= n:
            raise PreconditionError(f"Batch: indices must lie in [0, {n})")
        if np.unique(idx).size != idx.size:
            raise PreconditionError("Batch: indices must be unique")
        return cls(indices=idx)

    @classmethod
    def full(cls, n: int) -> "Batch":
        return cls(indices=np.arange(n, dtype=np.int64))

    @property
    def size(self) -> int:
        return int(self.indices.size)


class Objective(ABC):
    """
    Abstract base class for objectives ``f: R^dim -> R``.

    Subclasses implement `value`, `grad` and `hvp`; `value_and_grad` may be
    overridden when both come out of one pass.

    Attributes
    ----------
    dim : int
        Parameter count.
    """
    dim: int

    @property
    def n_examples(self) -> Optional[int]:
        """Number of examples, or ``None`` for deterministic objectives."""
        return None

    def check_x(self, x, name: str = "x") -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or x.size != self.dim:
            raise DimensionMismatchError(f"{type(self).__name__}: {name} must have length {self.dim}, got shape {x.shape}")
        return x

    @abstractmethod
    def value(self, x, batch: Batch = None) -> float:
        """Mean loss on `batch` (full batch when ``None``)."""
        pass

    @abstractmethod
    def grad(self, x, batch: Batch = None) -> np.ndarray:
        """Gradient of `value` with respect to `x`."""
        pass

    @abstractmethod
    def hvp(self, x, v, batch: Batch = None) -> np.ndarray:
        """Hessian-vector product ``∇²f(x) v`` on `batch`."""
        pass

    def value_and_grad(self, x, batch: Batch = None) -> tuple[float, np.ndarray]:
        return self.value(x, batch), self.grad(x, batch)

    def hvp_operator(self, x, batch: Batch = None) -> Callable[[np.ndarray], np.ndarray]:
        """Freeze `x` and `batch` into a linear operator ``v -> H v``."""
        x = self.check_x(x)
        return lambda v: self.hvp(x, v, batch)


class SupervisedObjective(Objective):
    """
    Objective defined as the mean per-example loss over a `Dataset`.

    Parameters
    ----------
    dataset : Dataset
        Training examples; immutable once bound.
    """

    def __init__(self, dataset):
        self.dataset = dataset

    @property
    def n_examples(self) -> int:
        return self.dataset.n

    def rows(self, batch: Batch = None) -> np.ndarray:
        """Indices selected by `batch` (all rows when ``None``)."""
        if batch is None:
            return np.arange(self.dataset.n)
        if batch.indices.max() >= self.dataset.n:
            raise PreconditionError(
                f"{type(self).__name__}: batch index out of range for {self.dataset.n} examples")
        return batch.indices

    @abstractmethod
    def predict(self, x, features: np.ndarray) -> np.ndarray:
        """Predicted class labels for the given feature rows."""
        pass

    @abstractmethod
    def rebind(self, dataset) -> "SupervisedObjective":
        """Same model structure and hyperparameters on another dataset."""
        pass

    def accuracy(self, x, batch: Batch = None) -> float:
        """Fraction of examples in `batch` whose predicted label is correct."""
        idx = self.rows(batch)
        predicted = self.predict(self.check_x(x), self.dataset.features[idx])
        return float(np.mean(predicted == self.dataset.labels[idx]))
