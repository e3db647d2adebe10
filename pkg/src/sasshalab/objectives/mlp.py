# src/sasshalab/objectives/mlp.py
"""
mlp
===

- **Module:** `src/sasshalab/objectives/mlp.py`

One-hidden-layer network objective recorded on the autodiff `Tape`.

Overview
--------
- **Parameter layout**:
  ``x = [W1 (p×h, row-major), b1 (h), W2 (h×C, row-major), b2 (C)]`` so
  ``dim = p·h + h + h·C + C``.

- **Losses**:
  ``mse``: ``½‖o - y‖²`` per example, with ``y`` the dataset's regression
  targets when present and one-hot labels otherwise.
  ``ce``: softmax cross-entropy ``log Σ exp(o) - o_label``, with the
  log-sum-exp shifted by the row maximum so large logits stay finite.

- **Batches**:
  The tape is recorded once; each batch is fed as data placeholders
  (``X``, ``Y`` and the scalar ``scale = 1/|B|``) so per-example losses are
  averaged.

Usage
-----
```python
obj = mlp_objective(ds, hidden=32, activation="tanh", loss="ce")
x0 = init_mlp_params(obj, RngStream(0))
obj.value(x0)
```
"""

from typing import Literal

import numpy as np

from sasshalab.autodiff.tape import TapeBuilder
from sasshalab.exception.base_exceptions import PreconditionError
from sasshalab.numkit.rng import RngStream
from sasshalab.objectives.base_objective import Batch, SupervisedObjective

MAX_DIM = 5000

type Activation = Literal["tanh", "relu"]
type MlpLoss = Literal["mse", "ce"]


class MlpObjective(SupervisedObjective):
    """
    Multi-layer perceptron with one hidden layer.

    Parameters
    ----------
    dataset : Dataset
        Training examples.
    hidden : int
        Hidden width h, ``>= 1``.
    activation : {"tanh", "relu"}
        Hidden nonlinearity; the rectifier's derivative at 0 is 0.
    loss : {"mse", "ce"}
        Per-example loss.

    Raises
    ------
    PreconditionError
        If `hidden` < 1, the activation or loss is unknown, or the
        parameter count exceeds 5000.
    """

    def __init__(self, dataset, hidden: int, activation: Activation = "tanh", loss: MlpLoss = "ce"):
        super().__init__(dataset)
        if hidden < 1:
            raise PreconditionError(f"mlp_objective: hidden must be >= 1, got {hidden}")
        if activation not in ("tanh", "relu"):
            raise PreconditionError(f"mlp_objective: unknown activation '{activation}'")
        if loss not in ("mse", "ce"):
            raise PreconditionError(f"mlp_objective: unknown loss '{loss}'")
        self.hidden = hidden
        self.activation = activation
        self.loss = loss
        p = dataset.p
        self.n_outputs = dataset.targets.shape[1] if loss == "mse" and dataset.targets is not None else dataset.n_classes
        c = self.n_outputs
        self.dim = p * hidden + hidden + hidden * c + c
        if self.dim > MAX_DIM:
            raise PreconditionError(f"mlp_objective: {self.dim} parameters exceed the limit of {MAX_DIM}")
        self.tape = self._record(p, hidden, c)
        self._onehot = np.eye(dataset.n_classes)[dataset.labels]

    def _record(self, p: int, h: int, c: int):
        b = TapeBuilder(self.dim)
        w1 = b.param(0, (p, h))
        b1 = b.param(p * h, (h,))
        w2 = b.param(p * h + h, (h, c))
        b2 = b.param(p * h + h + h * c, (c,))
        features = b.data("X")
        targets = b.data("Y")
        scale = b.data("scale")
        pre = (features @ w1).add_row(b1)
        act = pre.tanh() if self.activation == "tanh" else pre.relu()
        out = (act @ w2).add_row(b2)
        if self.loss == "mse":
            diff = out - targets
            total = 0.5 * (diff * diff).sum()
        else:
            total = out.logsumexp(axis=1).sum() - (out * targets).sum()
        return b.build(total * scale)

    def _feeds(self, batch: Batch = None) -> dict:
        idx = self.rows(batch)
        if self.loss == "mse" and self.dataset.targets is not None:
            targets = self.dataset.targets[idx]
        else:
            targets = self._onehot[idx]
        return {"X": self.dataset.features[idx], "Y": targets, "scale": np.float64(1.0 / idx.size)}

    def value(self, x, batch: Batch = None) -> float:
        return self.tape.evaluate(self.check_x(x), self._feeds(batch)).value

    def grad(self, x, batch: Batch = None) -> np.ndarray:
        return self.tape.grad(self.check_x(x), self._feeds(batch))

    def value_and_grad(self, x, batch: Batch = None) -> tuple[float, np.ndarray]:
        return self.tape.value_and_grad(self.check_x(x), self._feeds(batch))

    def hvp(self, x, v, batch: Batch = None) -> np.ndarray:
        return self.tape.hvp(self.check_x(x), self.check_x(v, "v"), self._feeds(batch))

    def unpack(self, x) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Split a parameter vector into ``(W1, b1, W2, b2)``."""
        x = self.check_x(x)
        p, h, c = self.dataset.p, self.hidden, self.n_outputs
        cuts = np.cumsum([p * h, h, h * c])
        w1, b1, w2, b2 = np.split(x, cuts)
        return w1.reshape(p, h), b1, w2.reshape(h, c), b2

    def outputs(self, x, features: np.ndarray) -> np.ndarray:
        w1, b1, w2, b2 = self.unpack(x)
        pre = np.asarray(features, dtype=np.float64) @ w1 + b1
        act = np.tanh(pre) if self.activation == "tanh" else np.maximum(pre, 0.0)
        return act @ w2 + b2

    def predict(self, x, features: np.ndarray) -> np.ndarray:
        return np.argmax(self.outputs(x, features), axis=1)

    def rebind(self, dataset) -> "MlpObjective":
        return MlpObjective(dataset, self.hidden, self.activation, self.loss)


def mlp_objective(ds, hidden: int, activation: Activation = "tanh", loss: MlpLoss = "ce") -> MlpObjective:
    return MlpObjective(ds, hidden, activation, loss)


def init_mlp_params(obj: MlpObjective, rng: RngStream) -> np.ndarray:
    """Scaled Gaussian weights (``1/sqrt(fan_in)``) and zero biases."""
    p, h, c = obj.dataset.p, obj.hidden, obj.n_outputs
    w1 = rng.normal((p, h)) / np.sqrt(p)
    w2 = rng.normal((h, c)) / np.sqrt(h)
    return np.concatenate([w1.reshape(-1), np.zeros(h), w2.reshape(-1), np.zeros(c)])
