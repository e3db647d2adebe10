# src/sasshalab/objectives/logistic.py
"""
logistic
========

- **Module:** `src/sasshalab/objectives/logistic.py`

L2-regularised binary logistic regression with analytic derivatives.

With margins ``z = Xw (+ b)``, labels ``y ∈ {0, 1}`` and ``σ`` the logistic
function, the mean loss over a batch ``B`` is

``(1/|B|) Σ [log(1 + e^z) - y z] + (l2/2)‖x‖²``

The Hessian ``(1/|B|) Xᵀ diag(σ(1-σ)) X + l2 I`` is exactly the Gauss-Newton
matrix, so `hvp` is computed in closed form.
"""

import numpy as np

from sasshalab.exception.base_exceptions import PreconditionError
from sasshalab.objectives.base_objective import Batch, SupervisedObjective


def _sigmoid(z: np.ndarray) -> np.ndarray:
    return np.exp(-np.logaddexp(0.0, -z))


class LogisticRegression(SupervisedObjective):
    """
    Logistic regression objective.

    Parameters
    ----------
    dataset : Dataset
        Examples with labels in ``{0, 1}``.
    l2 : float, default 0.0
        Ridge coefficient, ``>= 0``.
    fit_intercept : bool, default False
        Append a bias as the last parameter (not regularised).

    Raises
    ------
    PreconditionError
        If any label is outside ``{0, 1}`` or `l2` is negative.
    """

    def __init__(self, dataset, l2: float = 0.0, fit_intercept: bool = False):
        super().__init__(dataset)
        if dataset.n_classes != 2 or np.any((dataset.labels != 0) & (dataset.labels != 1)):
            raise PreconditionError("logistic_regression: labels must be binary (0/1)")
        if l2 < 0.0:
            raise PreconditionError(f"logistic_regression: l2 must be >= 0, got {l2}")
        self.l2 = float(l2)
        self.fit_intercept = fit_intercept
        self.dim = dataset.p + (1 if fit_intercept else 0)

    def _penalty_mask(self) -> np.ndarray:
        mask = np.ones(self.dim)
        if self.fit_intercept:
            mask[-1] = 0.0
        return mask

    def _margins(self, x: np.ndarray, features: np.ndarray) -> np.ndarray:
        if self.fit_intercept:
            return features @ x[:-1] + x[-1]
        return features @ x

    def _design(self, features: np.ndarray) -> np.ndarray:
        if self.fit_intercept:
            return np.hstack([features, np.ones((features.shape[0], 1))])
        return features

    def value(self, x, batch: Batch = None) -> float:
        x = self.check_x(x)
        idx = self.rows(batch)
        z = self._margins(x, self.dataset.features[idx])
        y = self.dataset.labels[idx]
        loss = np.mean(np.logaddexp(0.0, z) - y * z)
        return float(loss + 0.5 * self.l2 * np.sum(self._penalty_mask() * x * x))

    def grad(self, x, batch: Batch = None) -> np.ndarray:
        x = self.check_x(x)
        idx = self.rows(batch)
        design = self._design(self.dataset.features[idx])
        residual = _sigmoid(self._margins(x, self.dataset.features[idx])) - self.dataset.labels[idx]
        return design.T @ residual / idx.size + self.l2 * self._penalty_mask() * x

    def hvp(self, x, v, batch: Batch = None) -> np.ndarray:
        x = self.check_x(x)
        v = self.check_x(v, "v")
        idx = self.rows(batch)
        design = self._design(self.dataset.features[idx])
        s = _sigmoid(self._margins(x, self.dataset.features[idx]))
        return design.T @ (s * (1.0 - s) * (design @ v)) / idx.size + self.l2 * self._penalty_mask() * v

    def predict(self, x, features: np.ndarray) -> np.ndarray:
        return (self._margins(self.check_x(x), np.asarray(features, dtype=np.float64)) > 0.0).astype(np.int64)

    def rebind(self, dataset) -> "LogisticRegression":
        return LogisticRegression(dataset, self.l2, self.fit_intercept)


def logistic_regression(ds, l2: float = 0.0, fit_intercept: bool = False) -> LogisticRegression:
    return LogisticRegression(ds, l2, fit_intercept)
