# src/sasshalab/objectives/mixture.py
"""
mixture
=======

- **Module:** `src/sasshalab/objectives/mixture.py`

Two-dimensional toy landscape: the negative density of a mixture of
bivariate Gaussians. Each component carves a basin whose curvature is set
by its covariance, which makes the landscape a direct probe of whether an
optimizer settles in sharp or flat minima.

For component ``i`` with ``d = x - μ_i`` and density ``N_i``:

- ``∇N_i = -N_i Σ_i⁻¹ d``
- ``∇²N_i = N_i (Σ_i⁻¹ d dᵀ Σ_i⁻¹ - Σ_i⁻¹)``

and ``f = -Σ w_i N_i``.

Usage
-----
```python
landscape = gaussian_mixture_landscape(MixtureSpec.canonical())
landscape.nearest_component([1.9, 0.1])   # -> 0, the sharp basin
```
"""

import numpy as np
from pydantic import BaseModel, field_validator, model_validator

from sasshalab.exception.base_exceptions import PreconditionError
from sasshalab.objectives.base_objective import Batch, Objective

SHARP_COMPONENT = 0
FLAT_COMPONENT = 1


class MixtureSpec(BaseModel):
    """
    Mixture parameters.

    Attributes
    ----------
    weights : list[float]
        Positive component weights (need not sum to one).
    means : list[tuple[float, float]]
        Component means in the plane.
    covariances : list of 2×2 nested lists
        Symmetric positive definite covariances.
    """
    weights: list[float]
    means: list[tuple[float, float]]
    covariances: list[tuple[tuple[float, float], tuple[float, float]]]

    @field_validator("weights")
    @classmethod
    def _positive_weights(cls, weights: list[float]) -> list[float]:
        if any(w <= 0.0 for w in weights):
            raise ValueError("mixture weights must be positive")
        return weights

    @model_validator(mode="after")
    def _check_components(self) -> "MixtureSpec":
        k = len(self.weights)
        if k < 2:
            raise ValueError("a mixture needs at least two components")
        if len(self.means) != k or len(self.covariances) != k:
            raise ValueError("weights, means and covariances must have equal length")
        for i, cov in enumerate(self.covariances):
            c = np.asarray(cov, dtype=np.float64)
            if abs(c[0, 1] - c[1, 0]) > 1e-12 * max(np.abs(c).max(), 1.0):
                raise ValueError(f"covariance {i} is not symmetric")
            if c[0, 0] <= 0.0 or np.linalg.det(c) <= 0.0:
                raise ValueError(f"covariance {i} is not positive definite")
        return self

    @classmethod
    def canonical(cls) -> "MixtureSpec":
        """
        Canonical two-basin landscape: a deep sharp basin at (2, 0) with
        covariance 0.05·I and a flat basin at (-2, 0) with covariance I.
        """
        return cls(
            weights=[0.7, 0.5],
            means=[(2.0, 0.0), (-2.0, 0.0)],
            covariances=[((0.05, 0.0), (0.0, 0.05)), ((1.0, 0.0), (0.0, 1.0))])


class GaussianMixtureLandscape(Objective):
    """
    ``f(x) = -Σ w_i N(x; μ_i, Σ_i)`` with analytic derivatives (dim = 2).

    Parameters
    ----------
    spec : MixtureSpec
        Validated mixture parameters.
    """
    dim = 2

    def __init__(self, spec: MixtureSpec):
        self.spec = spec
        self.weights = np.asarray(spec.weights, dtype=np.float64)
        self.means = np.asarray(spec.means, dtype=np.float64)
        covs = np.asarray(spec.covariances, dtype=np.float64)
        dets = np.linalg.det(covs)
        if np.any(dets <= 0.0):
            raise PreconditionError("mixture: singular covariance")
        self.precisions = np.linalg.inv(covs)
        self.norms = 1.0 / (2.0 * np.pi * np.sqrt(dets))

    def _densities(self, x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        diffs = x[None, :] - self.means
        scaled = np.einsum("kij,kj->ki", self.precisions, diffs)
        quad = np.einsum("ki,ki->k", diffs, scaled)
        return self.weights * self.norms * np.exp(-0.5 * quad), scaled

    def value(self, x, batch: Batch = None) -> float:
        dens, _ = self._densities(self.check_x(x))
        return float(-dens.sum())

    def grad(self, x, batch: Batch = None) -> np.ndarray:
        dens, scaled = self._densities(self.check_x(x))
        return dens @ scaled

    def hessian(self, x) -> np.ndarray:
        """Full 2×2 Hessian at `x`."""
        dens, scaled = self._densities(self.check_x(x))
        outer = np.einsum("ki,kj->kij", scaled, scaled)
        return -np.einsum("k,kij->ij", dens, outer - self.precisions)

    def hvp(self, x, v, batch: Batch = None) -> np.ndarray:
        return self.hessian(x) @ self.check_x(v, "v")

    def nearest_component(self, x) -> int:
        """Index of the component mean closest to `x` (basin membership)."""
        x = self.check_x(x)
        return int(np.argmin(np.linalg.norm(self.means - x[None, :], axis=1)))

    def trace_at_mean(self, i: int) -> float:
        return float(np.trace(self.hessian(self.means[i])))


def gaussian_mixture_landscape(spec: MixtureSpec) -> GaussianMixtureLandscape:
    return GaussianMixtureLandscape(spec)
