# src/sasshalab/stability/ensemble.py
"""
ensemble
========

- **Module:** `src/sasshalab/stability/ensemble.py`

Finite ensembles of symmetric matrices modelling the stochastic Hessian
``H_ξ`` of a quadratic loss near a minimum.

Usage
-----
```python
e = Ensemble.from_diagonals([[1.0], [3.0]])
e.probs          # -> [0.5, 0.5]
e.commuting      # -> True
```
"""

import numpy as np
from pydantic import Field, model_validator

from sasshalab.exception.base_exceptions import DimensionMismatchError, PreconditionError
from sasshalab.lab_base_model import NumericModel
from sasshalab.numkit.linalg import as_symmat, symmetrize
from sasshalab.numkit.rng import RngStream

COMMUTE_TOL = 1e-10
PROB_TOL = 1e-12


class Ensemble(NumericModel):
    """
    Discrete distribution over symmetric d×d matrices.

    Attributes
    ----------
    mats : list of ndarray
        Members ``H_i``, all symmetric and of the same size.
    probs : ndarray
        Member probabilities, non-negative and summing to one.
    commuting : bool
        Set at construction: every pair commutes within 1e-10.
    """
    mats: list[np.ndarray]
    probs: np.ndarray
    commuting: bool = Field(default=False)

    @model_validator(mode="after")
    def _validate(self) -> "Ensemble":
        if not self.mats:
            raise PreconditionError("Ensemble: at least one member required")
        self.mats = [symmetrize(as_symmat(m, f"H[{i}]")) for i, m in enumerate(self.mats)]
        d = self.mats[0].shape[0]
        if any(m.shape != (d, d) for m in self.mats):
            raise DimensionMismatchError("Ensemble: members must share one dimension")
        self.probs = np.asarray(self.probs, dtype=np.float64).reshape(-1)
        if self.probs.size != len(self.mats):
            raise DimensionMismatchError(
                f"Ensemble: {self.probs.size} probabilities for {len(self.mats)} members")
        if np.any(self.probs < 0.0) or abs(self.probs.sum() - 1.0) > PROB_TOL * len(self.mats):
            raise PreconditionError("Ensemble: probabilities must be non-negative and sum to 1")
        self.commuting = all(
            np.max(np.abs(a @ b - b @ a)) <= COMMUTE_TOL
            for i, a in enumerate(self.mats) for b in self.mats[i + 1:])
        return self

    @property
    def d(self) -> int:
        return int(self.mats[0].shape[0])

    @property
    def size(self) -> int:
        return len(self.mats)

    @classmethod
    def uniform(cls, mats) -> "Ensemble":
        return cls(mats=list(mats), probs=np.full(len(mats), 1.0 / len(mats)))

    @classmethod
    def from_diagonals(cls, diags, probs=None) -> "Ensemble":
        """Diagonal members ``diag(diags[i])``; uniform probabilities when omitted."""
        mats = [np.diag(np.asarray(row, dtype=np.float64).reshape(-1)) for row in diags]
        if probs is None:
            return cls.uniform(mats)
        return cls(mats=mats, probs=np.asarray(probs, dtype=np.float64))

    @classmethod
    def commuting_random(
            cls,
            rng: RngStream,
            d: int,
            n_members: int,
            low: float = 0.0,
            high: float = 1.0) -> "Ensemble":
        """
        Members sharing one random orthonormal eigenbasis, with spectra drawn
        uniformly from ``[low, high]``, and uniform probabilities.

        Raises
        ------
        PreconditionError
            If ``d < 1``, ``n_members < 1`` or ``low > high``.
        """
        if d < 1 or n_members < 1 or low > high:
            raise PreconditionError("commuting_random: need d >= 1, n_members >= 1 and low <= high")
        q, r = np.linalg.qr(rng.normal((d, d)))
        q = q * np.where(np.diag(r) < 0.0, -1.0, 1.0)
        spectra = rng.uniform(low, high, (n_members, d))
        return cls.uniform([symmetrize((q * lam) @ q.T) for lam in spectra])

    def sample_indices(self, rng: RngStream, size: int) -> np.ndarray:
        """Member indices drawn i.i.d. from `probs`."""
        return rng.generator.choice(self.size, size=size, p=self.probs)

    def surrogate_maps(self, eta: float, rho: float, eps: float) -> np.ndarray:
        """Stacked one-step maps ``I - (η/ε) H_i (I + ρ H_i)``."""
        eye = np.eye(self.d)
        return np.stack([eye - (eta / eps) * (h + rho * h @ h) for h in self.mats])

    def enumerate_one_step(self, x0, eta: float, rho: float, eps: float) -> float:
        """Exact ``E‖x_1‖²`` of the surrogate dynamics from `x0`, by enumeration."""
        x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
        if x0.size != self.d:
            raise DimensionMismatchError(f"enumerate_one_step: x0 has length {x0.size}, expected {self.d}")
        nxt = self.surrogate_maps(eta, rho, eps) @ x0
        return float(self.probs @ np.sum(nxt * nxt, axis=1))
