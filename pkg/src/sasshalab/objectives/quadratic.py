# src/sasshalab/objectives/quadratic.py
"""
quadratic
=========

- **Module:** `src/sasshalab/objectives/quadratic.py`

Deterministic quadratic objectives ``f(x) = ½ xᵀHx + bᵀx``.
"""

import numpy as np

from sasshalab.exception.base_exceptions import DimensionMismatchError, PreconditionError
from sasshalab.numkit.linalg import as_symmat, as_vec, symmetrize
from sasshalab.numkit.rng import RngStream
from sasshalab.objectives.base_objective import Batch, Objective


class QuadraticObjective(Objective):
    """
    Quadratic with analytic gradient ``Hx + b`` and Hessian-vector product
    ``Hv``. The batch argument is accepted and ignored.

    Parameters
    ----------
    hessian : array_like
        Symmetric d×d matrix.
    linear : array_like, optional
        Linear term ``b``; zero when omitted.
    """

    def __init__(self, hessian, linear=None):
        self.hessian = as_symmat(hessian, "H")
        self.dim = self.hessian.shape[0]
        self.linear = np.zeros(self.dim) if linear is None else as_vec(linear, name="b")
        if self.linear.size != self.dim:
            raise DimensionMismatchError(
                f"quadratic: b has length {self.linear.size}, H is {self.dim}x{self.dim}")

    def value(self, x, batch: Batch = None) -> float:
        x = self.check_x(x)
        return float(0.5 * x @ self.hessian @ x + self.linear @ x)

    def grad(self, x, batch: Batch = None) -> np.ndarray:
        return self.hessian @ self.check_x(x) + self.linear

    def hvp(self, x, v, batch: Batch = None) -> np.ndarray:
        self.check_x(x)
        return self.hessian @ self.check_x(v, "v")

    def minimizer(self) -> np.ndarray:
        """Solution of ``Hx = -b`` (requires `H` nonsingular)."""
        return np.linalg.solve(self.hessian, -self.linear)


def quadratic_objective(H, b=None) -> QuadraticObjective:
    return QuadraticObjective(H, b)


def random_spd(rng: RngStream, d: int, condition: float = 100.0, scale: float = 1.0) -> np.ndarray:
    """
    Random symmetric positive definite matrix with eigenvalues log-spaced in
    ``[scale / condition, scale]`` and a random orthonormal eigenbasis.
    """
    if d < 1 or condition < 1.0:
        raise PreconditionError("random_spd: need d >= 1 and condition >= 1")
    q, r = np.linalg.qr(rng.normal((d, d)))
    q = q * np.sign(np.diag(r))
    spectrum = scale * np.logspace(-np.log10(condition), 0.0, d)
    return symmetrize((q * spectrum) @ q.T)


def random_quadratic(rng: RngStream, d: int, condition: float = 100.0, scale: float = 1.0) -> QuadraticObjective:
    """Convex quadratic with random SPD Hessian and random linear term."""
    hessian = random_spd(rng, d, condition, scale)
    return QuadraticObjective(hessian, rng.normal(d))
