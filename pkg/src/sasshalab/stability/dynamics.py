# src/sasshalab/stability/dynamics.py
"""
dynamics
========

- **Module:** `src/sasshalab/stability/dynamics.py`

Monte-Carlo simulation of the stochastic linear dynamics around a minimum.

Overview
--------
- **simulate_surrogate**:
  ``x_{t+1} = x_t - (η/ε) H_ξ (I + ρH_ξ) x_t``, the dynamics whose second
  moment is governed exactly by the stability matrix.

- **simulate_linearized_sassha**:
  ``x_{t+1} = x_t - η (1 / (sqrt(diag H_ξ) + ε)) ⊙ H_ξ (x_t + ρ H_ξ x_t)``
  with the true per-sample diagonal scaling.

Squared norms above 1e100 are clamped back to 1e100 and the run is flagged
as diverged.
"""

from typing import Optional

import numpy as np

from sasshalab.exception.base_exceptions import DimensionMismatchError, PreconditionError
from sasshalab.lab_base_model import NumericModel
from sasshalab.numkit.rng import RngStream
from sasshalab.stability.ensemble import Ensemble

DIVERGENCE_CLAMP = 1e100


class SimulationResult(NumericModel):
    """
    Mean squared-norm trajectory.

    Attributes
    ----------
    mean_sq_norm : ndarray
        ``E‖x_t‖²`` for ``t = 0..T`` (length ``T + 1``).
    diverged : bool
        Some trajectory hit the clamp.
    diverged_step : int, optional
        First step at which the clamp fired.
    """
    mean_sq_norm: np.ndarray
    diverged: bool = False
    diverged_step: Optional[int] = None

    def ratio(self) -> float:
        """``E‖x_T‖² / ‖x_0‖²``."""
        return float(self.mean_sq_norm[-1] / self.mean_sq_norm[0])


def _start(e: Ensemble, x0, T: int, n_traj: int) -> np.ndarray:
    if T < 1 or n_traj < 1:
        raise PreconditionError(f"simulation: need T >= 1 and n_traj >= 1, got T={T}, n_traj={n_traj}")
    x0 = np.asarray(x0, dtype=np.float64).reshape(-1)
    if x0.size != e.d:
        raise DimensionMismatchError(f"simulation: x0 has length {x0.size}, expected {e.d}")
    return np.tile(x0, (n_traj, 1))


def _run(maps: np.ndarray, e: Ensemble, x: np.ndarray, T: int, rng: RngStream) -> SimulationResult:
    trace = np.empty(T + 1)
    trace[0] = float(np.mean(np.sum(x * x, axis=1)))
    diverged_step = None
    for t in range(1, T + 1):
        idx = e.sample_indices(rng, x.shape[0])
        with np.errstate(over="ignore", invalid="ignore"):
            x = np.einsum("nij,nj->ni", maps[idx], x)
            sq = np.sum(x * x, axis=1)
        blown = ~np.isfinite(sq) | (sq > DIVERGENCE_CLAMP)
        if np.any(blown):
            diverged_step = diverged_step or t
            rescale = blown & np.isfinite(sq)
            x[rescale] *= np.sqrt(DIVERGENCE_CLAMP / sq[rescale])[:, None]
            x[blown & ~rescale] = np.sqrt(DIVERGENCE_CLAMP / x.shape[1])
            sq = np.sum(x * x, axis=1)
        trace[t] = float(np.mean(sq))
    return SimulationResult(mean_sq_norm=trace, diverged=diverged_step is not None, diverged_step=diverged_step)


def simulate_surrogate(
        e: Ensemble,
        eta: float,
        rho: float,
        eps: float,
        x0,
        T: int,
        n_traj: int,
        rng: RngStream) -> SimulationResult:
    """
    Simulate `n_traj` independent trajectories of the surrogate dynamics
    for `T` steps, drawing ``H_ξ`` i.i.d. per step and per trajectory.

    Raises
    ------
    PreconditionError
        If ``eps <= 0``, ``T < 1`` or ``n_traj < 1``.
    """
    if not eps > 0.0:
        raise PreconditionError(f"simulate_surrogate: eps must be > 0, got {eps}")
    return _run(e.surrogate_maps(eta, rho, eps), e, _start(e, x0, T, n_traj), T, rng)


def linearized_maps(e: Ensemble, eta: float, rho: float, eps: float) -> np.ndarray:
    """
    Stacked maps ``I - η diag(1/(sqrt(diag H_i)+ε)) H_i (I + ρH_i)``.

    Raises
    ------
    PreconditionError
        If any member has a negative diagonal entry or a zero denominator.
    """
    eye = np.eye(e.d)
    maps = []
    for i, h in enumerate(e.mats):
        diag = np.diag(h)
        if np.any(diag < 0.0):
            raise PreconditionError(f"simulate_linearized_sassha: member {i} has a negative diagonal entry")
        denom = np.sqrt(diag) + eps
        if np.any(denom <= 0.0):
            raise PreconditionError(f"simulate_linearized_sassha: member {i} has a zero preconditioner entry")
        maps.append(eye - eta * (h @ (eye + rho * h)) / denom[:, None])
    return np.stack(maps)


def simulate_linearized_sassha(
        e: Ensemble,
        eta: float,
        rho: float,
        eps: float,
        x0,
        T: int,
        rng: RngStream,
        n_traj: int = 1) -> SimulationResult:
    """
    Simulate the linearized sharpness-aware preconditioned update.

    Raises
    ------
    PreconditionError
        If a member's diagonal is negative (square root undefined).
    """
    return _run(linearized_maps(e, eta, rho, eps), e, _start(e, x0, T, n_traj), T, rng)
