# src/sasshalab/optimizers/opt_state.py
"""
opt_state
=========

- **Module:** `src/sasshalab/optimizers/opt_state.py`

Mutable per-run optimizer state. One state is owned by one run and updated
in place, step by step.
"""

import math
from typing import Optional

import numpy as np

from sasshalab.lab_base_model import NumericModel
from sasshalab.numkit.linalg import as_vec


class OptState(NumericModel):
    """
    Optimizer state.

    Attributes
    ----------
    x : ndarray
        Current parameters.
    m : ndarray
        Gradient moving average (heavy-ball buffer for sgdm).
    d : ndarray
        Hessian moving average D (second-order methods).
    d_bar : ndarray
        Preconditioner D̄, frozen between Hessian refreshes.
    v : ndarray
        Second-moment average (adamw, adahessian).
    h : ndarray
        Sophia-H Hessian average.
    t : int
        Index of the next step, starting at 1.
    t_hess : int
        Step of the most recent Hessian refresh (0 before the first).
    gc_count, hvp_count : int
        Gradient computations and Hessian-vector products spent so far.
    hessian_change : float
        ``‖Ĥ_new - Ĥ_prev‖ / ‖Ĥ_prev‖`` at the latest refresh; NaN until two
        refreshes happened.
    prev_hessian : ndarray, optional
        Estimate from the latest refresh.
    last_update_norm : float
        ``‖x_{t+1} - x_t‖`` of the latest step.
    last_lr, last_rho : float
        Schedule values used by the latest step.
    """
    x: np.ndarray
    m: np.ndarray
    d: np.ndarray
    d_bar: np.ndarray
    v: np.ndarray
    h: np.ndarray
    t: int = 1
    t_hess: int = 0
    gc_count: int = 0
    hvp_count: int = 0
    hessian_change: float = math.nan
    prev_hessian: Optional[np.ndarray] = None
    last_update_norm: float = 0.0
    last_lr: float = 0.0
    last_rho: float = 0.0

    @classmethod
    def init(cls, x0) -> "OptState":
        """Fresh state at `x0` with zero-initialised moving averages."""
        x = as_vec(x0, name="x0").copy()
        return cls(
            x=x, m=np.zeros_like(x), d=np.zeros_like(x), d_bar=np.zeros_like(x),
            v=np.zeros_like(x), h=np.zeros_like(x))

    @property
    def dim(self) -> int:
        return int(self.x.size)

    def steps_taken(self) -> int:
        return self.t - 1
