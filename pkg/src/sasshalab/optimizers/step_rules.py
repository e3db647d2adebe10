# src/sasshalab/optimizers/step_rules.py
"""
step_rules
==========

- **Module:** `src/sasshalab/optimizers/step_rules.py`

The update rules. Every rule mutates an `OptState` in place, advances
``state.t`` by one and returns the same state.

Overview
--------
- **sassha_step**:
  Sharpness-aware ascent ``ε* = ρ g/‖g‖``, gradient at ``x + ε*``,
  momentum with bias correction, and a lazily refreshed diagonal Hessian
  preconditioner ``D̄ = (D / (1-β₂ᵗ))^α`` built from the absolute Hutchinson
  estimate taken at the perturbed point. 2 GC per step, ``n_hutch`` HVPs on
  refresh steps.

- **msassha_step**:
  As `sassha_step` but perturbs along the previous momentum, so the
  unperturbed gradient is never computed. 1 GC per step.

- **first_order_step / sam_step**:
  Heavy-ball SGD and AdamW, optionally behind the SAM ascent step.

- **adahessian_step / sophiah_step**:
  Second-order baselines.

All rules use a single batch for every gradient and Hessian probe of a
step and apply weight decay as ``- η λ x`` on the pre-step parameters.
Non-finite gradients, Hessian estimates, preconditioners or parameters
raise `DivergenceError` naming the step and the quantity.
"""

import numpy as np

from sasshalab.estimators.hutchinson import hutchinson_diag
from sasshalab.exception.base_exceptions import DivergenceError, PreconditionError
from sasshalab.numkit.rng import RngStream
from sasshalab.objectives.base_objective import Batch, Objective
from sasshalab.optimizers.opt_state import OptState
from sasshalab.optimizers.optimizer_config import FirstOrderKind, OptimizerConfig
from sasshalab.optimizers.schedule import schedule_value

GRAD_NORM_FLOOR = 1e-16


def perturbation(g, rho: float) -> np.ndarray:
    """
    Ascent direction of length `rho` along `g`.

    Returns the zero vector when ``‖g‖ < 1e-16``.

    Raises
    ------
    PreconditionError
        If ``rho < 0``.
    DivergenceError
        If `g` has non-finite entries.
    """
    if rho < 0.0:
        raise PreconditionError(f"perturbation: rho must be >= 0, got {rho}")
    g = np.asarray(g, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise DivergenceError("non-finite perturbation direction", quantity="gradient")
    norm = float(np.linalg.norm(g))
    if norm < GRAD_NORM_FLOOR:
        return np.zeros_like(g)
    return rho * g / norm


def _ensure_finite(values, quantity: str, step: int) -> None:
    if not np.all(np.isfinite(values)):
        raise DivergenceError(f"non-finite {quantity}", step=step, quantity=quantity)


def _rates(state: OptState, cfg: OptimizerConfig) -> tuple[float, float]:
    lr = schedule_value(cfg.lr, state.t, cfg.total_steps)
    rho = 0.0 if cfg.rho is None else schedule_value(cfg.rho, state.t, cfg.total_steps)
    state.last_lr, state.last_rho = lr, rho
    return lr, rho


def _gradient(state: OptState, objective: Objective, x: np.ndarray, batch: Batch) -> np.ndarray:
    g = objective.grad(x, batch)
    state.gc_count += 1
    _ensure_finite(g, "gradient", state.t)
    return g


def _hessian_diag(
        state: OptState,
        objective: Objective,
        x: np.ndarray,
        batch: Batch,
        rng: RngStream,
        cfg: OptimizerConfig) -> np.ndarray:
    estimate = hutchinson_diag(objective.hvp_operator(x, batch), state.dim, cfg.n_hutch, rng)
    state.hvp_count += estimate.hvp_count
    _ensure_finite(estimate.values, "hessian_estimate", state.t)
    prev = state.prev_hessian
    if prev is not None and np.linalg.norm(prev) > 0.0:
        state.hessian_change = float(np.linalg.norm(estimate.values - prev) / np.linalg.norm(prev))
    state.prev_hessian = estimate.values.copy()
    state.t_hess = state.t
    return estimate.values


def _commit(state: OptState, x_new: np.ndarray) -> OptState:
    _ensure_finite(x_new, "parameters", state.t)
    state.last_update_norm = float(np.linalg.norm(x_new - state.x))
    state.x = x_new
    state.t += 1
    return state


def _refresh_preconditioner(state: OptState, h_hat: np.ndarray, cfg: OptimizerConfig) -> None:
    h = np.abs(h_hat) if cfg.hessian_abs else h_hat
    state.d = cfg.beta2 * state.d + (1.0 - cfg.beta2) * h
    d_hat = state.d / (1.0 - cfg.beta2 ** state.t)
    magnitude = np.sqrt(np.abs(d_hat)) if cfg.hessian_power == 0.5 else np.abs(d_hat) ** cfg.hessian_power
    d_bar = np.sign(d_hat) * magnitude
    match cfg.stabilizer:
        case "damping":
            d_bar = np.abs(d_bar) + cfg.stabilizer_value
        case "clipping":
            d_bar = np.maximum(d_bar, cfg.stabilizer_value)
    _ensure_finite(d_bar, "preconditioner", state.t)
    state.d_bar = d_bar


def _preconditioned_step(
        state: OptState,
        objective: Objective,
        batch: Batch,
        rng: RngStream,
        cfg: OptimizerConfig,
        x_pert: np.ndarray,
        lr: float) -> OptState:
    g_tilde = _gradient(state, objective, x_pert, batch)
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g_tilde
    m_hat = state.m / (1.0 - cfg.beta1 ** state.t)
    if cfg.refreshes_at(state.t):
        _refresh_preconditioner(state, _hessian_diag(state, objective, x_pert, batch, rng, cfg), cfg)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_new = state.x - lr * m_hat / (state.d_bar + cfg.eps) - lr * cfg.weight_decay * state.x
    return _commit(state, x_new)


def sassha_step(
        state: OptState,
        objective: Objective,
        batch: Batch,
        rng: RngStream,
        cfg: OptimizerConfig) -> OptState:
    """
    One sharpness-aware Hessian-preconditioned step.

    Parameters
    ----------
    state : OptState
        Mutated in place.
    objective : Objective
        Loss; evaluated only on `batch`.
    batch : Batch
        Mini-batch shared by both gradients and the Hessian probes.
    rng : RngStream
        Stream for the Hutchinson probes.
    cfg : OptimizerConfig
        Hyperparameters.

    Returns
    -------
    OptState
        The updated `state`.

    Raises
    ------
    DivergenceError
        If any gradient, estimate, preconditioner or parameter is non-finite.
    """
    lr, rho = _rates(state, cfg)
    g = _gradient(state, objective, state.x, batch)
    return _preconditioned_step(state, objective, batch, rng, cfg, state.x + perturbation(g, rho), lr)


def msassha_step(
        state: OptState,
        objective: Objective,
        batch: Batch,
        rng: RngStream,
        cfg: OptimizerConfig) -> OptState:
    """
    Momentum-perturbed variant: ``ε* = ρ m_{t-1}/‖m_{t-1}‖`` (zero while the
    momentum is zero). Otherwise identical to `sassha_step`.
    """
    lr, rho = _rates(state, cfg)
    return _preconditioned_step(state, objective, batch, rng, cfg, state.x + perturbation(state.m, rho), lr)


def _first_order_update(kind: FirstOrderKind, state: OptState, g: np.ndarray, cfg: OptimizerConfig, lr: float) -> OptState:
    decay = lr * cfg.weight_decay * state.x
    if kind == "sgdm":
        state.m = cfg.momentum * state.m + g
        return _commit(state, state.x - lr * state.m - decay)
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * g * g
    m_hat = state.m / (1.0 - cfg.beta1 ** state.t)
    v_hat = state.v / (1.0 - cfg.beta2 ** state.t)
    with np.errstate(divide="ignore", invalid="ignore"):
        return _commit(state, state.x - lr * m_hat / (np.sqrt(v_hat) + cfg.eps) - decay)


def first_order_step(
        kind: FirstOrderKind,
        state: OptState,
        objective: Objective,
        batch: Batch,
        cfg: OptimizerConfig) -> OptState:
    """
    Heavy-ball SGD (``m ← μm + g``) or AdamW with bias correction.
    1 GC per step.
    """
    lr, _ = _rates(state, cfg)
    return _first_order_update(kind, state, _gradient(state, objective, state.x, batch), cfg, lr)


def sam_step(
        base: FirstOrderKind,
        state: OptState,
        objective: Objective,
        batch: Batch,
        cfg: OptimizerConfig) -> OptState:
    """
    SAM: the `base` update applied with the gradient taken at
    ``x + ρ g/‖g‖`` on the same batch. 2 GC per step.
    """
    lr, rho = _rates(state, cfg)
    g = _gradient(state, objective, state.x, batch)
    g_tilde = _gradient(state, objective, state.x + perturbation(g, rho), batch)
    return _first_order_update(base, state, g_tilde, cfg, lr)


def adahessian_step(
        state: OptState,
        objective: Objective,
        batch: Batch,
        rng: RngStream,
        cfg: OptimizerConfig) -> OptState:
    """
    AdaHessian without spatial averaging: ``v`` averages ``Ĥ ⊙ Ĥ`` and the
    Hessian is re-estimated every step. 1 GC + ``n_hutch`` HVP per step.
    """
    lr, _ = _rates(state, cfg)
    g = _gradient(state, objective, state.x, batch)
    h_hat = _hessian_diag(state, objective, state.x, batch, rng, cfg)
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g
    state.v = cfg.beta2 * state.v + (1.0 - cfg.beta2) * h_hat * h_hat
    m_hat = state.m / (1.0 - cfg.beta1 ** state.t)
    state.d_bar = np.sqrt(state.v / (1.0 - cfg.beta2 ** state.t))
    _ensure_finite(state.d_bar, "preconditioner", state.t)
    with np.errstate(divide="ignore", invalid="ignore"):
        x_new = state.x - lr * m_hat / (state.d_bar + cfg.eps) - lr * cfg.weight_decay * state.x
    return _commit(state, x_new)


def sophia_clip(values: np.ndarray, threshold: float) -> np.ndarray:
    """``max(min(z, threshold), -threshold)`` elementwise."""
    return np.clip(values, -threshold, threshold)


def sophiah_step(
        state: OptState,
        objective: Objective,
        batch: Batch,
        rng: RngStream,
        cfg: OptimizerConfig) -> OptState:
    """
    Sophia-H: ``h ← β₂h + (1-β₂)max(Ĥ, ε_s)`` on refresh steps and the
    clipped update ``clip(m̂ / max(h, ε_s), ρ_clip)``.
    """
    lr, _ = _rates(state, cfg)
    g = _gradient(state, objective, state.x, batch)
    state.m = cfg.beta1 * state.m + (1.0 - cfg.beta1) * g
    m_hat = state.m / (1.0 - cfg.beta1 ** state.t)
    if cfg.refreshes_at(state.t):
        h_hat = _hessian_diag(state, objective, state.x, batch, rng, cfg)
        state.h = cfg.beta2 * state.h + (1.0 - cfg.beta2) * np.maximum(h_hat, cfg.sophia_floor)
    state.d_bar = np.maximum(state.h, cfg.sophia_floor)
    step = sophia_clip(m_hat / state.d_bar, cfg.sophia_clip)
    return _commit(state, state.x - lr * step - lr * cfg.weight_decay * state.x)
