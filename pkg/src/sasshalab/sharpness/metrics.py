# src/sasshalab/sharpness/metrics.py
"""
metrics
=======

- **Module:** `src/sasshalab/sharpness/metrics.py`

Sharpness measures evaluated at a candidate solution on the full batch.

Overview
--------
- **lambda_max**: dominant Hessian eigenvalue by power iteration.
- **hessian_trace**: Hutchinson estimate of ``tr(∇²f)``.
- **delta_l_grad**: ``f(x + ρ ∇f/‖∇f‖) - f(x)``.
- **delta_l_avg**: Monte-Carlo mean of ``f(x + ρ u) - f(x)`` over uniform
  unit directions ``u``.
- **hessian_sensitivity**: largest change of the diagonal Hessian estimate
  under a ρ-perturbation, with the same probes at both points.
- **sharpness_report**: all of the above in one `SharpnessReport`.

Usage
-----
```python
report = sharpness_report(objective, x, rng=RngStream(7).child("metrics"))
report.lambda_max, report.trace
```
"""

import math

import numpy as np

from sasshalab.estimators.hutchinson import hutchinson_diag, hutchinson_trace
from sasshalab.exception.base_exceptions import PreconditionError
from sasshalab.lab_base_model import NumericModel
from sasshalab.numkit.linalg import PowerIterationResult, power_iteration
from sasshalab.numkit.rng import RngStream, rademacher, unit_sphere_direction
from sasshalab.objectives.base_objective import Objective

DEFAULT_RHO = 0.1
DEFAULT_N_MC = 100
DEFAULT_TRACE_SAMPLES = 100
NEAR_CRITICAL_NORM = 1e-12


class GradientSharpness(NumericModel):
    """Loss increase along the normalized gradient and the near-critical flag."""
    value: float
    near_critical: bool


class SharpnessReport(NumericModel):
    """
    Sharpness metrics at one point.

    Attributes
    ----------
    lambda_max : float
        Dominant Hessian eigenvalue.
    trace : float
        Hutchinson trace estimate.
    dl_grad : float
        Loss increase along the normalized gradient.
    dl_avg : float
        Mean loss increase along random unit directions.
    rho : float
        Perturbation radius.
    n_mc : int
        Random directions averaged for `dl_avg`.
    power_converged : bool
        False when power iteration hit its iteration cap.
    near_critical : bool
        True when the gradient norm was below 1e-12 (``dl_grad`` is 0).
    sensitivity : float, optional
        Hessian sensitivity, when requested.
    """
    lambda_max: float
    trace: float
    dl_grad: float
    dl_avg: float
    rho: float
    n_mc: int
    power_converged: bool
    near_critical: bool
    sensitivity: float = math.nan

    def flags(self) -> str:
        parts = []
        if not self.power_converged:
            parts.append("power_not_converged")
        if self.near_critical:
            parts.append("near_critical")
        return "|".join(parts)


def lambda_max_result(
        objective: Objective,
        x,
        rng: RngStream = None,
        max_iters: int = 200,
        tol: float = 1e-8) -> PowerIterationResult:
    """Power iteration on the full-batch Hessian at `x`."""
    return power_iteration(objective.hvp_operator(x), objective.dim, max_iters, tol, rng)


def lambda_max(objective: Objective, x, rng: RngStream = None) -> float:
    """
    Dominant eigenvalue of ``∇²f(x)``.

    The value is reported even when power iteration does not converge; use
    `lambda_max_result` to inspect the convergence flag.
    """
    return lambda_max_result(objective, x, rng).eigenvalue


def hessian_trace(objective: Objective, x, n_samples: int, rng: RngStream) -> float:
    """Hutchinson estimate of ``tr(∇²f(x))`` on the full batch."""
    return hutchinson_trace(objective.hvp_operator(x), objective.dim, n_samples, rng)


def gradient_sharpness(objective: Objective, x, rho: float = DEFAULT_RHO) -> GradientSharpness:
    """
    ``f(x + ρ g/‖g‖) - f(x)`` with ``g = ∇f(x)``.

    Raises
    ------
    PreconditionError
        If ``rho <= 0``.
    """
    if not rho > 0.0:
        raise PreconditionError(f"delta_l_grad: rho must be > 0, got {rho}")
    x = objective.check_x(x)
    base, g = objective.value_and_grad(x)
    norm = float(np.linalg.norm(g))
    if norm < NEAR_CRITICAL_NORM:
        return GradientSharpness(value=0.0, near_critical=True)
    return GradientSharpness(value=objective.value(x + rho * g / norm) - base, near_critical=False)


def delta_l_grad(objective: Objective, x, rho: float = DEFAULT_RHO) -> float:
    return gradient_sharpness(objective, x, rho).value


def delta_l_avg(objective: Objective, x, rho: float = DEFAULT_RHO, n_mc: int = DEFAULT_N_MC, rng: RngStream = None) -> float:
    """
    Mean loss increase over `n_mc` uniform unit directions scaled by `rho`.

    Raises
    ------
    PreconditionError
        If ``n_mc < 1`` or no stream is given.
    """
    if n_mc < 1:
        raise PreconditionError(f"delta_l_avg: n_mc must be >= 1, got {n_mc}")
    if rng is None:
        raise PreconditionError("delta_l_avg: a random stream is required")
    x = objective.check_x(x)
    base = objective.value(x)
    total = 0.0
    for _ in range(n_mc):
        total += objective.value(x + rho * unit_sphere_direction(rng, objective.dim)) - base
    return total / n_mc


def hessian_sensitivity(
        objective: Objective,
        x,
        rho: float = DEFAULT_RHO,
        n_dirs: int = 10,
        n_probes: int = 1,
        rng: RngStream = None) -> float:
    """
    ``max_δ ‖diag Ĥ(x + ρ δ/‖δ‖) - diag Ĥ(x)‖₂`` over `n_dirs` Gaussian
    directions.

    The same `n_probes` Rademacher probes are used at `x` and at every
    perturbed point, so a constant Hessian yields exactly 0.

    Raises
    ------
    PreconditionError
        If ``n_dirs < 1``, ``n_probes < 1`` or no stream is given.
    """
    if n_dirs < 1 or n_probes < 1:
        raise PreconditionError(f"hessian_sensitivity: n_dirs and n_probes must be >= 1, got {n_dirs}, {n_probes}")
    if rng is None:
        raise PreconditionError("hessian_sensitivity: a random stream is required")
    x = objective.check_x(x)
    d = objective.dim
    probes = np.stack([rademacher(rng, d) for _ in range(n_probes)])
    base = hutchinson_diag(objective.hvp_operator(x), d, probes=probes).values
    worst = 0.0
    for _ in range(n_dirs):
        moved = x + rho * unit_sphere_direction(rng, d)
        shifted = hutchinson_diag(objective.hvp_operator(moved), d, probes=probes).values
        worst = max(worst, float(np.linalg.norm(shifted - base)))
    return worst


def sharpness_report(
        objective: Objective,
        x,
        rho: float = DEFAULT_RHO,
        n_mc: int = DEFAULT_N_MC,
        n_trace: int = DEFAULT_TRACE_SAMPLES,
        rng: RngStream = None,
        sensitivity_dirs: int = 0,
        sensitivity_probes: int = 1) -> SharpnessReport:
    """
    Every sharpness metric at `x`, each drawing from its own child stream.

    Parameters
    ----------
    objective : Objective
        Loss evaluated on the full batch.
    x : array_like
        Candidate solution.
    rho : float, default 0.1
        Radius for ``dl_grad``, ``dl_avg`` and the sensitivity probe.
    n_mc : int, default 100
        Directions for ``dl_avg``.
    n_trace : int, default 100
        Hutchinson probes for the trace.
    rng : RngStream, optional
        Parent stream; ``RngStream(0)`` when omitted.
    sensitivity_dirs : int, default 0
        Directions for `hessian_sensitivity`; skipped when 0.
    sensitivity_probes : int, default 1
        Probes for `hessian_sensitivity`.
    """
    rng = rng or RngStream(0)
    power = lambda_max_result(objective, x, rng.child("power"))
    gradient = gradient_sharpness(objective, x, rho)
    sensitivity = math.nan
    if sensitivity_dirs > 0:
        sensitivity = hessian_sensitivity(
            objective, x, rho, sensitivity_dirs, sensitivity_probes, rng.child("sensitivity"))
    return SharpnessReport(
        lambda_max=power.eigenvalue,
        trace=hessian_trace(objective, x, n_trace, rng.child("trace")),
        dl_grad=gradient.value,
        dl_avg=delta_l_avg(objective, x, rho, n_mc, rng.child("avg")),
        rho=rho,
        n_mc=n_mc,
        power_converged=power.converged,
        near_critical=gradient.near_critical,
        sensitivity=sensitivity)
