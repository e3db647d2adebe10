# src/sasshalab/stability/analysis.py
"""
analysis
========

- **Module:** `src/sasshalab/stability/analysis.py`

Linear stability of the sharpness-aware preconditioned dynamics near a
minimum, for a stochastic Hessian ``H_ξ`` drawn from an `Ensemble`.

Overview
--------
- **moments**:
  ``E[H], E[H²], E[H³], E[H⁴]``.

- **stability_matrix**:
  With ``H = E[H_ξ]``, ``a = η/ε``:

  ``M = (I - aH - aρH²)² + (a² - 2aρ)(E H² - H²) + 2a²ρ(E H³ - H³) + a²ρ²(E H⁴ - H⁴)``

  which equals ``E[(I - aH_ξ(I + ρH_ξ))²]`` so that
  ``E[‖x_1‖² | x_0] = x_0ᵀ M x_0``. Linearly stable iff ``λ_max(M) <= 1``.

- **necessary_conditions**:
  Sharpness ``a = λ_max(E H)`` and non-uniformities ``s_k``, the real k-th
  root of ``λ_max(E[H^k] - E[H]^k)``, checked against

  1. ``a(1 + ρa) <= 2ε/η``
  2. ``λ_max(gap₂) = s₂² <= ε² / (η² - 2ηρε)``
  3. ``λ_max(gap₃) = s₃³ <= ε² / (2η²ρ)``
  4. ``λ_max(gap₄) = s₄⁴ <= ε² / (η²ρ²)``

  Each inequality compares the gap's top eigenvalue, which is what
  ``λ_max(M) <= 1`` bounds term by term for commuting ensembles of positive
  semidefinite members. Condition 2 is inapplicable when
  ``η² - 2ηρε <= 0``; conditions 3 and 4 when ``ρ = 0``.
"""

import math
from typing import Optional

import numpy as np

from sasshalab.exception.base_exceptions import PreconditionError
from sasshalab.lab_base_model import NumericModel
from sasshalab.numkit.linalg import jacobi_eigs, lambda_max_sym, symmetrize
from sasshalab.stability.ensemble import Ensemble

INDEFINITE_TOL = 1e-12


def moments(e: Ensemble) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
    """Probability-weighted ``(E[H], E[H²], E[H³], E[H⁴])``, each symmetric."""
    out = [np.zeros((e.d, e.d)) for _ in range(4)]
    for p, h in zip(e.probs, e.mats):
        power = h
        for k in range(4):
            out[k] += p * power
            power = power @ h
    return tuple(symmetrize(m) for m in out)


class StabilityMatrix(NumericModel):
    """``M`` and its largest eigenvalue."""
    matrix: np.ndarray
    lambda_max: float


def _check_parameters(eta: float, rho: float, eps: float) -> None:
    if not eps > 0.0 or eta < 0.0 or rho < 0.0:
        raise PreconditionError(f"stability: need eps > 0, eta >= 0, rho >= 0 (got eta={eta}, rho={rho}, eps={eps})")


def stability_matrix(e: Ensemble, eta: float, rho: float, eps: float) -> StabilityMatrix:
    """
    Assemble the second-moment map ``M`` of the surrogate dynamics.

    Raises
    ------
    PreconditionError
        If ``eps <= 0`` or `eta`, `rho` are negative.
    """
    _check_parameters(eta, rho, eps)
    h1, h2, h3, h4 = moments(e)
    a = eta / eps
    mean_sq = h1 @ h1
    mean_cube = mean_sq @ h1
    mean_quart = mean_sq @ mean_sq
    drift = np.eye(e.d) - a * h1 - a * rho * mean_sq
    m = (drift @ drift
         + (a * a - 2.0 * a * rho) * (h2 - mean_sq)
         + 2.0 * a * a * rho * (h3 - mean_cube)
         + a * a * rho * rho * (h4 - mean_quart))
    m = symmetrize(m)
    return StabilityMatrix(matrix=m, lambda_max=lambda_max_sym(m))


class StabilityReport(NumericModel):
    """
    Outcome of `necessary_conditions`.

    Attributes
    ----------
    a : float
        ``λ_max(E[H])``.
    s2, s3, s4 : float
        Non-uniformities (real k-th roots of the gap maxima).
    gap_max : list[float]
        ``λ_max(E[H^k] - E[H]^k)`` for k = 2, 3, 4.
    indefinite : list[bool]
        Whether each gap has an eigenvalue below ``-1e-12``.
    bounds : list[float or None]
        Right-hand sides of the four conditions; ``None`` when inapplicable.
    conditions : list[bool or None]
        Outcome of each condition; ``None`` when inapplicable.
    lambda_max_M : float
        ``λ_max(M)``.
    stable : bool
        ``λ_max(M) <= 1``.
    """
    a: float
    s2: float
    s3: float
    s4: float
    gap_max: list[float]
    indefinite: list[bool]
    bounds: list[Optional[float]]
    conditions: list[Optional[bool]]
    lambda_max_M: float
    stable: bool

    def applicable_hold(self) -> bool:
        """All applicable conditions hold."""
        return all(c for c in self.conditions if c is not None)


def _real_root(value: float, k: int) -> float:
    return math.copysign(abs(value) ** (1.0 / k), value)


def necessary_conditions(e: Ensemble, eta: float, rho: float, eps: float) -> StabilityReport:
    """
    Evaluate the sharpness and non-uniformity conditions implied by linear
    stability, together with ``λ_max(M)``.

    Parameters
    ----------
    e : Ensemble
        Stochastic Hessian model.
    eta, rho, eps : float
        Step size, perturbation radius and denominator floor.

    Returns
    -------
    StabilityReport
    """
    stab = stability_matrix(e, eta, rho, eps)
    h1, h2, h3, h4 = moments(e)
    a = lambda_max_sym(h1)
    gap_max: list[float] = []
    indefinite: list[bool] = []
    power = h1
    for hk in (h2, h3, h4):
        power = power @ h1
        values = jacobi_eigs(symmetrize(hk - power)).values
        gap_max.append(float(values[0]))
        scale = max(1.0, float(np.max(np.abs(values))))
        indefinite.append(bool(values[-1] < -INDEFINITE_TOL * scale))
    s2, s3, s4 = (_real_root(g, k) for g, k in zip(gap_max, (2, 3, 4)))

    bound1 = math.inf if eta == 0.0 else 2.0 * eps / eta
    denom2 = eta * eta - 2.0 * eta * rho * eps
    bound2 = eps * eps / denom2 if denom2 > 0.0 else None
    bound3 = eps * eps / (2.0 * eta * eta * rho) if rho > 0.0 and eta > 0.0 else None
    bound4 = eps * eps / (eta * eta * rho * rho) if rho > 0.0 and eta > 0.0 else None

    conditions = [
        a * (1.0 + rho * a) <= bound1,
        None if bound2 is None else gap_max[0] <= bound2,
        None if bound3 is None else gap_max[1] <= bound3,
        None if bound4 is None else gap_max[2] <= bound4,
    ]
    return StabilityReport(
        a=a, s2=s2, s3=s3, s4=s4, gap_max=gap_max, indefinite=indefinite,
        bounds=[bound1, bound2, bound3, bound4], conditions=conditions,
        lambda_max_M=stab.lambda_max, stable=stab.lambda_max <= 1.0)
