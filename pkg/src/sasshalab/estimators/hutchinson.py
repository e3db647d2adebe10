# src/sasshalab/estimators/hutchinson.py
"""
hutchinson
==========

- **Module:** `src/sasshalab/estimators/hutchinson.py`

Hutchinson estimators of the Hessian diagonal and trace from
Hessian-vector products with Rademacher probes.

Overview
--------
- **hutchinson_diag**:
  ``(1/n) Σ_j z_j ⊙ (H z_j)``. Unbiased for ``diag(H)`` and exact with a
  single probe whenever ``H`` is diagonal.

- **hutchinson_trace**:
  ``(1/n) Σ_j z_jᵀ H z_j``. Unbiased for ``tr(H)``.

Both accept explicit `probes`, which lets callers reuse the same probe
vectors at two points (common random numbers) or enumerate every sign
vector for exact checks.

Usage
-----
```python
est = hutchinson_diag(lambda v: H @ v, d=2, n_samples=1, rng=RngStream(0))
est.values
```
"""

from itertools import product
from typing import Optional

import numpy as np

from sasshalab.exception.base_exceptions import DimensionMismatchError, PreconditionError
from sasshalab.lab_base_model import NumericModel
from sasshalab.numkit.linalg import LinearOperator
from sasshalab.numkit.rng import RngStream, rademacher

MAX_ENUMERATION_DIM = 20


class DiagEstimate(NumericModel):
    """
    Estimated Hessian diagonal.

    Attributes
    ----------
    values : ndarray
        Estimate of ``diag(H)``.
    n_samples : int
        Number of probes averaged.
    hvp_count : int
        Hessian-vector products spent (equals `n_samples`).
    finite : bool
        False when any HVP produced a non-finite entry; `values` then carries
        the NaN/Inf for the caller to act on.
    """
    values: np.ndarray
    n_samples: int
    hvp_count: int
    finite: bool = True


def all_rademacher_vectors(d: int) -> np.ndarray:
    """Every ``±1`` vector of length `d`, as a ``2^d × d`` matrix."""
    if d < 1 or d > MAX_ENUMERATION_DIM:
        raise PreconditionError(f"all_rademacher_vectors: d must lie in [1, {MAX_ENUMERATION_DIM}], got {d}")
    return np.array(list(product((1.0, -1.0), repeat=d)), dtype=np.float64)


def _probes(d: int, n_samples: int, rng: Optional[RngStream], probes) -> np.ndarray:
    if probes is not None:
        z = np.asarray(probes, dtype=np.float64)
        if z.ndim != 2 or z.shape[1] != d or z.shape[0] < 1:
            raise DimensionMismatchError(f"hutchinson: probes must be an n×{d} matrix, got shape {z.shape}")
        return z
    if n_samples < 1:
        raise PreconditionError(f"hutchinson: n_samples must be >= 1, got {n_samples}")
    if rng is None:
        raise PreconditionError("hutchinson: a random stream is required when probes are not given")
    return np.stack([rademacher(rng, d) for _ in range(n_samples)])


def hutchinson_diag(
        apply: LinearOperator,
        d: int,
        n_samples: int = 1,
        rng: RngStream = None,
        probes=None) -> DiagEstimate:
    """
    Estimate ``diag(H)``.

    Parameters
    ----------
    apply : Callable
        ``v -> H v``.
    d : int
        Dimension.
    n_samples : int, default 1
        Number of Rademacher probes, ``>= 1``. Ignored when `probes` is given.
    rng : RngStream, optional
        Stream the probes are drawn from.
    probes : array_like, optional
        Explicit n×d probe matrix.

    Returns
    -------
    DiagEstimate

    Raises
    ------
    PreconditionError
        If ``n_samples < 1``.
    """
    z = _probes(d, n_samples, rng, probes)
    total = np.zeros(d)
    with np.errstate(all="ignore"):
        for probe in z:
            total += probe * np.asarray(apply(probe), dtype=np.float64)
        values = total / z.shape[0]
    return DiagEstimate(
        values=values, n_samples=z.shape[0], hvp_count=z.shape[0],
        finite=bool(np.all(np.isfinite(values))))


def hutchinson_trace(
        apply: LinearOperator,
        d: int,
        n_samples: int = 1,
        rng: RngStream = None,
        probes=None) -> float:
    """
    Estimate ``tr(H)``; parameters as `hutchinson_diag`.

    Non-finite HVP outputs propagate into the returned value.
    """
    z = _probes(d, n_samples, rng, probes)
    with np.errstate(all="ignore"):
        return float(np.mean([probe @ np.asarray(apply(probe), dtype=np.float64) for probe in z]))
