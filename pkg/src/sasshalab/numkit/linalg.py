# src/sasshalab/numkit/linalg.py
"""
linalg
======

- **Module:** `src/sasshalab/numkit/linalg.py`

Dense linear algebra shared by every other subpackage: vector and symmetric
matrix validation, a cyclic Jacobi eigensolver, and power iteration on
matrix-free operators.

Overview
--------
- **Vec64 / SymMat**:
  Type aliases for float64 numpy arrays. `as_vec` and `as_symmat` validate
  and convert.

- **jacobi_eigs**:
  Cyclic-by-row Jacobi rotations. Converges when the off-diagonal Frobenius
  norm falls below ``1e-12 * ||m||_F``. Eigenvalues are returned in
  descending order with orthonormal eigenvectors as columns.

- **power_iteration**:
  Dominant-by-magnitude eigenpair of a self-adjoint operator given as a
  callable. The signed Rayleigh quotient is reported, so a dominant
  negative eigenvalue keeps its sign.
"""

from typing import Callable

import numpy as np
from numpy.typing import NDArray

from sasshalab.exception.base_exceptions import (
    AsymmetricMatrixError,
    DimensionMismatchError,
    PreconditionError,
)
from sasshalab.lab_base_model import NumericModel
from sasshalab.numkit.rng import RngStream

type Vec64 = NDArray[np.float64]
type SymMat = NDArray[np.float64]
type LinearOperator = Callable[[Vec64], Vec64]

SYMMETRY_RTOL = 1e-12
JACOBI_RTOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def as_vec(values, d: int = None, name: str = "vector") -> Vec64:
    """
    Convert `values` to a 1-D float64 array, optionally checking its length.

    Raises
    ------
    DimensionMismatchError
        If the array is not 1-D, is empty, or its length differs from `d`.
    """
    v = np.asarray(values, dtype=np.float64)
    if v.ndim != 1 or v.size == 0:
        raise DimensionMismatchError(f"{name}: expected a non-empty 1-D vector, got shape {v.shape}")
    if d is not None and v.size != d:
        raise DimensionMismatchError(f"{name}: expected length {d}, got {v.size}")
    return v


def symmetry_error(m: NDArray[np.float64]) -> float:
    """Relative Frobenius asymmetry ``||m - m^T|| / ||m||`` (0 for the zero matrix)."""
    scale = float(np.linalg.norm(m))
    if scale == 0.0:
        return 0.0
    return float(np.linalg.norm(m - m.T)) / scale


def as_symmat(values, name: str = "matrix") -> SymMat:
    """
    Convert `values` to a square float64 matrix and check symmetry.

    Raises
    ------
    DimensionMismatchError
        If the input is not a non-empty square matrix.
    AsymmetricMatrixError
        If the relative asymmetry exceeds `SYMMETRY_RTOL`.
    """
    m = np.asarray(values, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] == 0:
        raise DimensionMismatchError(f"{name}: expected a non-empty square matrix, got shape {m.shape}")
    err = symmetry_error(m)
    if err > SYMMETRY_RTOL:
        raise AsymmetricMatrixError(
            f"{name}: not symmetric (relative asymmetry {err:.3e} > {SYMMETRY_RTOL:.0e})")
    return m


def symmetrize(m: NDArray[np.float64]) -> SymMat:
    """Return ``(m + m^T) / 2``, exactly symmetric."""
    return 0.5 * (m + m.T)


class EigenDecomposition(NumericModel):
    """
    Result of `jacobi_eigs`.

    Attributes
    ----------
    values : ndarray
        Eigenvalues in descending order.
    vectors : ndarray
        Orthonormal eigenvectors stored as columns, aligned with `values`.
    sweeps : int
        Number of full Jacobi sweeps performed.
    """
    values: np.ndarray
    vectors: np.ndarray
    sweeps: int = 0

    def reconstruct(self) -> SymMat:
        return (self.vectors * self.values) @ self.vectors.T

    @property
    def dominant(self) -> float:
        """Eigenvalue of largest magnitude (sign preserved)."""
        return float(self.values[np.argmax(np.abs(self.values))])


def _off_norm(a: NDArray[np.float64]) -> float:
    return float(np.sqrt(max(np.sum(a * a) - np.sum(np.diag(a) ** 2), 0.0)))


def jacobi_eigs(m, max_sweeps: int = JACOBI_MAX_SWEEPS) -> EigenDecomposition:
    """
    Eigen-decompose a dense symmetric matrix with cyclic Jacobi rotations.

    Parameters
    ----------
    m : array_like
        Symmetric matrix (within `SYMMETRY_RTOL`).
    max_sweeps : int, default 100
        Upper bound on full sweeps over the strict upper triangle.

    Returns
    -------
    EigenDecomposition
        Descending eigenvalues and orthonormal eigenvectors.

    Raises
    ------
    AsymmetricMatrixError
        If `m` is not symmetric within tolerance.
    """
    a = symmetrize(as_symmat(m)).copy()
    d = a.shape[0]
    v = np.eye(d)
    threshold = JACOBI_RTOL * float(np.linalg.norm(a))

    sweeps = 0
    while sweeps < max_sweeps and _off_norm(a) > threshold:
        sweeps += 1
        for p in range(d - 1):
            for q in range(p + 1, d):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                if theta == 0.0:
                    t = 1.0
                elif abs(theta) > 1e150:
                    t = 0.5 / theta
                else:
                    t = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p = a[:, p].copy()
                col_q = a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p = a[p, :].copy()
                row_q = a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

                vec_p = v[:, p].copy()
                vec_q = v[:, q].copy()
                v[:, p] = c * vec_p - s * vec_q
                v[:, q] = s * vec_p + c * vec_q

    values = np.diag(a).copy()
    order = np.argsort(-values, kind="stable")
    return EigenDecomposition(values=values[order], vectors=v[:, order], sweeps=sweeps)


def lambda_max_sym(m) -> float:
    """Largest (algebraic) eigenvalue of a symmetric matrix via `jacobi_eigs`."""
    return float(jacobi_eigs(m).values[0])


class PowerIterationResult(NumericModel):
    """
    Result of `power_iteration`.

    Attributes
    ----------
    eigenvalue : float
        Signed Rayleigh quotient of the final iterate.
    vector : ndarray
        Unit-norm final iterate.
    converged : bool
        Whether successive Rayleigh quotients met the relative tolerance.
    iterations : int
        Number of operator applications.
    """
    eigenvalue: float
    vector: np.ndarray
    converged: bool
    iterations: int


def power_iteration(
        apply: LinearOperator,
        d: int,
        max_iters: int = 200,
        tol: float = 1e-8,
        rng: RngStream = None,
        v0=None) -> PowerIterationResult:
    """
    Dominant-by-magnitude eigenpair of a self-adjoint linear operator.

    Parameters
    ----------
    apply : Callable
        ``v -> H v`` for a self-adjoint `H`.
    d : int
        Dimension of the operator.
    max_iters : int, default 200
        Maximum number of operator applications, ``>= 1``.
    tol : float, default 1e-8
        Relative tolerance on successive Rayleigh quotients.
    rng : RngStream, optional
        Stream for the random start vector; a fixed stream is used if absent.
    v0 : array_like, optional
        Explicit start vector.

    Returns
    -------
    PowerIterationResult
        A zero operator yields eigenvalue 0 with ``converged=False``.
    """
    if max_iters < 1:
        raise PreconditionError(f"power_iteration: max_iters must be >= 1, got {max_iters}")
    if v0 is None:
        v = (rng or RngStream(0)).normal(d)
    else:
        v = as_vec(v0, d, "v0").copy()
    v = v / np.linalg.norm(v)

    eigenvalue = np.inf
    for it in range(1, max_iters + 1):
        w = np.asarray(apply(v), dtype=np.float64)
        norm = float(np.linalg.norm(w))
        if norm == 0.0:
            return PowerIterationResult(eigenvalue=0.0, vector=v, converged=False, iterations=it)
        rayleigh = float(v @ w)
        v = w / norm
        if abs(rayleigh - eigenvalue) < tol * max(abs(rayleigh), np.finfo(np.float64).tiny):
            return PowerIterationResult(eigenvalue=rayleigh, vector=v, converged=True, iterations=it)
        eigenvalue = rayleigh

    # The last quotient belongs to the previous iterate; refresh it for the returned vector.
    rayleigh = float(v @ np.asarray(apply(v), dtype=np.float64))
    return PowerIterationResult(eigenvalue=rayleigh, vector=v, converged=False, iterations=max_iters)
