import numpy as np
import pytest

from sasshalab.exception.base_exceptions import AsymmetricMatrixError, DimensionMismatchError, PreconditionError
from sasshalab.numkit.linalg import (
    as_symmat,
    as_vec,
    jacobi_eigs,
    lambda_max_sym,
    power_iteration,
    symmetrize,
)
from sasshalab.numkit.rng import RngStream


class TestAsVec:

    def test_length_checked(self):
        with pytest.raises(DimensionMismatchError):
            as_vec([1.0, 2.0], d=3)

    def test_rejects_matrix(self):
        with pytest.raises(DimensionMismatchError):
            as_vec([[1.0, 2.0]])


class TestJacobiEigs:

    def test_identity(self):
        np.testing.assert_allclose(jacobi_eigs(np.eye(3)).values, [1.0, 1.0, 1.0], atol=1e-14)

    def test_diagonal_sorted_descending(self):
        np.testing.assert_allclose(jacobi_eigs(np.diag([5.0, -2.0])).values, [5.0, -2.0], atol=1e-14)

    def test_two_by_two(self):
        """Roots of λ² − 4λ + 3."""
        eig = jacobi_eigs([[2.0, 1.0], [1.0, 2.0]])
        np.testing.assert_allclose(eig.values, [3.0, 1.0], atol=1e-12)

    def test_reconstruction_and_orthonormality(self):
        rng = RngStream(7)
        a = rng.normal((8, 8))
        m = symmetrize(a + a.T)
        eig = jacobi_eigs(m)
        np.testing.assert_allclose(eig.reconstruct(), m, atol=1e-10 * np.linalg.norm(m))
        np.testing.assert_allclose(eig.vectors.T @ eig.vectors, np.eye(8), atol=1e-10)
        np.testing.assert_allclose(eig.values, np.sort(np.linalg.eigvalsh(m))[::-1], atol=1e-10)

    def test_asymmetric_rejected(self):
        with pytest.raises(AsymmetricMatrixError):
            jacobi_eigs([[1.0, 2.0], [0.0, 1.0]])

    def test_non_square_rejected(self):
        with pytest.raises(DimensionMismatchError):
            as_symmat(np.zeros((2, 3)))

    def test_lambda_max(self):
        assert lambda_max_sym(np.diag([1.0, -7.0, 4.0])) == pytest.approx(4.0)

    def test_dominant_keeps_sign(self):
        assert jacobi_eigs(np.diag([1.0, -7.0])).dominant == pytest.approx(-7.0)


class TestPowerIteration:

    @staticmethod
    def _operator(m):
        m = np.asarray(m, dtype=np.float64)
        return lambda v: m @ v

    def test_diagonal(self):
        res = power_iteration(self._operator(np.diag([2.0, 1.0])), 2, rng=RngStream(1))
        assert res.converged
        assert res.eigenvalue == pytest.approx(2.0, rel=1e-6)

    def test_coupled(self):
        res = power_iteration(self._operator([[2.0, 1.0], [1.0, 2.0]]), 2, rng=RngStream(2))
        assert res.eigenvalue == pytest.approx(3.0, rel=1e-6)

    def test_negative_dominant_sign_preserved(self):
        res = power_iteration(self._operator(np.diag([-4.0, 1.0])), 2, rng=RngStream(3))
        assert res.eigenvalue == pytest.approx(-4.0, rel=1e-6)

    def test_zero_operator_flagged(self):
        res = power_iteration(lambda v: np.zeros_like(v), 3, rng=RngStream(4))
        assert res.eigenvalue == 0.0
        assert not res.converged
        assert np.linalg.norm(res.vector) == pytest.approx(1.0)

    def test_cap_reached_is_flagged(self):
        res = power_iteration(self._operator(np.diag([2.0, 1.0])), 2, max_iters=1, rng=RngStream(5))
        assert not res.converged
        assert res.iterations == 1

    def test_explicit_start(self):
        res = power_iteration(self._operator(np.diag([2.0, 1.0])), 2, v0=[1.0, 0.0])
        assert res.eigenvalue == pytest.approx(2.0)
        np.testing.assert_allclose(np.abs(res.vector), [1.0, 0.0], atol=1e-12)

    def test_max_iters_checked(self):
        with pytest.raises(PreconditionError):
            power_iteration(self._operator(np.eye(2)), 2, max_iters=0)
