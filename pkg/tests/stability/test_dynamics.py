import numpy as np
import pytest

from sasshalab.exception.base_exceptions import DimensionMismatchError, PreconditionError
from sasshalab.numkit.rng import RngStream
from sasshalab.stability.analysis import stability_matrix
from sasshalab.stability.dynamics import DIVERGENCE_CLAMP, simulate_linearized_sassha, simulate_surrogate
from sasshalab.stability.ensemble import Ensemble


class TestSimulateSurrogate:

    def test_exact_cancellation(self):
        e = Ensemble.from_diagonals([[1.0]])
        result = simulate_surrogate(e, eta=0.5, rho=1.0, eps=1.0, x0=[3.0], T=4, n_traj=2, rng=RngStream(1))
        np.testing.assert_array_equal(result.mean_sq_norm, [9.0, 0.0, 0.0, 0.0, 0.0])
        assert not result.diverged

    def test_contraction_bound(self):
        e = Ensemble.from_diagonals([[0.5], [1.5]])
        gamma = stability_matrix(e, 0.1, 0.1, 1.0).lambda_max
        assert gamma < 1.0
        result = simulate_surrogate(e, 0.1, 0.1, 1.0, [1.0], T=10, n_traj=20000, rng=RngStream(2))
        assert result.mean_sq_norm[-1] <= gamma ** 10 * 1.05
        assert result.ratio() < 1.0

    def test_divergence_clamped(self):
        e = Ensemble.from_diagonals([[1.0]])
        result = simulate_surrogate(e, eta=4.0, rho=0.0, eps=1.0, x0=[1.0], T=120, n_traj=1, rng=RngStream(3))
        assert result.diverged
        assert result.diverged_step == 105
        assert np.max(result.mean_sq_norm) <= DIVERGENCE_CLAMP * (1.0 + 1e-12)

    def test_arguments_checked(self):
        e = Ensemble.from_diagonals([[1.0]])
        with pytest.raises(PreconditionError):
            simulate_surrogate(e, 0.1, 0.1, 0.0, [1.0], 5, 1, RngStream(1))
        with pytest.raises(PreconditionError):
            simulate_surrogate(e, 0.1, 0.1, 1.0, [1.0], 0, 1, RngStream(1))
        with pytest.raises(DimensionMismatchError):
            simulate_surrogate(e, 0.1, 0.1, 1.0, [1.0, 2.0], 5, 1, RngStream(1))


class TestSimulateLinearizedSassha:

    def test_newton_on_linearization(self):
        e = Ensemble.from_diagonals([[1.0]])
        result = simulate_linearized_sassha(e, eta=1.0, rho=0.0, eps=0.0, x0=[3.0], T=2, rng=RngStream(1))
        np.testing.assert_array_equal(result.mean_sq_norm, [9.0, 0.0, 0.0])

    def test_geometric_decay(self):
        e = Ensemble.from_diagonals([[4.0, 1.0]])
        result = simulate_linearized_sassha(e, eta=0.1, rho=0.0, eps=0.5, x0=[1.0, 1.0], T=5, rng=RngStream(1))
        r1, r2 = 1.0 - 0.1 * 4.0 / 2.5, 1.0 - 0.1 / 1.5
        t = np.arange(6)
        np.testing.assert_allclose(result.mean_sq_norm, r1 ** (2 * t) + r2 ** (2 * t), rtol=1e-12)

    def test_negative_diagonal_rejected(self):
        e = Ensemble.from_diagonals([[-1.0]])
        with pytest.raises(PreconditionError):
            simulate_linearized_sassha(e, 0.1, 0.0, 0.1, [1.0], 3, RngStream(1))
