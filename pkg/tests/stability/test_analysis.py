import numpy as np
import pytest

from sasshalab.exception.base_exceptions import PreconditionError
from sasshalab.numkit.rng import RngStream
from sasshalab.stability.analysis import moments, necessary_conditions, stability_matrix
from sasshalab.stability.ensemble import Ensemble


class TestMoments:

    def test_two_point_scalar(self):
        h1, h2, h3, h4 = moments(Ensemble.from_diagonals([[1.0], [3.0]]))
        assert [m[0, 0] for m in (h1, h2, h3, h4)] == [2.0, 5.0, 14.0, 41.0]

    def test_single_member(self):
        h = np.array([[2.0, 1.0], [1.0, 2.0]])
        out = moments(Ensemble.uniform([h]))
        for k, m in enumerate(out, start=1):
            np.testing.assert_allclose(m, np.linalg.matrix_power(h, k))


class TestStabilityMatrix:

    def test_deterministic_scalar(self):
        m = stability_matrix(Ensemble.from_diagonals([[2.0]]), eta=0.1, rho=0.5, eps=0.5)
        assert m.matrix[0, 0] == pytest.approx((1.0 - 0.2 * 4.0) ** 2)
        assert m.lambda_max == pytest.approx(0.04)

    def test_matches_expected_square_of_maps(self):
        rng = RngStream(11)
        mats = []
        for _ in range(3):
            a = rng.normal((3, 3))
            mats.append(a @ a.T / 3.0)
        e = Ensemble(mats=mats, probs=np.array([0.2, 0.3, 0.5]))
        maps = e.surrogate_maps(0.3, 0.2, 0.8)
        expected = sum(p * mp.T @ mp for p, mp in zip(e.probs, maps))
        np.testing.assert_allclose(stability_matrix(e, 0.3, 0.2, 0.8).matrix, expected, atol=1e-12)

    def test_quadratic_form_is_one_step_second_moment(self):
        e = Ensemble.commuting_random(RngStream(4), 3, 4)
        x0 = np.array([0.5, -1.0, 2.0])
        m = stability_matrix(e, 0.4, 0.3, 1.0).matrix
        assert e.enumerate_one_step(x0, 0.4, 0.3, 1.0) == pytest.approx(x0 @ m @ x0)

    def test_zero_step_is_identity(self):
        e = Ensemble.commuting_random(RngStream(5), 2, 3)
        np.testing.assert_allclose(stability_matrix(e, 0.0, 0.3, 1.0).matrix, np.eye(2), atol=1e-15)

    def test_parameters_checked(self):
        e = Ensemble.from_diagonals([[1.0]])
        with pytest.raises(PreconditionError):
            stability_matrix(e, 0.1, 0.1, 0.0)
        with pytest.raises(PreconditionError):
            stability_matrix(e, -0.1, 0.1, 1.0)


class TestNecessaryConditions:

    def test_deterministic_ensemble(self):
        report = necessary_conditions(Ensemble.uniform([[[2.0, 1.0], [1.0, 2.0]]]), eta=0.5, rho=0.1, eps=1.0)
        assert report.a == pytest.approx(3.0)
        assert max(abs(g) for g in report.gap_max) < 1e-10
        assert report.conditions[1:] == [True, True, True]

    def test_zero_radius_drops_higher_conditions(self):
        report = necessary_conditions(Ensemble.from_diagonals([[1.0], [3.0]]), eta=0.1, rho=0.0, eps=1.0)
        assert report.conditions[2] is None and report.conditions[3] is None
        assert report.bounds[1] == pytest.approx(100.0)
        assert report.gap_max[0] == pytest.approx(1.0)
        assert report.s2 == pytest.approx(1.0)

    def test_condition_two_inapplicable(self):
        report = necessary_conditions(Ensemble.from_diagonals([[1.0], [3.0]]), eta=0.1, rho=1.0, eps=1.0)
        assert report.bounds[1] is None
        assert report.conditions[1] is None

    def test_higher_conditions_compare_moment_gap(self):
        # H in {0, 4}: gaps 4, 24, 112; s3 squared is about 8.3 but s3 cubed is 24
        report = necessary_conditions(Ensemble.from_diagonals([[0.0], [4.0]]), eta=1.0, rho=1.0 / 24.0, eps=1.0)
        assert report.gap_max == pytest.approx([4.0, 24.0, 112.0])
        assert report.s3 ** 3 == pytest.approx(24.0)
        assert report.bounds[2] == pytest.approx(12.0)
        assert report.s3 ** 2 < report.bounds[2]
        assert report.conditions[2] is False
        assert report.bounds[3] == pytest.approx(576.0)
        assert report.conditions[3] is True

    def test_unstable_sharpness(self):
        report = necessary_conditions(Ensemble.from_diagonals([[2.0]]), eta=1.0, rho=0.5, eps=0.5)
        assert not report.stable
        assert report.lambda_max_M == pytest.approx(49.0)
        assert report.conditions[0] is False

    def test_stability_implies_conditions(self):
        checked = 0
        for seed in range(8):
            e = Ensemble.commuting_random(RngStream(seed), 3, 4, low=0.0, high=1.5)
            for eta in (0.3, 0.8, 1.5):
                report = necessary_conditions(e, eta=eta, rho=0.1, eps=1.0)
                if report.stable:
                    checked += 1
                    assert report.applicable_hold()
        assert checked > 0

    def test_indefinite_gap_flagged(self):
        rng = RngStream(6)
        mats = []
        for _ in range(2):
            a = rng.normal((3, 3))
            mats.append(a + a.T)
        report = necessary_conditions(Ensemble.uniform(mats), eta=0.1, rho=0.1, eps=1.0)
        assert len(report.indefinite) == 3
        assert not report.indefinite[0]
