import numpy as np
import pytest

from sasshalab.numkit.rng import RngStream
from sasshalab.stability.analysis import necessary_conditions, stability_matrix
from sasshalab.stability.dynamics import simulate_surrogate
from sasshalab.stability.ensemble import Ensemble

pytestmark = pytest.mark.slow

ETAS = (0.3, 0.8, 1.6, 3.0)


def ensembles(n: int, d: int = 3):
    root = RngStream(2024)
    for i in range(n):
        yield Ensemble.commuting_random(root.child(f"ensemble/{i}"), d, 4, low=0.0, high=1.5)


class TestStabilityStudies:

    def test_one_step_identity(self):
        rng = RngStream(1)
        for e in ensembles(50):
            x0 = rng.normal(e.d)
            m = stability_matrix(e, 0.7, 0.2, 1.0).matrix
            assert e.enumerate_one_step(x0, 0.7, 0.2, 1.0) == pytest.approx(x0 @ m @ x0, rel=1e-10)

    def test_contraction_of_stable_ensembles(self):
        checked = 0
        for i, e in enumerate(ensembles(20, d=2)):
            for eta in ETAS:
                gamma = stability_matrix(e, eta, 0.1, 1.0).lambda_max
                if gamma > 0.99:
                    continue
                checked += 1
                result = simulate_surrogate(e, eta, 0.1, 1.0, np.ones(2), 100, 500, RngStream(i).child(str(eta)))
                assert result.ratio() <= gamma ** 100 * 3.0
        assert checked > 0

    def test_stable_implies_necessary_conditions(self):
        for e in ensembles(50):
            for eta in ETAS:
                report = necessary_conditions(e, eta, 0.1, 1.0)
                if report.stable:
                    assert report.applicable_hold()
