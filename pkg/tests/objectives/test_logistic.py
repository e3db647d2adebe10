import numpy as np
import pytest
from derivative_checks import check_derivatives

from sasshalab.exception.base_exceptions import PreconditionError
from sasshalab.numkit.rng import RngStream
from sasshalab.objectives.base_objective import Batch
from sasshalab.objectives.dataset import Dataset, make_blobs
from sasshalab.objectives.logistic import logistic_regression


@pytest.fixture
def blobs():
    return make_blobs(RngStream(5), 60, p=3, separation=2.0)


class TestLogisticRegression:

    def test_zero_weights_give_log_two(self, blobs):
        obj = logistic_regression(blobs)
        assert obj.value(np.zeros(3)) == pytest.approx(np.log(2.0))

    def test_dimension_with_intercept(self, blobs):
        assert logistic_regression(blobs, fit_intercept=True).dim == 4

    def test_derivatives(self, blobs):
        rng = RngStream(9)
        for obj in (logistic_regression(blobs), logistic_regression(blobs, l2=0.1, fit_intercept=True)):
            check_derivatives(obj, [rng.normal(obj.dim) for _ in range(20)], rng)

    def test_l2_floor(self, blobs):
        obj = logistic_regression(blobs, l2=0.5)
        rng = RngStream(3)
        for _ in range(10):
            x, v = rng.normal(3), rng.normal(3)
            assert v @ obj.hvp(x, v) >= 0.5 * (v @ v) - 1e-12

    def test_batch_average(self, blobs):
        obj = logistic_regression(blobs)
        x = np.array([0.3, -0.2, 0.5])
        halves = [Batch.of(np.arange(30), 60), Batch.of(np.arange(30, 60), 60)]
        mean = 0.5 * sum(obj.value(x, b) for b in halves)
        assert mean == pytest.approx(obj.value(x))

    def test_non_binary_labels_rejected(self):
        ds = Dataset(features=np.zeros((3, 2)), labels=[0, 1, 2], n_classes=3)
        with pytest.raises(PreconditionError):
            logistic_regression(ds)

    def test_negative_l2_rejected(self, blobs):
        with pytest.raises(PreconditionError):
            logistic_regression(blobs, l2=-1.0)

    def test_accuracy_and_rebind(self):
        features = RngStream(4).normal((40, 3))
        separable = Dataset(features=features, labels=(features[:, 0] > 0.0).astype(int), n_classes=2)
        obj = logistic_regression(separable, l2=0.01)
        x = np.zeros(3)
        for _ in range(200):
            x -= 1.0 * obj.grad(x)
        assert obj.accuracy(x) > 0.9
        other = obj.rebind(separable.subset(np.arange(10)))
        assert other.n_examples == 10
        assert other.l2 == obj.l2
