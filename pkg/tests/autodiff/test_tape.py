import numpy as np
import pytest

from sasshalab.autodiff.dual import DualNumber
from sasshalab.autodiff.tape import TapeBuilder, evaluate, grad, hvp
from sasshalab.exception.base_exceptions import DimensionMismatchError, PreconditionError
from sasshalab.numkit.rng import RngStream


def half_norm_tape(d: int = 2):
    b = TapeBuilder(d)
    x = b.param(0, (d,))
    return b.build(0.5 * (x * x).sum())


def product_tape():
    """f(x) = x₁² x₂."""
    b = TapeBuilder(2)
    x1, x2 = b.param(0, ()), b.param(1, ())
    return b.build(x1 * x1 * x2)


def finite_difference_grad(tape, x, h=1e-6, feeds=None):
    x = np.asarray(x, dtype=np.float64)
    out = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        out[i] = (tape.evaluate(x + e, feeds).value - tape.evaluate(x - e, feeds).value) / (2 * h)
    return out


class TestDualNumber:

    def test_product_rule(self):
        a = DualNumber(np.array([2.0]), np.array([1.0]))
        b = DualNumber(np.array([3.0]), np.array([0.0]))
        out = a * b
        np.testing.assert_allclose(out.primal, [6.0])
        np.testing.assert_allclose(out.tangent, [3.0])

    def test_tangent_broadcast_to_primal(self):
        d = DualNumber(np.zeros((2, 3)), np.ones(3))
        assert d.tangent.shape == (2, 3)


class TestEvaluate:

    def test_half_norm(self):
        assert evaluate(half_norm_tape(), [3.0, 4.0]).value == pytest.approx(12.5)

    def test_product(self):
        assert evaluate(product_tape(), [1.0, 2.0]).value == pytest.approx(2.0)

    def test_tanh_at_zero(self):
        b = TapeBuilder(1)
        tape = b.build(b.param(0, ()).tanh())
        assert evaluate(tape, [0.0]).value == 0.0

    def test_non_finite_is_flagged(self):
        b = TapeBuilder(1)
        tape = b.build(b.param(0, ()).log())
        result = evaluate(tape, [-1.0])
        assert not result.finite

    def test_wrong_length(self):
        with pytest.raises(DimensionMismatchError):
            evaluate(half_norm_tape(), [1.0, 2.0, 3.0])

    def test_missing_feed(self):
        b = TapeBuilder(1)
        tape = b.build((b.data("X") * b.param(0, ())).sum())
        with pytest.raises(PreconditionError):
            evaluate(tape, [1.0])

    def test_builder_single_use(self):
        b = TapeBuilder(1)
        x = b.param(0, ())
        b.build(x)
        with pytest.raises(PreconditionError):
            b.param(0, ())


class TestGrad:

    def test_half_norm_is_identity(self):
        np.testing.assert_allclose(grad(half_norm_tape(3), [1.0, -2.0, 0.5]), [1.0, -2.0, 0.5])

    def test_product(self):
        np.testing.assert_allclose(grad(product_tape(), [1.0, 2.0]), [4.0, 1.0])

    def test_constant_function(self):
        b = TapeBuilder(2)
        b.param(0, (2,))
        tape = b.build(b.const(3.0))
        np.testing.assert_array_equal(grad(tape, [1.0, 1.0]), np.zeros(2))

    def test_matches_finite_differences(self):
        b = TapeBuilder(6)
        w = b.param(0, (2, 3))
        X = b.data("X")
        out = ((X @ w).tanh() ** 2.0).sum() + (w * w).sum().exp() * 0.01
        tape = b.build(out)
        rng = RngStream(3)
        feeds = {"X": rng.normal((4, 2))}
        x = 0.3 * rng.normal(6)
        np.testing.assert_allclose(tape.grad(x, feeds), finite_difference_grad(tape, x, feeds=feeds), rtol=1e-6, atol=1e-8)


class TestHvp:

    def test_half_norm(self):
        np.testing.assert_allclose(hvp(half_norm_tape(), [3.0, 4.0], [0.5, -1.0]), [0.5, -1.0])

    def test_product_first_column(self):
        np.testing.assert_allclose(hvp(product_tape(), [1.0, 2.0], [1.0, 0.0]), [4.0, 2.0])

    def test_zero_direction(self):
        np.testing.assert_array_equal(hvp(product_tape(), [1.0, 2.0], [0.0, 0.0]), np.zeros(2))

    def test_direction_shape_checked(self):
        with pytest.raises(DimensionMismatchError):
            hvp(product_tape(), [1.0, 2.0], [1.0])

    def test_symmetry_and_finite_differences(self):
        b = TapeBuilder(8)
        w1 = b.param(0, (2, 3))
        b1 = b.param(6, (2,))
        X = b.data("X")
        pre = X @ w1
        hidden = pre.tanh()
        out = (hidden * hidden).sum() * 0.5 + (b1 * b1 * b1).sum()
        tape = b.build(out)
        rng = RngStream(4)
        feeds = {"X": rng.normal((5, 2))}
        x = 0.5 * rng.normal(8)
        u, v = rng.normal(8), rng.normal(8)
        hu, hv = tape.hvp(x, u, feeds), tape.hvp(x, v, feeds)
        assert v @ hu == pytest.approx(u @ hv, rel=1e-10)
        h = 1e-5
        fd = (tape.grad(x + h * v, feeds) - tape.grad(x - h * v, feeds)) / (2 * h)
        np.testing.assert_allclose(hv, fd, rtol=1e-5, atol=1e-7)

    def test_row_bias_and_softmax_pieces(self):
        b = TapeBuilder(8)
        w = b.param(0, (1, 3))
        bias = b.param(6, (2,))
        X = b.data("X")
        logits = (X @ w).add_row(b.param(3, (3,)))
        out = logits.exp().sum(axis=1).log().sum() + (bias * bias).sum()
        tape = b.build(out)
        rng = RngStream(6)
        feeds = {"X": rng.normal((4, 1))}
        x = 0.2 * rng.normal(8)
        v = rng.normal(8)
        h = 1e-5
        fd = (tape.grad(x + h * v, feeds) - tape.grad(x - h * v, feeds)) / (2 * h)
        np.testing.assert_allclose(tape.hvp(x, v, feeds), fd, rtol=1e-5, atol=1e-7)


def logsumexp_tape(axis=1):
    b = TapeBuilder(4)
    logits = b.param(0, (2, 2))
    return b.build(logits.logsumexp(axis=axis).sum())


class TestLogSumExp:

    def test_large_logits_stay_finite(self):
        result = logsumexp_tape().evaluate([1000.0, 1000.0, 800.0, 0.0])
        assert result.finite
        assert result.value == pytest.approx(1000.0 + np.log(2.0) + 800.0)

    def test_gradient_is_row_softmax(self):
        np.testing.assert_allclose(
            logsumexp_tape().grad([1000.0, 1000.0, 800.0, 0.0]), [0.5, 0.5, 1.0, 0.0])

    def test_all_entries(self):
        assert logsumexp_tape(axis=None).evaluate([0.0, 0.0, 0.0, 0.0]).value == pytest.approx(np.log(4.0))

    def test_hvp_matches_finite_differences(self):
        tape = logsumexp_tape()
        rng = RngStream(8)
        x, v = rng.normal(4), rng.normal(4)
        h = 1e-5
        fd = (tape.grad(x + h * v) - tape.grad(x - h * v)) / (2 * h)
        np.testing.assert_allclose(tape.hvp(x, v), fd, rtol=1e-5, atol=1e-8)

    def test_hvp_with_dominant_logit(self):
        np.testing.assert_allclose(
            logsumexp_tape().hvp([900.0, 0.0, 0.0, 0.0], [1.0, 0.0, 1.0, 0.0]), [0.0, 0.0, 0.25, -0.25])

    def test_bad_axis(self):
        b = TapeBuilder(2)
        with pytest.raises(PreconditionError):
            b.param(0, (2,)).logsumexp(axis=2)
