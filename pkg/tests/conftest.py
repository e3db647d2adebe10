import numpy as np
import pytest

from sasshalab.autodiff.tape import TapeBuilder
from sasshalab.lab_base_model import MemoryNotifier
from sasshalab.numkit.rng import RngStream
from sasshalab.objectives.quadratic import quadratic_objective
from sasshalab.objectives.tape_objective import tape_objective


@pytest.fixture
def rng() -> RngStream:
    return RngStream(1234)


@pytest.fixture
def notifier() -> MemoryNotifier:
    return MemoryNotifier()


@pytest.fixture
def half_square_1d():
    """f(x) = x²/2 in one dimension."""
    return quadratic_objective([[1.0]], [0.0])


@pytest.fixture
def coupled_2d():
    """f(x) = ½ xᵀ[[2,1],[1,2]]x."""
    return quadratic_objective([[2.0, 1.0], [1.0, 2.0]], [0.0, 0.0])


@pytest.fixture
def cubic_1d():
    """f(x) = x³/6, whose Hessian is x."""
    tb = TapeBuilder(1)
    x = tb.param(0, ())
    return tape_objective(tb.build((x * x * x) * (1.0 / 6.0)))


@pytest.fixture
def linear_objective():
    """f(x) = cᵀx with c = (3, -4)."""
    tb = TapeBuilder(2)
    x0, x1 = tb.param(0, ()), tb.param(1, ())
    return tape_objective(tb.build(x0 * 3.0 - x1 * 4.0))

