# src/sasshalab/objectives/tape_objective.py
"""
tape_objective
==============

- **Module:** `src/sasshalab/objectives/tape_objective.py`

Deterministic objective backed by an arbitrary scalar `Tape`, for test
functions without a closed form helper (cubics, linear functions, the zero
function).

Usage
-----
```python
b = TapeBuilder(1)
x = b.param(0, (1,))
cubic = tape_objective(b.build((x ** 3.0).sum() / 6.0))
cubic.hvp([2.0], [1.0])   # -> [2.]
```
"""

import numpy as np

from sasshalab.autodiff.tape import Tape
from sasshalab.objectives.base_objective import Batch, Objective


class TapeObjective(Objective):
    """
    Objective evaluating a data-free tape. The batch argument is ignored.

    Parameters
    ----------
    tape : Tape
        Recorded scalar function of the parameter vector.
    feeds : dict, optional
        Fixed data placeholders, if the tape reads any.
    """

    def __init__(self, tape: Tape, feeds: dict = None):
        self.tape = tape
        self.feeds = feeds or {}
        self.dim = tape.n_params

    def value(self, x, batch: Batch = None) -> float:
        return self.tape.evaluate(self.check_x(x), self.feeds).value

    def grad(self, x, batch: Batch = None) -> np.ndarray:
        return self.tape.grad(self.check_x(x), self.feeds)

    def value_and_grad(self, x, batch: Batch = None) -> tuple[float, np.ndarray]:
        return self.tape.value_and_grad(self.check_x(x), self.feeds)

    def hvp(self, x, v, batch: Batch = None) -> np.ndarray:
        return self.tape.hvp(self.check_x(x), self.check_x(v, "v"), self.feeds)


def tape_objective(tape: Tape, feeds: dict = None) -> TapeObjective:
    return TapeObjective(tape, feeds)
