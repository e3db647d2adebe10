# src/sasshalab/optimizers/optimizer.py
"""
optimizer
=========

- **Module:** `src/sasshalab/optimizers/optimizer.py`

Driver that binds a configuration, a state and a random stream, and
dispatches to the update rule named by ``cfg.method``.

Overview
--------
- **step_rule**:
  Uniform ``(state, objective, batch, rng, cfg) -> state`` callable for a
  method tag.

- **expected_counters**:
  Analytic GC/HVP totals after a number of steps. Runs must reproduce these
  exactly.

- **Optimizer**:
  Owns one `OptState`; logs Hessian refreshes through its notifier.

Usage
-----
```python
opt = Optimizer(cfg, x0, RngStream(1).child("optimizer"))
for batch in batches:
    opt.step(objective, batch)
opt.state.gc_count
```
"""

from typing import Callable

import numpy as np

from sasshalab.exception.base_exceptions import PreconditionError
from sasshalab.lab_base_model import LogNotifier, NotifierMixin
from sasshalab.numkit.rng import RngStream
from sasshalab.objectives.base_objective import Batch, Objective
from sasshalab.optimizers.opt_state import OptState
from sasshalab.optimizers.optimizer_config import DEFAULT_K, DEFAULT_SOPHIA_K, METHODS, OptimizerConfig
from sasshalab.optimizers.step_rules import (
    adahessian_step,
    first_order_step,
    msassha_step,
    sam_step,
    sassha_step,
    sophiah_step,
)

type StepRule = Callable[[OptState, Objective, Batch, RngStream, OptimizerConfig], OptState]


def _sgdm(state, objective, batch, rng, cfg):
    return first_order_step("sgdm", state, objective, batch, cfg)


def _adamw(state, objective, batch, rng, cfg):
    return first_order_step("adamw", state, objective, batch, cfg)


def _sam(state, objective, batch, rng, cfg):
    return sam_step(cfg.sam_base, state, objective, batch, cfg)


STEP_RULES: dict[str, StepRule] = {
    "sassha": sassha_step,
    "msassha": msassha_step,
    "sam": _sam,
    "adahessian": adahessian_step,
    "sophiah": sophiah_step,
    "adamw": _adamw,
    "sgdm": _sgdm,
}


def step_rule(method: str) -> StepRule:
    """
    Update rule for a method tag.

    Raises
    ------
    PreconditionError
        If `method` is unknown.
    """
    if method not in STEP_RULES:
        raise PreconditionError(f"unknown optimizer method '{method}'; expected one of {', '.join(METHODS)}")
    return STEP_RULES[method]


def refresh_count(k: int, steps: int) -> int:
    """Number of steps ``t in [1, steps]`` that refresh the Hessian."""
    if steps < 1:
        return 0
    return steps if k == 1 else (steps - 1) // k + 1


def expected_counters(method: str, k: int = None, steps: int = 1, n_hutch: int = 1) -> tuple[int, int]:
    """
    Analytic ``(gc_count, hvp_count)`` after `steps` steps.

    Parameters
    ----------
    method : str
        Method tag.
    k : int, optional
        Hessian refresh interval; the method default when omitted.
    steps : int
        Steps taken.
    n_hutch : int
        Probes per refresh.
    """
    step_rule(method)
    if k is None:
        k = DEFAULT_SOPHIA_K if method == "sophiah" else DEFAULT_K
    refreshes = refresh_count(k, steps) * n_hutch
    match method:
        case "sassha":
            return 2 * steps, refreshes
        case "msassha":
            return steps, refreshes
        case "sam":
            return 2 * steps, 0
        case "adahessian":
            return steps, steps * n_hutch
        case "sophiah":
            return steps, refreshes
    return steps, 0


class Optimizer(NotifierMixin):
    """
    Stateful optimizer.

    Parameters
    ----------
    cfg : OptimizerConfig
        Hyperparameters; ``cfg.method`` selects the rule.
    x0 : array_like
        Initial parameters.
    rng : RngStream
        Stream for Hutchinson probes; owned by this optimizer.
    log_notifier : LogNotifier, optional
        Receives one line per Hessian refresh.
    """

    def __init__(self, cfg: OptimizerConfig, x0, rng: RngStream, log_notifier: LogNotifier = None):
        self.cfg = cfg
        self.rule = step_rule(cfg.method)
        self.rng = rng
        self.state = OptState.init(x0)
        self.log_notifier = log_notifier

    @property
    def component_name(self) -> str:
        return f"Optimizer[{self.cfg.method}]"

    def step(self, objective: Objective, batch: Batch = None) -> OptState:
        """
        Advance one step on `batch`.

        Raises
        ------
        DivergenceError
            Propagated from the update rule.
        """
        t_hess = self.state.t_hess
        self.rule(self.state, objective, batch, self.rng, self.cfg)
        if self.state.t_hess != t_hess:
            self.notify_log(
                f"step {self.state.t_hess}: hessian refresh, relative change {self.state.hessian_change:.4g}")
        return self.state

    def run(self, objective: Objective, steps: int, batches=None) -> OptState:
        """Take `steps` steps, drawing batches from the iterable `batches` (full batch when ``None``)."""
        source = iter(batches) if batches is not None else None
        for _ in range(steps):
            self.step(objective, None if source is None else next(source))
        return self.state

    @property
    def x(self) -> np.ndarray:
        return self.state.x
