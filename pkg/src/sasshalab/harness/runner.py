# src/sasshalab/harness/runner.py
"""
runner
======

- **Module:** `src/sasshalab/harness/runner.py`

Experiment orchestration.

Overview
--------
- **build_problem**:
  Instantiates the objective, the validation objective and the initial
  point from a `ProblemConfig` and two streams (data, init).

- **ExperimentRunner**:
  Runs every seed sequentially. Each seed derives independent child streams
  (``data``, ``init``, ``optimizer``, ``batches``, ``metrics``) from its own
  root, so results depend only on the configuration and the seed.
  Divergence is recorded on the seed's `RunRecord`; remaining seeds still
  run.

- **run_experiment / run_grid / run_toy**:
  Functional entry points. `run_grid` repeats the experiment per learning
  rate and keeps the rate with the lowest median final validation loss.
  `run_toy` sweeps a grid of initial points on the two-basin landscape.

Usage
-----
```python
records = run_experiment(parse_config("q.cfg"))
records[0].steps[-1].gc_count
```
"""

import math
import time
from typing import Optional

import numpy as np
from pydantic import BaseModel

from sasshalab.exception.base_exceptions import DivergenceError, PreconditionError
from sasshalab.harness.experiment_config import ExperimentConfig, ProblemConfig, ToyConfig
from sasshalab.harness.run_record import EvalRow, RunRecord, StepRow
from sasshalab.lab_base_model import LogNotifier, NotifierMixin
from sasshalab.numkit.rng import RngStream
from sasshalab.objectives.base_objective import Objective, SupervisedObjective
from sasshalab.objectives.dataset import (
    MinibatchSampler,
    inject_label_noise,
    load_csv,
    make_blobs,
    make_teacher_data,
    train_val_split,
)
from sasshalab.objectives.logistic import logistic_regression
from sasshalab.objectives.mixture import GaussianMixtureLandscape, MixtureSpec, gaussian_mixture_landscape
from sasshalab.objectives.mlp import init_mlp_params, mlp_objective
from sasshalab.objectives.quadratic import random_quadratic
from sasshalab.optimizers.optimizer import Optimizer
from sasshalab.optimizers.optimizer_config import OptimizerConfig
from sasshalab.optimizers.schedule import Schedule
from sasshalab.sharpness.metrics import hessian_sensitivity, sharpness_report


class ProblemInstance(BaseModel):
    """Objective, validation objective and initial point of one run."""
    model_config = {"arbitrary_types_allowed": True}

    objective: Objective
    validation: Objective
    x0: np.ndarray

    @property
    def supervised(self) -> bool:
        return isinstance(self.objective, SupervisedObjective)


def _dataset(pcfg: ProblemConfig, rng: RngStream):
    if pcfg.dataset is not None:
        return load_csv(pcfg.dataset)
    if pcfg.generator == "teacher":
        return make_teacher_data(rng.child("generator"), pcfg.n, pcfg.p, pcfg.teacher_hidden, pcfg.n_classes)
    return make_blobs(rng.child("generator"), pcfg.n, pcfg.p, pcfg.n_classes, pcfg.separation, pcfg.spread)


def build_problem(pcfg: ProblemConfig, data_rng: RngStream, init_rng: RngStream) -> ProblemInstance:
    """
    Instantiate the configured problem.

    Supervised problems split off a validation set first and then corrupt
    labels of the training part only.

    Raises
    ------
    PreconditionError, DatasetParseError
        From the dataset and objective constructors.
    """
    match pcfg.kind:
        case "quadratic":
            objective = random_quadratic(data_rng.child("quadratic"), pcfg.dim, pcfg.condition, pcfg.scale)
            return ProblemInstance(
                objective=objective, validation=objective,
                x0=pcfg.init_scale * init_rng.normal(pcfg.dim))
        case "mixture":
            objective = gaussian_mixture_landscape(MixtureSpec.canonical())
            return ProblemInstance(objective=objective, validation=objective, x0=pcfg.init_scale * init_rng.normal(2))

    data = _dataset(pcfg, data_rng)
    train, val = data, data
    if pcfg.val_fraction > 0.0:
        train, val = train_val_split(data, pcfg.val_fraction, data_rng.child("split"))
    if pcfg.label_noise > 0.0:
        train = inject_label_noise(train, pcfg.label_noise, data_rng.child("noise"))
    if pcfg.kind == "logistic":
        objective = logistic_regression(train, pcfg.l2, pcfg.fit_intercept)
        x0 = np.zeros(objective.dim)
    else:
        objective = mlp_objective(train, pcfg.hidden, pcfg.activation, pcfg.loss)
        x0 = pcfg.init_scale * init_mlp_params(objective, init_rng)
    return ProblemInstance(objective=objective, validation=objective.rebind(val), x0=x0)


def seed_streams(pcfg: ProblemConfig, seed: int) -> dict[str, RngStream]:
    """
    Child streams of one run seed. ``data`` and ``init`` come from
    ``problem.data_seed`` instead when it is set.
    """
    root = RngStream(seed)
    problem_root = RngStream(pcfg.data_seed) if pcfg.data_seed is not None else root
    return {
        "data": problem_root.child("data"),
        "init": problem_root.child("init"),
        "optimizer": root.child("optimizer"),
        "batches": root.child("batches"),
        "metrics": root.child("metrics"),
    }


def _evaluate(problem: ProblemInstance, x: np.ndarray, step: int) -> EvalRow:
    accuracy = problem.validation.accuracy(x) if problem.supervised else math.nan
    return EvalRow(step=step, val_loss=problem.validation.value(x), val_accuracy=accuracy)


class ExperimentRunner(NotifierMixin):
    """
    Runs an `ExperimentConfig` seed by seed.

    Parameters
    ----------
    cfg : ExperimentConfig
        Needs the problem, optimizer and run sections.
    log_notifier : LogNotifier, optional
        Receives run start/end, evaluation and divergence lines.
    """

    def __init__(self, cfg: ExperimentConfig, log_notifier: LogNotifier = None):
        if cfg.problem is None or cfg.optimizer is None or cfg.run is None:
            raise PreconditionError("ExperimentRunner: problem, optimizer and run sections are required")
        self.cfg = cfg
        self.log_notifier = log_notifier
        self._context = ""

    @property
    def component_name(self) -> str:
        return f"[ExperimentRunner.run{self._context}]"

    def optimizer_config(self, lr: Optional[float] = None) -> OptimizerConfig:
        update = {"total_steps": self.cfg.run.steps}
        if lr is not None:
            update["lr"] = self.cfg.optimizer.lr.model_copy(update={"base": lr})
        return self.cfg.optimizer.model_copy(update=update)

    def run_seed(self, seed: int, lr: Optional[float] = None) -> RunRecord:
        """
        One complete run.

        Returns
        -------
        RunRecord
            Completed, or diverged with the step and quantity recorded.
        """
        self._context = f":seed={seed}"
        started = time.perf_counter()
        cfg, run, metrics = self.cfg, self.cfg.run, self.cfg.metrics
        opt_cfg = self.optimizer_config(lr)
        streams = seed_streams(cfg.problem, seed)
        problem = build_problem(cfg.problem, streams["data"], streams["init"])
        objective = problem.objective
        optimizer = Optimizer(opt_cfg, problem.x0, streams["optimizer"], self.log_notifier)
        sampler = None
        n = objective.n_examples
        if n is not None and 0 < cfg.problem.batch_size < n:
            sampler = MinibatchSampler(streams["batches"], n, cfg.problem.batch_size)

        record = RunRecord(seed=seed, method=opt_cfg.method, lr=opt_cfg.lr.base, k=opt_cfg.k, final_x=problem.x0)
        self.notify_log(f"start {opt_cfg.method} lr={opt_cfg.lr.base} steps={run.steps} dim={objective.dim}")
        midpoint = max(run.steps // 2, 1)
        try:
            for t in range(1, run.steps + 1):
                batch = sampler.next_batch() if sampler is not None else None
                loss = objective.value(optimizer.x, batch)
                if not math.isfinite(loss):
                    raise DivergenceError("non-finite loss", step=t, quantity="loss")
                state = optimizer.step(objective, batch)
                record.steps.append(StepRow(
                    step=t, loss=loss, lr=state.last_lr, rho=state.last_rho,
                    update_norm=state.last_update_norm, gc_count=state.gc_count,
                    hvp_count=state.hvp_count,
                    hessian_change=state.hessian_change if state.t_hess == t else math.nan))
                if metrics.midpoint_sensitivity and t == midpoint:
                    record.midpoint_sensitivity = hessian_sensitivity(
                        objective, optimizer.x, metrics.rho, max(metrics.sensitivity_dirs, 1),
                        metrics.sensitivity_probes, streams["metrics"].child("midpoint"))
                if run.eval_every and t % run.eval_every == 0:
                    record.evals.append(_evaluate(problem, optimizer.x, t))
                    self.notify_log(f"step {t} loss={loss:.6g} val_loss={record.evals[-1].val_loss:.6g}")
            if not record.evals or record.evals[-1].step != run.steps:
                record.evals.append(_evaluate(problem, optimizer.x, run.steps))
            if metrics.sharpness:
                record.sharpness = sharpness_report(
                    objective, optimizer.x, metrics.rho, metrics.n_mc, metrics.trace_samples,
                    streams["metrics"], metrics.sensitivity_dirs, metrics.sensitivity_probes)
        except DivergenceError as exc:
            record.status = "diverged"
            record.diverged_step = exc.step
            record.diverged_quantity = exc.quantity
            self.notify_log(f"diverged at step {exc.step}: {exc.quantity}")
        record.final_x = optimizer.x.copy()
        record.wall_clock = time.perf_counter() - started
        self.notify_log(f"end status={record.status} gc={optimizer.state.gc_count} hvp={optimizer.state.hvp_count}")
        self._context = ""
        return record

    def run(self, lr: Optional[float] = None) -> list[RunRecord]:
        """One record per configured seed, in seed order."""
        return [self.run_seed(seed, lr) for seed in self.cfg.run.seeds]


def run_experiment(cfg: ExperimentConfig, log_notifier: LogNotifier = None) -> list[RunRecord]:
    return ExperimentRunner(cfg, log_notifier).run()


class GridResult(BaseModel):
    """
    Learning-rate sweep outcome.

    Attributes
    ----------
    best_lr : float
        Rate with the lowest median final validation loss.
    median_val_loss : dict[float, float]
        Median over seeds per rate; diverged seeds count as ``inf``.
    records : dict[float, list[RunRecord]]
        All records per rate.
    """
    model_config = {"arbitrary_types_allowed": True}

    best_lr: float
    median_val_loss: dict[float, float]
    records: dict[float, list[RunRecord]]

    @property
    def best(self) -> list[RunRecord]:
        return self.records[self.best_lr]


def run_grid(cfg: ExperimentConfig, log_notifier: LogNotifier = None) -> GridResult:
    """
    Run the experiment for every rate in ``run.lr_grid`` (or the configured
    rate alone) and select by median final validation loss.
    """
    runner = ExperimentRunner(cfg, log_notifier)
    rates = cfg.run.lr_grid or [cfg.optimizer.lr.base]
    records: dict[float, list[RunRecord]] = {}
    medians: dict[float, float] = {}
    for lr in rates:
        records[lr] = runner.run(lr)
        losses = [math.inf if r.diverged or not math.isfinite(r.final_val_loss) else r.final_val_loss
                  for r in records[lr]]
        medians[lr] = float(np.median(losses))
        runner.notify_log(f"lr={lr} median val_loss={medians[lr]:.6g}")
    best = min(rates, key=lambda lr: medians[lr])
    return GridResult(best_lr=best, median_val_loss=medians, records=records)


class ToyRow(BaseModel):
    """Endpoint of one initialization on the two-basin landscape."""
    init_x: float
    init_y: float
    variant: str
    final_x: float
    final_y: float
    basin: int
    trace: float
    status: str = "completed"


def toy_variants(opt_cfg: OptimizerConfig, ablation: bool) -> list[tuple[str, OptimizerConfig]]:
    """The configured optimizer plus, when requested, its zero-radius ablation."""
    variants = [(opt_cfg.method, opt_cfg)]
    if ablation and opt_cfg.rho is not None:
        variants.append(("rho0", opt_cfg.model_copy(update={"rho": Schedule.constant(0.0)})))
    return variants


def run_toy(
        opt_cfg: OptimizerConfig,
        toy: ToyConfig = None,
        seed: int = 0,
        log_notifier: LogNotifier = None) -> list[ToyRow]:
    """
    Sweep a ``grid × grid`` lattice of initial points on the canonical
    two-basin landscape and report where each run ends.

    Basin membership is the nearest component mean; `trace` is the exact
    Hessian trace at the endpoint.
    """
    toy = toy or ToyConfig()
    landscape: GaussianMixtureLandscape = gaussian_mixture_landscape(MixtureSpec.canonical())
    axis = np.linspace(toy.low, toy.high, toy.grid)
    root = RngStream(seed)
    rows: list[ToyRow] = []
    for label, cfg in toy_variants(opt_cfg.model_copy(update={"total_steps": toy.steps}), toy.ablation):
        for i, x0 in enumerate(axis):
            for j, y0 in enumerate(axis):
                optimizer = Optimizer(cfg, [x0, y0], root.child(f"{label}/{i}/{j}"), log_notifier)
                status = "completed"
                try:
                    optimizer.run(landscape, toy.steps)
                    end = optimizer.x
                    basin = landscape.nearest_component(end)
                    trace = float(np.trace(landscape.hessian(end)))
                except DivergenceError:
                    end, basin, trace, status = optimizer.x, -1, math.nan, "diverged"
                rows.append(ToyRow(
                    init_x=float(x0), init_y=float(y0), variant=label,
                    final_x=float(end[0]), final_y=float(end[1]), basin=basin, trace=trace, status=status))
    return rows
