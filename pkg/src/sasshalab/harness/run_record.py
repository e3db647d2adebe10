# src/sasshalab/harness/run_record.py
"""
run_record
==========

- **Module:** `src/sasshalab/harness/run_record.py`

Per-seed results of an experiment.

Overview
--------
- **StepRow**: one row per optimizer step (loss on the step's batch before
  the update, schedule values, update norm, cumulative counters, Hessian
  change at refreshes).
- **EvalRow**: validation loss and accuracy at the evaluation cadence and
  at the end of the run.
- **RunRecord**: the rows, final parameters, optional sharpness report and
  termination status.
- **RunSummary**: the flat final metrics of a record, which is also what is
  stored on disk for later aggregation.
"""

import math
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, Field

from sasshalab.lab_base_model import NumericModel
from sasshalab.sharpness.metrics import SharpnessReport

RunStatus = Literal["completed", "diverged"]


class StepRow(BaseModel):
    step: int
    loss: float
    lr: float
    rho: float
    update_norm: float
    gc_count: int
    hvp_count: int
    hessian_change: float = math.nan


class EvalRow(BaseModel):
    step: int
    val_loss: float
    val_accuracy: float = math.nan


class RunSummary(BaseModel):
    """
    Final metrics of one run.

    Attributes
    ----------
    seed : int
        Run seed.
    method : str
        Optimizer method tag.
    lr : float
        Base learning rate used.
    status : RunStatus
        ``completed`` or ``diverged``.
    metrics : dict[str, float]
        Final scalar metrics (loss, validation, sharpness, counters).
    """
    seed: int
    method: str
    lr: float
    k: int = 1
    steps: int = 0
    status: RunStatus = "completed"
    metrics: dict[str, float] = Field(default_factory=dict)


class RunRecord(NumericModel):
    """
    Everything recorded for one seed.

    Attributes
    ----------
    seed : int
        Run seed.
    method : str
        Optimizer method tag.
    lr : float
        Base learning rate.
    k : int
        Hessian refresh interval.
    steps : list[StepRow]
        Rows ordered by step.
    evals : list[EvalRow]
        Rows ordered by step.
    final_x : ndarray
        Parameters at termination.
    sharpness : SharpnessReport, optional
        Final sharpness report, when requested.
    midpoint_sensitivity : float
        Hessian sensitivity at the trajectory midpoint (NaN when not requested).
    status : RunStatus
        Termination status.
    diverged_step : int, optional
        Step at which the run diverged.
    diverged_quantity : str, optional
        Quantity that became non-finite.
    wall_clock : float
        Seconds spent; never part of compared outputs.
    """
    seed: int
    method: str
    lr: float
    k: int = 1
    steps: list[StepRow] = Field(default_factory=list)
    evals: list[EvalRow] = Field(default_factory=list)
    final_x: np.ndarray
    sharpness: Optional[SharpnessReport] = None
    midpoint_sensitivity: float = math.nan
    status: RunStatus = "completed"
    diverged_step: Optional[int] = None
    diverged_quantity: Optional[str] = None
    wall_clock: float = 0.0

    @property
    def diverged(self) -> bool:
        return self.status == "diverged"

    @property
    def gc_count(self) -> int:
        return self.steps[-1].gc_count if self.steps else 0

    @property
    def hvp_count(self) -> int:
        return self.steps[-1].hvp_count if self.steps else 0

    @property
    def final_train_loss(self) -> float:
        return self.steps[-1].loss if self.steps else math.nan

    @property
    def final_val_loss(self) -> float:
        return self.evals[-1].val_loss if self.evals else math.nan

    @property
    def final_val_accuracy(self) -> float:
        return self.evals[-1].val_accuracy if self.evals else math.nan

    def summary(self) -> RunSummary:
        metrics = {
            "train_loss": self.final_train_loss,
            "val_loss": self.final_val_loss,
            "val_accuracy": self.final_val_accuracy,
            "gc_count": float(self.gc_count),
            "hvp_count": float(self.hvp_count),
            "midpoint_sensitivity": self.midpoint_sensitivity,
        }
        if self.sharpness is not None:
            metrics |= {
                "lambda_max": self.sharpness.lambda_max,
                "trace": self.sharpness.trace,
                "dl_grad": self.sharpness.dl_grad,
                "dl_avg": self.sharpness.dl_avg,
                "sensitivity": self.sharpness.sensitivity,
            }
        return RunSummary(
            seed=self.seed, method=self.method, lr=self.lr, k=self.k,
            steps=len(self.steps), status=self.status, metrics=metrics)
