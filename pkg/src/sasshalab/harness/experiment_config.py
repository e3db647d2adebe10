# src/sasshalab/harness/experiment_config.py
"""
experiment_config
=================

- **Module:** `src/sasshalab/harness/experiment_config.py`

Pydantic models for one experiment: the problem, the optimizer, the run
protocol, metric toggles, outputs, and the stability and toy-landscape
studies. Config files are turned into these models by
`sasshalab.harness.config_parser`.
"""

from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from sasshalab.optimizers.optimizer_config import OptimizerConfig

ProblemKind = Literal["quadratic", "mixture", "logistic", "mlp"]
SUPERVISED_KINDS = frozenset({"logistic", "mlp"})


class ProblemConfig(BaseModel):
    """
    Problem description.

    ``data_seed`` pins the data and problem instance across run seeds; when
    unset every run seed draws its own instance.
    """
    kind: ProblemKind
    dim: int = 20
    condition: float = 100.0
    scale: float = 1.0
    dataset: Optional[str] = None
    generator: Literal["blobs", "teacher"] = "blobs"
    n: int = 1000
    p: int = 2
    n_classes: int = 2
    separation: float = 2.0
    spread: float = 1.0
    teacher_hidden: int = 8
    data_seed: Optional[int] = None
    batch_size: int = 0
    label_noise: float = 0.0
    val_fraction: float = 0.2
    l2: float = 0.0
    fit_intercept: bool = False
    hidden: int = 32
    activation: Literal["tanh", "relu"] = "tanh"
    loss: Literal["mse", "ce"] = "ce"
    init_scale: float = 1.0

    @field_validator("dim", "n", "p", "hidden", "teacher_hidden")
    @classmethod
    def _positive_size(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be >= 1, got {value}")
        return value

    @field_validator("label_noise")
    @classmethod
    def _fraction(cls, value: float) -> float:
        if not 0.0 <= value <= 1.0:
            raise ValueError(f"must lie in [0, 1], got {value}")
        return value

    @field_validator("val_fraction")
    @classmethod
    def _val_fraction(cls, value: float) -> float:
        if not 0.0 <= value < 1.0:
            raise ValueError(f"must lie in [0, 1), got {value}")
        return value

    @field_validator("batch_size")
    @classmethod
    def _batch_size(cls, value: int) -> int:
        if value < 0:
            raise ValueError(f"must be >= 0 (0 means full batch), got {value}")
        return value

    @property
    def supervised(self) -> bool:
        return self.kind in SUPERVISED_KINDS


class RunConfig(BaseModel):
    """Run protocol: steps, seeds, evaluation cadence and learning-rate grid."""
    steps: int
    seeds: list[int]
    eval_every: int = 0
    lr_grid: list[float] = Field(default_factory=list)

    @field_validator("steps")
    @classmethod
    def _positive_steps(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be >= 1, got {value}")
        return value

    @field_validator("seeds")
    @classmethod
    def _non_empty(cls, value: list[int]) -> list[int]:
        if not value:
            raise ValueError("at least one seed required")
        return value

    @field_validator("eval_every")
    @classmethod
    def _cadence(cls, value: int) -> int:
        if value < 0:
            raise ValueError(f"must be >= 0, got {value}")
        return value

    @field_validator("lr_grid")
    @classmethod
    def _positive_rates(cls, value: list[float]) -> list[float]:
        if any(not lr > 0.0 for lr in value):
            raise ValueError("learning rates must be > 0")
        return value


class MetricsConfig(BaseModel):
    """Which metrics to compute at the end of (and midway through) a run."""
    sharpness: bool = False
    rho: float = 0.1
    n_mc: int = 100
    trace_samples: int = 100
    sensitivity_dirs: int = 0
    sensitivity_probes: int = 1
    midpoint_sensitivity: bool = False

    @field_validator("rho")
    @classmethod
    def _positive_radius(cls, value: float) -> float:
        if not value > 0.0:
            raise ValueError(f"must be > 0, got {value}")
        return value

    @field_validator("n_mc", "trace_samples", "sensitivity_probes")
    @classmethod
    def _positive_count(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be >= 1, got {value}")
        return value


class OutputConfig(BaseModel):
    dir: str = "runs"
    format: Literal["csv", "json"] = "csv"
    checkpoint: bool = True


class EnsembleConfig(BaseModel):
    """
    Stochastic-Hessian ensemble and dynamics parameters for the stability
    analyzer.
    """
    kind: Literal["commuting_random", "diagonals"] = "commuting_random"
    d: int = 6
    members: int = 4
    low: float = 0.0
    high: float = 1.0
    diagonals: list[list[float]] = Field(default_factory=list)
    probs: list[float] = Field(default_factory=list)
    seed: int = 0
    eta: float
    rho: float = 0.0
    eps: float
    steps: int = 200
    n_traj: int = 200

    @model_validator(mode="after")
    def _check(self) -> "EnsembleConfig":
        if self.kind == "diagonals" and not self.diagonals:
            raise ValueError("diagonals required for kind 'diagonals'")
        if self.low > self.high:
            raise ValueError("low must not exceed high")
        if self.steps < 1 or self.n_traj < 1:
            raise ValueError("steps and n_traj must be >= 1")
        return self


class ToyConfig(BaseModel):
    """Initialization grid for the two-basin landscape sweep."""
    grid: int = 10
    low: float = -4.0
    high: float = 4.0
    steps: int = 500
    ablation: bool = True

    @model_validator(mode="after")
    def _check(self) -> "ToyConfig":
        if self.grid < 1 or self.steps < 1:
            raise ValueError("grid and steps must be >= 1")
        if self.low >= self.high:
            raise ValueError("low must be below high")
        return self


class ExperimentConfig(BaseModel):
    """
    Resolved experiment. Sections not needed by a subcommand may be absent.
    """
    problem: Optional[ProblemConfig] = None
    optimizer: Optional[OptimizerConfig] = None
    run: Optional[RunConfig] = None
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    ensemble: Optional[EnsembleConfig] = None
    toy: Optional[ToyConfig] = None
