# src/sasshalab/optimizers/optimizer_config.py
"""
optimizer_config
================

- **Module:** `src/sasshalab/optimizers/optimizer_config.py`

Validated hyperparameters for every update rule.

Defaults: ``beta1=0.9``, ``beta2=0.999``, ``k=10`` (``k=1`` for Sophia-H
when unset), ``eps=1e-8``, ``n_hutch=1``.
"""

from typing import Literal, Optional

from pydantic import BaseModel, field_validator, model_validator

from sasshalab.optimizers.schedule import Schedule

Method = Literal["sassha", "msassha", "sam", "adahessian", "sophiah", "adamw", "sgdm"]
FirstOrderKind = Literal["sgdm", "adamw"]
Stabilizer = Literal["none", "damping", "clipping"]

METHODS: tuple[str, ...] = ("sassha", "msassha", "sam", "adahessian", "sophiah", "adamw", "sgdm")
RADIUS_METHODS = frozenset({"sassha", "msassha", "sam"})
HESSIAN_METHODS = frozenset({"sassha", "msassha", "adahessian", "sophiah"})

DEFAULT_K = 10
DEFAULT_SOPHIA_K = 1


class OptimizerConfig(BaseModel):
    """
    Optimizer hyperparameters.

    Attributes
    ----------
    method : Method
        Update rule tag.
    lr : Schedule
        Step-size schedule η_t.
    rho : Schedule, optional
        Perturbation-radius schedule ρ_t; required by sassha, msassha and sam.
    beta1, beta2 : float
        Moving-average coefficients in ``[0, 1)``.
    k : int, optional
        Hessian refresh interval; resolved to 10 (1 for sophiah) when unset.
    weight_decay : float
        Decoupled weight-decay coefficient λ_wd.
    eps : float
        Denominator floor ε (``>= 0``; zero is accepted for exact hand checks).
    n_hutch : int
        Rademacher probes per Hessian refresh.
    momentum : float
        Heavy-ball coefficient μ for sgdm.
    sam_base : FirstOrderKind
        Base update under sam.
    sophia_clip : float
        Sophia-H update clip threshold.
    sophia_floor : float
        Sophia-H Hessian floor ε_s.
    hessian_power : float
        Exponent α applied to the bias-corrected Hessian EMA (0.5 = square root).
    hessian_abs : bool
        Accumulate ``|Ĥ|``; when false the raw estimate is accumulated and
        the power is applied sign-preservingly.
    stabilizer : Stabilizer
        Extra treatment of the preconditioner: ``damping`` adds
        `stabilizer_value` to ``|D̄|``; ``clipping`` floors D̄ at it.
    stabilizer_value : float
        Damping constant or clipping floor.
    total_steps : int, optional
        Run length passed to schedules that need it.
    """
    method: Method
    lr: Schedule
    rho: Optional[Schedule] = None
    beta1: float = 0.9
    beta2: float = 0.999
    k: Optional[int] = None
    weight_decay: float = 0.0
    eps: float = 1e-8
    n_hutch: int = 1
    momentum: float = 0.9
    sam_base: FirstOrderKind = "sgdm"
    sophia_clip: float = 0.01
    sophia_floor: float = 1e-2
    hessian_power: float = 0.5
    hessian_abs: bool = True
    stabilizer: Stabilizer = "none"
    stabilizer_value: float = 0.0
    total_steps: Optional[int] = None

    @field_validator("beta1", "beta2", "momentum")
    @classmethod
    def _unit_interval(cls, value: float) -> float:
        if not 0.0 <= value < 1.0:
            raise ValueError(f"must lie in [0, 1), got {value}")
        return value

    @field_validator("eps", "weight_decay", "stabilizer_value")
    @classmethod
    def _non_negative(cls, value: float) -> float:
        if not value >= 0.0:
            raise ValueError(f"must be >= 0, got {value}")
        return value

    @field_validator("sophia_clip", "sophia_floor", "hessian_power")
    @classmethod
    def _positive(cls, value: float) -> float:
        if not value > 0.0:
            raise ValueError(f"must be > 0, got {value}")
        return value

    @field_validator("n_hutch")
    @classmethod
    def _at_least_one_probe(cls, value: int) -> int:
        if value < 1:
            raise ValueError(f"must be >= 1, got {value}")
        return value

    @field_validator("k")
    @classmethod
    def _positive_interval(cls, value: Optional[int]) -> Optional[int]:
        if value is not None and value < 1:
            raise ValueError(f"must be >= 1, got {value}")
        return value

    @model_validator(mode="after")
    def _resolve(self) -> "OptimizerConfig":
        if self.k is None:
            self.k = DEFAULT_SOPHIA_K if self.method == "sophiah" else DEFAULT_K
        if self.method in RADIUS_METHODS and self.rho is None:
            raise ValueError(f"rho is required for method '{self.method}'")
        return self

    def refreshes_at(self, t: int) -> bool:
        """Hessian refresh rule: always when ``k == 1``, else ``t mod k == 1``."""
        return self.k == 1 or t % self.k == 1
