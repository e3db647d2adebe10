# src/sasshalab/optimizers/schedule.py
"""
schedule
========

- **Module:** `src/sasshalab/optimizers/schedule.py`

Step-size and perturbation-radius schedules, plus the check for the power
schedules under which the convergence guarantee holds.

Overview
--------
- **constant**: ``base``.
- **multistep**: ``base · gamma^(#milestones <= epoch)`` with
  ``epoch = ceil(t / steps_per_epoch)``.
- **cosine_warmup**: linear ramp ``base · t / warmup`` for ``t <= warmup``,
  then a half cosine from ``base`` down to 0 at ``total_steps``.
- **polynomial**: ``base · (1 - t / total_steps)^power``.
- **power_decay**: ``base · t^(-power)``.

Usage
-----
```python
lr = Schedule(kind="power_decay", base=0.5, power=0.7)
schedule_value(lr, t=1, total_steps=100)   # -> 0.5
check_theorem_schedule(0.7, 0.4).ok        # -> True
```
"""

import math
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from sasshalab.exception.base_exceptions import PreconditionError

ScheduleKind = Literal["constant", "multistep", "cosine_warmup", "polynomial", "power_decay"]


class Schedule(BaseModel):
    """
    Schedule description.

    Attributes
    ----------
    kind : ScheduleKind
        Schedule family.
    base : float
        Base value, ``>= 0``.
    milestones : list[int]
        Epochs at which `multistep` multiplies by `gamma`.
    gamma : float
        Multistep decay factor in ``(0, 1]``.
    steps_per_epoch : int
        Steps making up one epoch for `multistep`.
    warmup : int
        Warmup length for `cosine_warmup`.
    power : float
        Exponent for `polynomial` and `power_decay`.
    """
    kind: ScheduleKind = "constant"
    base: float
    milestones: list[int] = Field(default_factory=list)
    gamma: float = 0.1
    steps_per_epoch: int = 1
    warmup: int = 0
    power: float = 1.0

    @field_validator("base")
    @classmethod
    def _non_negative_base(cls, base: float) -> float:
        if not base >= 0.0:
            raise ValueError(f"schedule base must be >= 0, got {base}")
        return base

    @model_validator(mode="after")
    def _check_kind_parameters(self) -> "Schedule":
        if self.kind == "multistep":
            if not 0.0 < self.gamma <= 1.0:
                raise ValueError(f"multistep gamma must lie in (0, 1], got {self.gamma}")
            if any(m < 0 for m in self.milestones):
                raise ValueError("multistep milestones must be non-negative")
            if self.steps_per_epoch < 1:
                raise ValueError("multistep steps_per_epoch must be >= 1")
            self.milestones = sorted(self.milestones)
        if self.kind == "cosine_warmup" and self.warmup < 0:
            raise ValueError("cosine_warmup warmup must be >= 0")
        if self.kind in ("polynomial", "power_decay") and self.power < 0.0:
            raise ValueError(f"{self.kind} power must be >= 0, got {self.power}")
        return self

    @classmethod
    def constant(cls, base: float) -> "Schedule":
        return cls(kind="constant", base=base)


def schedule_value(s: Schedule, t: int, total_steps: Optional[int] = None) -> float:
    """
    Value of schedule `s` at step `t`.

    Parameters
    ----------
    s : Schedule
        Schedule description.
    t : int
        1-based step index.
    total_steps : int, optional
        Run length; required by `cosine_warmup` and `polynomial`.

    Raises
    ------
    PreconditionError
        If ``t < 1`` or a required `total_steps` is missing.
    """
    if t < 1:
        raise PreconditionError(f"schedule_value: t must be >= 1, got {t}")
    match s.kind:
        case "constant":
            return s.base
        case "multistep":
            epoch = -(-t // s.steps_per_epoch)
            passed = sum(1 for m in s.milestones if m <= epoch)
            return s.base * s.gamma ** passed
        case "power_decay":
            return s.base * float(t) ** (-s.power)
    if total_steps is None or total_steps < 1:
        raise PreconditionError(f"schedule_value: '{s.kind}' needs total_steps >= 1")
    if s.kind == "polynomial":
        return s.base * max(1.0 - t / total_steps, 0.0) ** s.power
    if t <= s.warmup:
        return s.base * t / s.warmup
    span = max(total_steps - s.warmup, 1)
    progress = min((t - s.warmup) / span, 1.0)
    return s.base * 0.5 * (1.0 + math.cos(math.pi * progress))


class ScheduleCheck(BaseModel):
    """
    Outcome of `check_theorem_schedule` for ``η_t ∝ t^-p`` and ``ρ_t ∝ t^-q``.

    Attributes
    ----------
    ok : bool
        All three series conditions hold.
    lr_sum_diverges : bool
        ``Σ t^-p = ∞``, i.e. ``p <= 1``.
    lr_square_converges : bool
        ``Σ t^-2p < ∞``, i.e. ``p > 0.5``.
    radius_term_converges : bool
        ``Σ t^-(p+2q) < ∞``, i.e. ``p + 2q > 1``.
    diagnostic : str
        Human readable explanation.
    """
    ok: bool
    lr_sum_diverges: bool
    lr_square_converges: bool
    radius_term_converges: bool
    diagnostic: str


def check_theorem_schedule(p: float, q: float) -> ScheduleCheck:
    """
    Decide whether power schedules ``η_t = η_0 t^-p`` and ``ρ_t = ρ_0 t^-q``
    satisfy ``Ση = ∞``, ``Ση² < ∞`` and ``Σρ²η < ∞``.
    """
    if p < 0.0 or q < 0.0:
        return ScheduleCheck(
            ok=False, lr_sum_diverges=False, lr_square_converges=False,
            radius_term_converges=False, diagnostic=f"exponents must be non-negative (p={p}, q={q})")
    diverges = p <= 1.0
    square = 2.0 * p > 1.0
    radius = p + 2.0 * q > 1.0
    problems = []
    if not diverges:
        problems.append(f"sum of step sizes converges (p={p} > 1)")
    if not square:
        problems.append(f"sum of squared step sizes diverges (2p={2.0 * p} <= 1)")
    if not radius:
        problems.append(f"sum of rho^2 * eta diverges (p+2q={p + 2.0 * q} <= 1)")
    ok = diverges and square and radius
    return ScheduleCheck(
        ok=ok, lr_sum_diverges=diverges, lr_square_converges=square,
        radius_term_converges=radius,
        diagnostic="all series conditions hold" if ok else "; ".join(problems))
