# src/sasshalab/harness/report.py
"""
report
======

- **Module:** `src/sasshalab/harness/report.py`

Aggregation across seeds and the analytic cost model.

Overview
--------
- **summarize / summarize_values**:
  Mean and sample standard deviation (``ddof=1``; 0 for a single value)
  per metric over the completed seeds. Diverged seeds are counted in
  `n_diverged` and excluded from the statistics; a metric with no completed
  seed is reported as ``failed``.

- **cost_model / cost_report**:
  Per-step cost in gradient-computation equivalents, charging an HVP as
  `HVP_COST` gradients. `cost_model` uses the analytic counters of a long
  run; `cost_report` uses the counters a set of records actually reached.
"""

import math
from typing import Optional

import numpy as np
from pydantic import BaseModel

from sasshalab.harness.run_record import RunRecord, RunSummary
from sasshalab.optimizers.optimizer import expected_counters
from sasshalab.optimizers.optimizer_config import DEFAULT_K, DEFAULT_SOPHIA_K

HVP_COST = 3.0
COST_MODEL_REFRESHES = 1000


class MetricSummary(BaseModel):
    mean: float
    std: float
    n: int
    n_diverged: int = 0
    failed: bool = False


def summarize_values(values, n_diverged: int = 0) -> MetricSummary:
    """Mean and sample std of the finite `values`."""
    finite = [float(v) for v in values if math.isfinite(v)]
    if not finite:
        return MetricSummary(mean=math.nan, std=math.nan, n=0, n_diverged=n_diverged, failed=True)
    std = float(np.std(finite, ddof=1)) if len(finite) > 1 else 0.0
    return MetricSummary(mean=float(np.mean(finite)), std=std, n=len(finite), n_diverged=n_diverged)


def summarize(records: list[RunRecord] | list[RunSummary]) -> dict[str, MetricSummary]:
    """
    Per-metric summary over seeds.

    Parameters
    ----------
    records : list of RunRecord or RunSummary
        One entry per seed, typically of a single method and rate.

    Returns
    -------
    dict[str, MetricSummary]
        Keyed by metric name, in first-seen order.
    """
    summaries = [r.summary() if isinstance(r, RunRecord) else r for r in records]
    completed = [s for s in summaries if s.status == "completed"]
    n_diverged = len(summaries) - len(completed)
    names: list[str] = []
    for s in summaries:
        names.extend(name for name in s.metrics if name not in names)
    return {
        name: summarize_values([s.metrics.get(name, math.nan) for s in completed], n_diverged)
        for name in names
    }


class CostEntry(BaseModel):
    """Per-step cost of one method; `seed` is set for measured entries."""
    method: str
    k: int
    gc_per_step: float
    hvp_per_step: float
    gc_equivalents: float
    seed: Optional[int] = None


def _entry(method: str, k: int, gc: int, hvp: int, steps: int, seed: int = None) -> CostEntry:
    gc_rate, hvp_rate = gc / steps, hvp / steps
    return CostEntry(
        method=method, k=k, gc_per_step=gc_rate, hvp_per_step=hvp_rate,
        gc_equivalents=gc_rate + HVP_COST * hvp_rate, seed=seed)


def cost_model(method: str, k: int = None, n_hutch: int = 1) -> CostEntry:
    """
    Asymptotic per-step cost of `method`.

    Counters are evaluated over ``1000 * k`` steps so the refresh count is
    exact; SASSHA with ``k=10`` gives 2 GC + 0.1 HVP, i.e. 2.3 GC-eq.
    """
    if k is None:
        k = DEFAULT_SOPHIA_K if method == "sophiah" else DEFAULT_K
    steps = COST_MODEL_REFRESHES * k
    gc, hvp = expected_counters(method, k, steps, n_hutch)
    return _entry(method, k, gc, hvp, steps)


def cost_report(records: list[RunRecord]) -> list[CostEntry]:
    """Measured per-step cost, one entry per record that took a step."""
    return [
        _entry(r.method, r.k, r.gc_count, r.hvp_count, len(r.steps), r.seed)
        for r in records if r.steps
    ]
