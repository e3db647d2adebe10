import math

import numpy as np
import pytest

from sasshalab.harness.experiment_config import ExperimentConfig, MetricsConfig, ProblemConfig, RunConfig
from sasshalab.harness.runner import run_grid
from sasshalab.optimizers.optimizer_config import RADIUS_METHODS, OptimizerConfig
from sasshalab.optimizers.schedule import Schedule

pytestmark = pytest.mark.slow

SEEDS = [0, 1, 2, 3, 4]
LR_GRID = [0.01, 0.03, 0.1]
METHODS = ("sassha", "adahessian", "sophiah")


def blob_mlp(method: str) -> ExperimentConfig:
    rho = Schedule.constant(0.05) if method in RADIUS_METHODS else None
    return ExperimentConfig(
        problem=ProblemConfig(kind="mlp", n=1000, p=2, hidden=32, val_fraction=0.2),
        optimizer=OptimizerConfig(method=method, lr=Schedule.constant(LR_GRID[0]), rho=rho),
        run=RunConfig(steps=300, seeds=SEEDS, lr_grid=LR_GRID),
        metrics=MetricsConfig(sharpness=True, n_mc=10, trace_samples=20))


@pytest.fixture(scope="module")
def best_runs():
    """Records at each method's selected rate."""
    return {method: run_grid(blob_mlp(method)).best for method in METHODS}


def median(records, metric) -> float:
    return float(np.median([metric(r) for r in records]))


class TestSharpnessOrderingStudies:

    def test_selected_runs_carry_metrics(self, best_runs):
        for records in best_runs.values():
            assert [r.seed for r in records] == SEEDS
            for r in records:
                assert r.status == "completed"
                assert math.isfinite(r.sharpness.lambda_max)
                assert math.isfinite(r.sharpness.trace)
                assert math.isfinite(r.final_val_loss)

    @pytest.mark.xfail(raises=AssertionError, strict=False, reason="ordering is empirical at this scale")
    def test_sassha_solutions_are_flatter(self, best_runs):
        ours = best_runs["sassha"]
        for baseline in ("adahessian", "sophiah"):
            theirs = best_runs[baseline]
            assert median(ours, lambda r: r.sharpness.lambda_max) <= median(theirs, lambda r: r.sharpness.lambda_max)
            assert median(ours, lambda r: r.sharpness.trace) <= median(theirs, lambda r: r.sharpness.trace)
            assert median(ours, lambda r: r.final_val_loss) <= median(theirs, lambda r: r.final_val_loss)
