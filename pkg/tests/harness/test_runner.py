import math

import numpy as np

from sasshalab.harness.experiment_config import ExperimentConfig, MetricsConfig, ProblemConfig, RunConfig, ToyConfig
from sasshalab.harness.runner import (
    ExperimentRunner,
    build_problem,
    run_experiment,
    run_grid,
    run_toy,
    seed_streams,
)
from sasshalab.objectives.mixture import FLAT_COMPONENT, SHARP_COMPONENT
from sasshalab.optimizers.optimizer_config import RADIUS_METHODS, OptimizerConfig
from sasshalab.optimizers.schedule import Schedule


def experiment(method="sassha", lr=0.05, steps=20, seeds=(1,), problem=None, **run) -> ExperimentConfig:
    rho = Schedule.constant(0.05) if method in RADIUS_METHODS else None
    return ExperimentConfig(
        problem=problem or ProblemConfig(kind="quadratic", dim=4),
        optimizer=OptimizerConfig(method=method, lr=Schedule.constant(lr), rho=rho),
        run=RunConfig(steps=steps, seeds=list(seeds), **run))


class TestBuildProblem:

    def test_data_seed_pins_instance(self):
        pcfg = ProblemConfig(kind="quadratic", dim=3, data_seed=42)
        s1, s2 = seed_streams(pcfg, 1), seed_streams(pcfg, 2)
        p1 = build_problem(pcfg, s1["data"], s1["init"])
        p2 = build_problem(pcfg, s2["data"], s2["init"])
        np.testing.assert_array_equal(p1.objective.hessian, p2.objective.hessian)

    def test_seeds_draw_own_instance(self):
        pcfg = ProblemConfig(kind="quadratic", dim=3)
        s1, s2 = seed_streams(pcfg, 1), seed_streams(pcfg, 2)
        p1 = build_problem(pcfg, s1["data"], s1["init"])
        p2 = build_problem(pcfg, s2["data"], s2["init"])
        assert not np.array_equal(p1.objective.hessian, p2.objective.hessian)

    def test_supervised_split_and_noise(self):
        pcfg = ProblemConfig(kind="logistic", n=50, p=2, val_fraction=0.2, label_noise=0.1)
        s = seed_streams(pcfg, 3)
        problem = build_problem(pcfg, s["data"], s["init"])
        assert problem.supervised
        assert problem.objective.n_examples == 40
        assert problem.validation.n_examples == 10
        np.testing.assert_array_equal(problem.x0, np.zeros(2))

    def test_mlp_dimension(self):
        pcfg = ProblemConfig(kind="mlp", n=30, p=3, n_classes=3, hidden=4, val_fraction=0.0)
        s = seed_streams(pcfg, 3)
        problem = build_problem(pcfg, s["data"], s["init"])
        assert problem.x0.size == 3 * 4 + 4 + 4 * 3 + 3


class TestExperimentRunner:

    def test_deterministic(self):
        a = run_experiment(experiment(seeds=(7,)))[0]
        b = run_experiment(experiment(seeds=(7,)))[0]
        np.testing.assert_array_equal(a.final_x, b.final_x)
        assert [r.loss for r in a.steps] == [r.loss for r in b.steps]

    def test_counters(self):
        record = run_experiment(experiment(steps=25))[0]
        assert (record.gc_count, record.hvp_count) == (50, 3)
        assert math.isnan(record.steps[1].hessian_change)
        assert math.isfinite(record.steps[10].hessian_change)

    def test_one_record_per_seed(self):
        records = run_experiment(experiment(seeds=(1, 2, 3)))
        assert [r.seed for r in records] == [1, 2, 3]
        assert not np.array_equal(records[0].final_x, records[1].final_x)

    def test_evaluation_cadence(self):
        record = run_experiment(experiment(steps=12, eval_every=5))[0]
        assert [e.step for e in record.evals] == [5, 10, 12]
        assert record.final_val_loss == record.evals[-1].val_loss

    def test_divergence_recorded(self):
        records = run_experiment(experiment(method="sgdm", lr=1e10, steps=60, seeds=(1, 2)))
        assert all(r.diverged for r in records)
        assert records[0].diverged_step is not None
        assert records[0].diverged_quantity in ("loss", "gradient", "parameters")
        assert len(records[0].steps) == records[0].diverged_step - 1

    def test_supervised_minibatch_run(self):
        problem = ProblemConfig(kind="logistic", n=100, p=2, batch_size=20)
        cfg = experiment(method="sassha", lr=0.1, steps=15, problem=problem)
        cfg = cfg.model_copy(update={"metrics": MetricsConfig(sharpness=True, n_mc=5, trace_samples=2,
                                                              midpoint_sensitivity=True)})
        record = run_experiment(cfg)[0]
        assert 0.0 <= record.final_val_accuracy <= 1.0
        assert record.sharpness is not None
        assert not math.isnan(record.midpoint_sensitivity)

    def test_logging(self, notifier):
        ExperimentRunner(experiment(seeds=(4,)), notifier).run()
        assert notifier.lines[0].startswith("[ExperimentRunner.run:seed=4] | start sassha")
        assert notifier.lines[-1].startswith("[ExperimentRunner.run:seed=4] | end status=completed")


class TestRunGrid:

    def test_selects_stable_rate(self):
        result = run_grid(experiment(method="sgdm", seeds=(1, 2), lr_grid=[1e10, 0.05], steps=40))
        assert result.best_lr == 0.05
        assert result.median_val_loss[1e10] == math.inf
        assert len(result.best) == 2

    def test_single_rate(self):
        result = run_grid(experiment(steps=5))
        assert result.best_lr == 0.05
        assert list(result.records) == [0.05]


class TestRunToy:

    def test_rows_and_basins(self):
        opt = OptimizerConfig(method="sassha", lr=Schedule.constant(0.1), rho=Schedule.constant(0.05))
        rows = run_toy(opt, ToyConfig(grid=2, steps=10))
        assert len(rows) == 8
        assert {r.variant for r in rows} == {"sassha", "rho0"}
        assert all(r.basin in (SHARP_COMPONENT, FLAT_COMPONENT, -1) for r in rows)

    def test_no_ablation_without_radius(self):
        opt = OptimizerConfig(method="adamw", lr=Schedule.constant(0.1))
        rows = run_toy(opt, ToyConfig(grid=2, steps=5, ablation=True))
        assert {r.variant for r in rows} == {"adamw"}

    def test_reproducible(self):
        opt = OptimizerConfig(method="sassha", lr=Schedule.constant(0.1), rho=Schedule.constant(0.05))
        a = run_toy(opt, ToyConfig(grid=2, steps=10, ablation=False), seed=3)
        b = run_toy(opt, ToyConfig(grid=2, steps=10, ablation=False), seed=3)
        assert a == b
