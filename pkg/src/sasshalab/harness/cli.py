# src/sasshalab/harness/cli.py
"""
cli
===

- **Module:** `src/sasshalab/harness/cli.py`

Command-line entry point ``sasshalab``.

Overview
--------
Subcommands:

- ``train``: run every seed of an experiment and write
  ``<out>/<seed>/record.csv``, checkpoints, ``manifest.json`` and the
  measured per-step cost ``cost.<format>``.
- ``sharpness``: evaluate the sharpness metrics of a saved checkpoint.
- ``stability``: necessary stability conditions and surrogate dynamics for
  an ensemble. With ``--out`` the simulated ``E‖x_t‖²`` is also written to
  ``trajectory.csv``.

The sharpness and stability reports are JSON unless ``--format`` or
``output.format`` asks for CSV, which is written as one header row and
one value row.
- ``toy``: two-basin landscape sweep; CSV of final basin and Hessian trace
  per initialization.
- ``cost``: per-step cost model of every method.
- ``summary``: mean ± std per metric over run directories.

Exit codes: 0 on success, 1 on usage or validation errors, 2 when every run
diverged.

Usage
-----
```bash
sasshalab train --config q.cfg --out runs/
sasshalab stability --config ens.cfg
```
"""

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from sasshalab import __version__
from sasshalab.exception.base_exceptions import (
    ConfigError,
    DatasetParseError,
    DimensionMismatchError,
    PreconditionError,
    UsageError,
)
from sasshalab.harness import artifacts
from sasshalab.harness.config_parser import parse_config
from sasshalab.harness.experiment_config import ExperimentConfig, ToyConfig
from sasshalab.harness.report import cost_model, cost_report, summarize
from sasshalab.harness.runner import ToyRow, build_problem, run_grid, run_toy, seed_streams
from sasshalab.lab_base_model import LoggingNotifier, LogNotifier
from sasshalab.numkit.rng import RngStream
from sasshalab.optimizers.optimizer_config import METHODS
from sasshalab.sharpness.metrics import sharpness_report
from sasshalab.stability.analysis import necessary_conditions
from sasshalab.stability.dynamics import simulate_surrogate
from sasshalab.stability.ensemble import Ensemble

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_DIVERGED = 2

VALIDATION_ERRORS = (ConfigError, UsageError, DatasetParseError, PreconditionError, DimensionMismatchError)


class LabArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises `UsageError` instead of exiting."""

    def error(self, message):
        raise UsageError(f"{self.format_usage()}{self.prog}: error: {message}")


def build_parser() -> LabArgumentParser:
    common = LabArgumentParser(add_help=False)
    common.add_argument("--config", help="Experiment config file (key = value lines).")
    common.add_argument("--out", help="Output directory; overrides output.dir.")
    common.add_argument("--seed-override", type=int, help="Run only this seed.")
    common.add_argument("--format", choices=("csv", "json"), help="Output format; overrides output.format.")
    common.add_argument("--verbose", action="store_true", help="Log progress to stderr.")

    parser = LabArgumentParser(prog="sasshalab", description="Sharpness-aware second-order optimizer laboratory.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    commands = parser.add_subparsers(dest="command", required=True)
    commands.add_parser("train", parents=[common], help="Run an experiment.")
    sharp = commands.add_parser("sharpness", parents=[common], help="Sharpness metrics of a checkpoint.")
    sharp.add_argument("--checkpoint", required=True, help="params.ckpt written by train.")
    commands.add_parser("stability", parents=[common], help="Linear stability analysis of an ensemble.")
    commands.add_parser("toy", parents=[common], help="Two-basin landscape sweep.")
    cost = commands.add_parser("cost", parents=[common], help="Per-step cost model.")
    cost.add_argument("--k", type=int, default=None, help="Hessian refresh interval.")
    cost.add_argument("--n-hutch", type=int, default=1, help="Probes per refresh.")
    summary = commands.add_parser("summary", parents=[common], help="Aggregate run directories.")
    summary.add_argument("dirs", nargs="+", help="Output directories written by train.")
    return parser


def _load(args, mode: str) -> ExperimentConfig:
    if not args.config:
        raise UsageError(f"{args.command}: --config is required")
    cfg = parse_config(args.config, mode=mode)
    output = cfg.output.model_copy(update={
        k: v for k, v in (("dir", args.out), ("format", args.format)) if v is not None})
    update = {"output": output}
    if args.seed_override is not None and cfg.run is not None:
        update["run"] = cfg.run.model_copy(update={"seeds": [args.seed_override]})
    return cfg.model_copy(update=update)


def _emit(text: str, out: str, name: str, notifier: LogNotifier) -> None:
    if out is None:
        print(text, end="" if text.endswith("\n") else "\n")
        return
    path = Path(out) / name
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")
    if notifier is not None:
        notifier.add_log(f"[cli] wrote {path}")


def _table(columns, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(artifacts.json_safe([dict(zip(columns, row)) for row in rows]), indent=2) + "\n"
    lines = [",".join(columns)]
    lines += [",".join(artifacts.format_cell(v) for v in row) for row in rows]
    return "\n".join(lines) + "\n"


def _report_format(args, cfg: ExperimentConfig) -> str:
    if args.format is not None:
        return args.format
    if "format" in cfg.output.model_fields_set:
        return cfg.output.format
    return "json"


def _report_text(payload: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(artifacts.json_safe(payload), indent=2, sort_keys=True) + "\n"
    columns, row = artifacts.flatten_report(payload)
    return _table(columns, [row], "csv")


def cmd_train(args, notifier: LogNotifier) -> int:
    cfg = _load(args, "train")
    grid = run_grid(cfg, notifier)
    records = grid.best
    out = Path(cfg.output.dir)
    for path in artifacts.write_experiment(out, cfg, records):
        if notifier is not None:
            notifier.add_log(f"[cli] wrote {path}")
    if len(grid.records) > 1:
        artifacts.write_json(out / "grid.json", {
            "best_lr": grid.best_lr,
            "median_val_loss": {repr(lr): v for lr, v in grid.median_val_loss.items()},
        })
    fmt = cfg.output.format
    columns = ["seed", "method", "k", "gc_per_step", "hvp_per_step", "gc_equivalents"]
    entries = cost_report(records)
    _emit(_table(columns, [[getattr(e, c) for c in columns] for e in entries], fmt), str(out), f"cost.{fmt}", notifier)
    return EXIT_DIVERGED if all(r.diverged for r in records) else EXIT_OK


def cmd_sharpness(args, notifier: LogNotifier) -> int:
    cfg = _load(args, "sharpness")
    x, digest = artifacts.load_checkpoint(args.checkpoint)
    if digest != bytes(16) and digest != artifacts.problem_hash(cfg.problem):
        raise PreconditionError(f"checkpoint '{args.checkpoint}' was written for a different problem")
    seed = args.seed_override if args.seed_override is not None else (cfg.run.seeds[0] if cfg.run else 0)
    streams = seed_streams(cfg.problem, seed)
    problem = build_problem(cfg.problem, streams["data"], streams["init"])
    if x.size != problem.objective.dim:
        raise DimensionMismatchError(f"checkpoint has {x.size} parameters, problem expects {problem.objective.dim}")
    m = cfg.metrics
    report = sharpness_report(
        problem.objective, x, m.rho, m.n_mc, m.trace_samples, streams["metrics"],
        m.sensitivity_dirs, m.sensitivity_probes)
    fmt = _report_format(args, cfg)
    payload = report.model_dump() | {"flags": report.flags()}
    _emit(_report_text(payload, fmt), args.out, f"sharpness.{fmt}", notifier)
    return EXIT_OK


def _ensemble(cfg: ExperimentConfig) -> Ensemble:
    e = cfg.ensemble
    if e.kind == "diagonals":
        return Ensemble.from_diagonals(e.diagonals, e.probs or None)
    return Ensemble.commuting_random(RngStream(e.seed).child("ensemble"), e.d, e.members, e.low, e.high)


def cmd_stability(args, notifier: LogNotifier) -> int:
    cfg = _load(args, "stability")
    e = cfg.ensemble
    ensemble = _ensemble(cfg)
    report = necessary_conditions(ensemble, e.eta, e.rho, e.eps)
    simulation = simulate_surrogate(
        ensemble, e.eta, e.rho, e.eps, np.ones(ensemble.d), e.steps, e.n_traj,
        RngStream(e.seed).child("dynamics"))
    payload = report.model_dump() | {
        "commuting": ensemble.commuting,
        "simulation_ratio": simulation.ratio(),
        "simulation_diverged": simulation.diverged,
        "simulation_diverged_step": simulation.diverged_step,
    }
    fmt = _report_format(args, cfg)
    if fmt == "json":
        payload["mean_sq_norm"] = simulation.mean_sq_norm.tolist()
    _emit(_report_text(payload, fmt), args.out, f"stability.{fmt}", notifier)
    if args.out is not None:
        path = artifacts.write_trajectory(Path(args.out) / "trajectory.csv", simulation.mean_sq_norm)
        if notifier is not None:
            notifier.add_log(f"[cli] wrote {path}")
    return EXIT_OK


def cmd_toy(args, notifier: LogNotifier) -> int:
    cfg = _load(args, "toy")
    seed = args.seed_override if args.seed_override is not None else (cfg.run.seeds[0] if cfg.run else 0)
    rows = run_toy(cfg.optimizer, cfg.toy or ToyConfig(), seed, notifier)
    columns = list(ToyRow.model_fields)
    text = _table(columns, [[getattr(r, c) for c in columns] for r in rows], cfg.output.format)
    _emit(text, args.out, f"toy.{cfg.output.format}", notifier)
    return EXIT_DIVERGED if all(r.status == "diverged" for r in rows) else EXIT_OK


def cmd_cost(args, notifier: LogNotifier) -> int:
    fmt = args.format or "csv"
    entries = [cost_model(method, args.k, args.n_hutch) for method in METHODS]
    columns = ["method", "k", "gc_per_step", "hvp_per_step", "gc_equivalents"]
    text = _table(columns, [[getattr(e, c) for c in columns] for e in entries], fmt)
    _emit(text, args.out, f"cost.{fmt}", notifier)
    return EXIT_OK


def cmd_summary(args, notifier: LogNotifier) -> int:
    fmt = args.format or "csv"
    columns = ["dir", "metric", "mean", "std", "n", "n_diverged", "failed"]
    rows = []
    all_failed = True
    for directory in args.dirs:
        base = Path(directory)
        seed_dirs = sorted(p for p in base.iterdir() if (p / "summary.json").is_file()) if base.is_dir() else []
        if not seed_dirs:
            raise UsageError(f"summary: '{directory}' contains no run records")
        stats = summarize([artifacts.read_summary(p) for p in seed_dirs])
        for name, s in stats.items():
            rows.append([directory, name, s.mean, s.std, s.n, s.n_diverged, s.failed])
            all_failed = all_failed and s.failed
    _emit(_table(columns, rows, fmt), args.out, f"summary.{fmt}", notifier)
    return EXIT_DIVERGED if all_failed else EXIT_OK


COMMANDS = {
    "train": cmd_train,
    "sharpness": cmd_sharpness,
    "stability": cmd_stability,
    "toy": cmd_toy,
    "cost": cmd_cost,
    "summary": cmd_summary,
}


def main(argv=None) -> int:
    """
    Parse `argv` and run the subcommand.

    Returns
    -------
    int
        Process exit code.
    """
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        notifier = None
        if args.verbose:
            logging.basicConfig(level=logging.INFO, format="%(message)s", stream=sys.stderr)
            notifier = LoggingNotifier()
        return COMMANDS[args.command](args, notifier)
    except VALIDATION_ERRORS as exc:
        print(f"sasshalab: {exc.message}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
