# src/sasshalab/harness/config_parser.py
"""
config_parser
=============

- **Module:** `src/sasshalab/harness/config_parser.py`

Line-oriented experiment configuration files.

Overview
--------
- **Format**:
  One ``key = value`` per line; ``#`` starts a comment; blank lines are
  ignored. Keys are dotted ``section.name``. Lists are comma separated;
  matrices (``ensemble.diagonals``) separate rows with ``;``.

- **CONFIG_KEYS**:
  The single table of accepted keys. Each entry names the model field it
  fills, the value parser and a one-line description; `docs/config_keys.md`
  mirrors it.

- **parse_config**:
  Unknown keys, duplicate keys, malformed lines, values of the wrong type,
  missing required keys, missing files and model validation failures all
  raise `ConfigError` carrying the key and the 1-based line number.

Usage
-----
```python
cfg = parse_config("q.cfg")            # train mode
cfg = parse_config("ens.cfg", mode="stability")
```
"""

from pathlib import Path
from typing import Any, Callable, NamedTuple

from pydantic import ValidationError

from sasshalab.exception.base_exceptions import ConfigError
from sasshalab.harness.experiment_config import (
    EnsembleConfig,
    ExperimentConfig,
    MetricsConfig,
    OutputConfig,
    ProblemConfig,
    RunConfig,
    ToyConfig,
)
from sasshalab.optimizers.optimizer_config import RADIUS_METHODS, OptimizerConfig

DEFAULT_LR = 0.1

SECTION_MODELS = {
    "problem": ProblemConfig,
    "optimizer": OptimizerConfig,
    "run": RunConfig,
    "metrics": MetricsConfig,
    "output": OutputConfig,
    "ensemble": EnsembleConfig,
    "toy": ToyConfig,
}


def _parse_bool(text: str) -> bool:
    lowered = text.lower()
    if lowered in ("true", "yes", "on", "1"):
        return True
    if lowered in ("false", "no", "off", "0"):
        return False
    raise ValueError(f"expected a boolean, got '{text}'")


def _parse_int(text: str) -> int:
    return int(text)


def _parse_float(text: str) -> float:
    return float(text)


def _parse_str(text: str) -> str:
    if not text:
        raise ValueError("empty value")
    return text


def _parse_int_list(text: str) -> list[int]:
    return [int(v) for v in text.split(",") if v.strip()]


def _parse_float_list(text: str) -> list[float]:
    return [float(v) for v in text.split(",") if v.strip()]


def _parse_matrix(text: str) -> list[list[float]]:
    return [_parse_float_list(row) for row in text.split(";") if row.strip()]


class KeySpec(NamedTuple):
    section: str
    path: tuple[str, ...]
    parse: Callable[[str], Any]
    doc: str


def _schedule_keys(prefix: str, what: str) -> dict[str, KeySpec]:
    return {
        f"optimizer.{prefix}": KeySpec("optimizer", (prefix, "base"), _parse_float, f"{what} base value"),
        f"optimizer.{prefix}_schedule": KeySpec(
            "optimizer", (prefix, "kind"), _parse_str,
            f"{what} schedule: constant, multistep, cosine_warmup, polynomial, power_decay"),
        f"optimizer.{prefix}_milestones": KeySpec(
            "optimizer", (prefix, "milestones"), _parse_int_list, f"{what} multistep milestones (epochs)"),
        f"optimizer.{prefix}_gamma": KeySpec("optimizer", (prefix, "gamma"), _parse_float, f"{what} multistep factor"),
        f"optimizer.{prefix}_steps_per_epoch": KeySpec(
            "optimizer", (prefix, "steps_per_epoch"), _parse_int, f"{what} steps per epoch for multistep"),
        f"optimizer.{prefix}_warmup": KeySpec("optimizer", (prefix, "warmup"), _parse_int, f"{what} warmup steps"),
        f"optimizer.{prefix}_power": KeySpec(
            "optimizer", (prefix, "power"), _parse_float, f"{what} exponent for polynomial / power_decay"),
    }


def _flat(section: str, parse: Callable[[str], Any], doc: str, name: str) -> tuple[str, KeySpec]:
    return f"{section}.{name}", KeySpec(section, (name,), parse, doc)


CONFIG_KEYS: dict[str, KeySpec] = dict([
    _flat("problem", _parse_str, "quadratic, mixture, logistic or mlp", "kind"),
    _flat("problem", _parse_int, "quadratic dimension", "dim"),
    _flat("problem", _parse_float, "quadratic condition number", "condition"),
    _flat("problem", _parse_float, "quadratic largest eigenvalue", "scale"),
    _flat("problem", _parse_str, "CSV dataset path (relative to the config file)", "dataset"),
    _flat("problem", _parse_str, "synthetic generator when no dataset: blobs or teacher", "generator"),
    _flat("problem", _parse_int, "synthetic examples", "n"),
    _flat("problem", _parse_int, "synthetic feature count", "p"),
    _flat("problem", _parse_int, "synthetic class count", "n_classes"),
    _flat("problem", _parse_float, "blob center distance from the origin", "separation"),
    _flat("problem", _parse_float, "blob standard deviation", "spread"),
    _flat("problem", _parse_int, "teacher network width", "teacher_hidden"),
    _flat("problem", _parse_int, "seed pinning data and problem across run seeds", "data_seed"),
    _flat("problem", _parse_int, "mini-batch size (0 = full batch)", "batch_size"),
    _flat("problem", _parse_float, "label-noise fraction in [0, 1]", "label_noise"),
    _flat("problem", _parse_float, "held-out fraction for validation", "val_fraction"),
    _flat("problem", _parse_float, "logistic ridge coefficient", "l2"),
    _flat("problem", _parse_bool, "logistic intercept", "fit_intercept"),
    _flat("problem", _parse_int, "MLP hidden width", "hidden"),
    _flat("problem", _parse_str, "MLP activation: tanh or relu", "activation"),
    _flat("problem", _parse_str, "MLP loss: mse or ce", "loss"),
    _flat("problem", _parse_float, "scale of the random initial point", "init_scale"),
    _flat("optimizer", _parse_str, "sassha, msassha, sam, adahessian, sophiah, adamw or sgdm", "method"),
    _flat("optimizer", _parse_float, "first-moment coefficient", "beta1"),
    _flat("optimizer", _parse_float, "second-moment / Hessian coefficient", "beta2"),
    _flat("optimizer", _parse_int, "Hessian refresh interval", "k"),
    _flat("optimizer", _parse_float, "decoupled weight decay", "weight_decay"),
    _flat("optimizer", _parse_float, "denominator floor", "eps"),
    _flat("optimizer", _parse_int, "Hutchinson probes per refresh", "n_hutch"),
    _flat("optimizer", _parse_float, "SGD heavy-ball momentum", "momentum"),
    _flat("optimizer", _parse_str, "SAM base update: sgdm or adamw", "sam_base"),
    _flat("optimizer", _parse_float, "Sophia-H clip threshold", "sophia_clip"),
    _flat("optimizer", _parse_float, "Sophia-H Hessian floor", "sophia_floor"),
    _flat("optimizer", _parse_float, "preconditioner exponent (0.5 = square root)", "hessian_power"),
    _flat("optimizer", _parse_bool, "accumulate absolute Hessian estimates", "hessian_abs"),
    _flat("optimizer", _parse_str, "preconditioner stabilizer: none, damping, clipping", "stabilizer"),
    _flat("optimizer", _parse_float, "damping constant or clipping floor", "stabilizer_value"),
    _flat("run", _parse_int, "steps per run", "steps"),
    _flat("run", _parse_int_list, "comma separated run seeds", "seeds"),
    _flat("run", _parse_int, "evaluation cadence in steps (0 = end only)", "eval_every"),
    _flat("run", _parse_float_list, "learning rates to sweep", "lr_grid"),
    _flat("metrics", _parse_bool, "compute the sharpness report at the end", "sharpness"),
    _flat("metrics", _parse_float, "sharpness radius", "rho"),
    _flat("metrics", _parse_int, "random directions for the average loss increase", "n_mc"),
    _flat("metrics", _parse_int, "Hutchinson probes for the trace", "trace_samples"),
    _flat("metrics", _parse_int, "directions for Hessian sensitivity (0 = skip)", "sensitivity_dirs"),
    _flat("metrics", _parse_int, "probes for Hessian sensitivity", "sensitivity_probes"),
    _flat("metrics", _parse_bool, "Hessian sensitivity at the trajectory midpoint", "midpoint_sensitivity"),
    _flat("output", _parse_str, "output directory", "dir"),
    _flat("output", _parse_str, "csv or json", "format"),
    _flat("output", _parse_bool, "write parameter checkpoints", "checkpoint"),
    _flat("ensemble", _parse_str, "commuting_random or diagonals", "kind"),
    _flat("ensemble", _parse_int, "dimension for commuting_random", "d"),
    _flat("ensemble", _parse_int, "members for commuting_random", "members"),
    _flat("ensemble", _parse_float, "lower spectrum bound", "low"),
    _flat("ensemble", _parse_float, "upper spectrum bound", "high"),
    _flat("ensemble", _parse_matrix, "member diagonals, rows separated by ';'", "diagonals"),
    _flat("ensemble", _parse_float_list, "member probabilities (uniform when omitted)", "probs"),
    _flat("ensemble", _parse_int, "ensemble and simulation seed", "seed"),
    _flat("ensemble", _parse_float, "step size", "eta"),
    _flat("ensemble", _parse_float, "perturbation radius", "rho"),
    _flat("ensemble", _parse_float, "denominator floor", "eps"),
    _flat("ensemble", _parse_int, "simulation horizon", "steps"),
    _flat("ensemble", _parse_int, "simulated trajectories", "n_traj"),
    _flat("toy", _parse_int, "initializations per axis", "grid"),
    _flat("toy", _parse_float, "grid lower bound (both axes)", "low"),
    _flat("toy", _parse_float, "grid upper bound (both axes)", "high"),
    _flat("toy", _parse_int, "steps per initialization", "steps"),
    _flat("toy", _parse_bool, "also run the zero-radius ablation", "ablation"),
]) | _schedule_keys("lr", "step size") | _schedule_keys("rho", "perturbation radius")

REQUIRED_KEYS: dict[str, tuple[str, ...]] = {
    "train": ("problem.kind", "optimizer.method", "run.steps", "run.seeds"),
    "sharpness": ("problem.kind",),
    "stability": ("ensemble.eta", "ensemble.eps"),
    "toy": ("optimizer.method",),
}


def read_entries(path) -> dict[str, tuple[str, int]]:
    """
    Read raw ``key -> (value, line)`` entries.

    Raises
    ------
    ConfigError
        On malformed lines, unknown keys or duplicates.
    """
    entries: dict[str, tuple[str, int]] = {}
    with Path(path).open("r") as handle:
        for line_no, raw in enumerate(handle, start=1):
            text = raw.split("#", 1)[0].strip()
            if not text:
                continue
            if "=" not in text:
                raise ConfigError("expected 'key = value'", line=line_no)
            key, value = (part.strip() for part in text.split("=", 1))
            if key not in CONFIG_KEYS:
                raise ConfigError("unknown key", key=key, line=line_no)
            if key in entries:
                raise ConfigError(f"duplicate key (first set on line {entries[key][1]})", key=key, line=line_no)
            entries[key] = (value, line_no)
    return entries


def _resolve_file(value: str, base: Path, key: str, line: int) -> str:
    candidate = Path(value)
    for option in ((candidate,) if candidate.is_absolute() else (base / candidate, candidate)):
        if option.is_file():
            return str(option)
    raise ConfigError(f"file '{value}' does not exist", key=key, line=line)


def _key_for(section: str, loc: tuple, entries: dict[str, tuple[str, int]]) -> str:
    loc = tuple(str(part) for part in loc)
    best = None
    for key, spec in CONFIG_KEYS.items():
        if spec.section != section:
            continue
        n = min(len(loc), len(spec.path))
        if n and spec.path[:n] == loc[:n] and (best is None or (key in entries and best not in entries)):
            best = key
    return best or section


def parse_config(path, mode: str = "train") -> ExperimentConfig:
    """
    Parse and validate an experiment configuration file.

    Parameters
    ----------
    path : str or Path
        Config file.
    mode : {"train", "sharpness", "stability", "toy"}
        Decides which keys are required.

    Returns
    -------
    ExperimentConfig
        Validated configuration with defaults filled in.

    Raises
    ------
    ConfigError
        With the offending key and line number.
    """
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file '{path}' does not exist")
    entries = read_entries(path)
    for key in REQUIRED_KEYS.get(mode, ()):
        if key not in entries:
            raise ConfigError("missing required key", key=key)

    sections: dict[str, dict] = {}
    for key, (text, line) in entries.items():
        spec = CONFIG_KEYS[key]
        try:
            value = spec.parse(text)
        except ValueError as exc:
            raise ConfigError(f"invalid value '{text}': {exc}", key=key, line=line) from None
        if key == "problem.dataset":
            value = _resolve_file(value, path.parent, key, line)
        target = sections.setdefault(spec.section, {})
        for part in spec.path[:-1]:
            target = target.setdefault(part, {})
        target[spec.path[-1]] = value

    if "optimizer" in sections:
        sections["optimizer"].setdefault("lr", {}).setdefault("base", DEFAULT_LR)
        method = sections["optimizer"].get("method")
        if method in RADIUS_METHODS and "rho" not in sections["optimizer"]:
            line = entries["optimizer.method"][1] if "optimizer.method" in entries else None
            raise ConfigError(f"required for method '{method}'", key="optimizer.rho", line=line)

    for section, values in sections.items():
        try:
            sections[section] = SECTION_MODELS[section].model_validate(values)
        except ValidationError as exc:
            error = exc.errors()[0]
            key = _key_for(section, error["loc"], entries)
            line = entries[key][1] if key in entries else None
            raise ConfigError(error["msg"], key=key, line=line) from None
    return ExperimentConfig(**sections)
