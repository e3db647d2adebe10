# src/sasshalab/harness/artifacts.py
"""
artifacts
=========

- **Module:** `src/sasshalab/harness/artifacts.py`

On-disk outputs of the harness.

Overview
--------
Layout of an output directory::

    <out>/manifest.json
    <out>/<seed>/record.csv      (or record.json)
    <out>/<seed>/summary.json
    <out>/<seed>/params.ckpt

- **write_record / read_summary**:
  One CSV per seed with the fixed `RECORD_COLUMNS` header. Floats are written
  with ``repr`` so outputs are lossless and byte-identical across repeated
  runs. Evaluation columns are empty on steps without an evaluation.

- **save_checkpoint / load_checkpoint**:
  Binary parameter vector: magic ``SSHA``, ``uint32`` format version,
  ``uint64`` dimension, 16-byte problem hash, then little-endian float64
  values. No optimizer state is stored.

- **problem_hash**:
  blake2b-128 of the canonical JSON of a `ProblemConfig`.

- **write_manifest**:
  Resolved config, RNG algorithm id, package version and per-seed status.

- **flatten_report / write_trajectory**:
  CSV forms of the sharpness and stability reports and of the simulated
  ``E‖x_t‖²`` trajectory.
"""

import csv
import hashlib
import json
import math
import struct
from pathlib import Path

import numpy as np

from sasshalab import __version__
from sasshalab.exception.base_exceptions import DimensionMismatchError, PreconditionError
from sasshalab.harness.experiment_config import ExperimentConfig, ProblemConfig
from sasshalab.harness.run_record import RunRecord, RunSummary
from sasshalab.numkit.rng import RNG_ALGORITHM

RECORD_COLUMNS: tuple[str, ...] = (
    "step", "loss", "lr", "rho", "update_norm", "gc_count", "hvp_count",
    "hessian_change", "val_loss", "val_accuracy",
)

CHECKPOINT_MAGIC = b"SSHA"
CHECKPOINT_VERSION = 1
_HEADER = struct.Struct("<4sIQ16s")


def format_cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def record_rows(record: RunRecord) -> list[list[str]]:
    """CSV cells of `record`, one row per step in `RECORD_COLUMNS` order."""
    evals = {e.step: e for e in record.evals}
    rows = []
    for row in record.steps:
        ev = evals.get(row.step)
        rows.append([
            format_cell(row.step), format_cell(row.loss), format_cell(row.lr), format_cell(row.rho),
            format_cell(row.update_norm), format_cell(row.gc_count), format_cell(row.hvp_count),
            format_cell(row.hessian_change),
            format_cell(ev.val_loss) if ev else "", format_cell(ev.val_accuracy) if ev else "",
        ])
    return rows


def json_safe(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None if math.isnan(value) else ("inf" if value > 0 else "-inf")
    if isinstance(value, dict):
        return {k: json_safe(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_safe(v) for v in value]
    return value


def _from_json(value):
    if value is None:
        return math.nan
    if value in ("inf", "-inf"):
        return float(value)
    return value


def write_json(path: Path, payload) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(json_safe(payload), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def write_record(record: RunRecord, seed_dir: Path, fmt: str = "csv") -> Path:
    """
    Write the per-step record and the summary of one seed.

    Returns
    -------
    Path
        The record file.
    """
    seed_dir = Path(seed_dir)
    seed_dir.mkdir(parents=True, exist_ok=True)
    write_json(seed_dir / "summary.json", record.summary().model_dump())
    if fmt == "json":
        payload = {
            "columns": list(RECORD_COLUMNS),
            "steps": [r.model_dump() for r in record.steps],
            "evals": [e.model_dump() for e in record.evals],
            "status": record.status,
            "diverged_step": record.diverged_step,
            "diverged_quantity": record.diverged_quantity,
        }
        return write_json(seed_dir / "record.json", payload)
    if fmt != "csv":
        raise PreconditionError(f"write_record: unknown format '{fmt}'")
    path = seed_dir / "record.csv"
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(RECORD_COLUMNS)
        writer.writerows(record_rows(record))
    return path


def read_summary(seed_dir: Path) -> RunSummary:
    """Load ``summary.json`` written by `write_record`."""
    data = json.loads((Path(seed_dir) / "summary.json").read_text(encoding="utf-8"))
    data["metrics"] = {k: _from_json(v) for k, v in data.get("metrics", {}).items()}
    return RunSummary.model_validate(data)


def problem_hash(problem: ProblemConfig) -> bytes:
    """16-byte digest identifying a problem configuration."""
    canonical = json.dumps(problem.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
    return hashlib.blake2b(canonical.encode("utf-8"), digest_size=16).digest()


def save_checkpoint(path: Path, x, digest: bytes = bytes(16)) -> Path:
    """
    Write a parameter vector.

    Raises
    ------
    DimensionMismatchError
        If `x` is not one-dimensional.
    PreconditionError
        If `digest` is not 16 bytes.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise DimensionMismatchError(f"save_checkpoint: expected a flat vector, got shape {x.shape}")
    if len(digest) != 16:
        raise PreconditionError(f"save_checkpoint: problem hash must be 16 bytes, got {len(digest)}")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(_HEADER.pack(CHECKPOINT_MAGIC, CHECKPOINT_VERSION, x.size, digest) + x.astype("<f8").tobytes())
    return path


def load_checkpoint(path: Path) -> tuple[np.ndarray, bytes]:
    """
    Read a checkpoint written by `save_checkpoint`.

    Returns
    -------
    tuple of (ndarray, bytes)
        The parameter vector and its problem hash.

    Raises
    ------
    PreconditionError
        On a bad magic, unsupported version or truncated payload.
    """
    blob = Path(path).read_bytes()
    if len(blob) < _HEADER.size:
        raise PreconditionError(f"load_checkpoint: '{path}' is too short for a checkpoint header")
    magic, version, dim, digest = _HEADER.unpack_from(blob)
    if magic != CHECKPOINT_MAGIC:
        raise PreconditionError(f"load_checkpoint: '{path}' is not a checkpoint")
    if version != CHECKPOINT_VERSION:
        raise PreconditionError(f"load_checkpoint: unsupported version {version}")
    payload = blob[_HEADER.size:]
    if len(payload) != 8 * dim:
        raise PreconditionError(f"load_checkpoint: expected {dim} values, found {len(payload) // 8}")
    return np.frombuffer(payload, dtype="<f8").astype(np.float64), digest


def write_manifest(out_dir: Path, cfg: ExperimentConfig, records: list[RunRecord]) -> Path:
    """Run-level manifest; wall-clock seconds are informational only."""
    payload = {
        "config": cfg.model_dump(mode="json"),
        "rng_algorithm": RNG_ALGORITHM,
        "version": __version__,
        "problem_hash": problem_hash(cfg.problem).hex() if cfg.problem is not None else None,
        "seeds": [
            {
                "seed": r.seed,
                "lr": r.lr,
                "status": r.status,
                "diverged_step": r.diverged_step,
                "diverged_quantity": r.diverged_quantity,
                "wall_clock": r.wall_clock,
            }
            for r in records
        ],
    }
    return write_json(Path(out_dir) / "manifest.json", payload)


def write_experiment(out_dir: Path, cfg: ExperimentConfig, records: list[RunRecord]) -> list[Path]:
    """
    Write every seed directory and the manifest.

    Returns
    -------
    list[Path]
        Record files, in seed order, followed by the manifest.
    """
    out_dir = Path(out_dir)
    digest = problem_hash(cfg.problem) if cfg.problem is not None else bytes(16)
    written = []
    for record in records:
        seed_dir = out_dir / str(record.seed)
        written.append(write_record(record, seed_dir, cfg.output.format))
        if cfg.output.checkpoint:
            save_checkpoint(seed_dir / "params.ckpt", record.final_x, digest)
    written.append(write_manifest(out_dir, cfg, records))
    return written


def write_rows(path: Path, columns, rows) -> Path:
    """Generic CSV writer for tabular subcommand outputs."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        writer.writerows([[format_cell(v) for v in row] for row in rows])
    return path


def flatten_report(payload: dict) -> tuple[list[str], list]:
    """
    One-row table of a report.

    List fields are spread over ``<name>_1 .. <name>_n`` columns; ``None``
    cells are written empty.
    """
    columns, row = [], []
    for key, value in payload.items():
        if isinstance(value, (list, tuple)):
            for i, item in enumerate(value, start=1):
                columns.append(f"{key}_{i}")
                row.append(item)
        else:
            columns.append(key)
            row.append(value)
    return columns, row


TRAJECTORY_COLUMNS: tuple[str, ...] = ("step", "mean_sq_norm")


def write_trajectory(path: Path, mean_sq_norm) -> Path:
    """``E‖x_t‖²`` per step as CSV."""
    return write_rows(path, TRAJECTORY_COLUMNS, [[t, float(v)] for t, v in enumerate(mean_sq_norm)])
