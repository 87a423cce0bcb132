"""CSV and manifest emission with byte-stable formatting.

Floats are written with 17 significant digits ('.' decimal separator),
which round-trips float64 exactly, and rows are emitted in a fixed order,
so re-running an experiment with the same seed reproduces its summary
files byte for byte (wall-clock values excepted).
"""

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

RAW_BASE_COLUMNS = ("t", "state_cost", "input_cost", "tr_sigma", "est_err")
SUMMARY_LEAD_COLUMNS = ("experiment", "system", "controller")
SUMMARY_TAIL_COLUMNS = ("mean", "stderr", "ci95")


def fmt(value) -> str:
    """Canonical cell formatting: shortest-exact floats, plain ints/strings."""
    if isinstance(value, (bool, np.bool_)):
        raise TypeError("boolean cells are not part of any schema")
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_table(path, columns, rows) -> Path:
    """Write dict rows under a fixed column order; missing keys are an error."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(row[c]) for c in columns])
    return path


def summary_columns(axis_columns) -> tuple:
    return SUMMARY_LEAD_COLUMNS + tuple(axis_columns) + SUMMARY_TAIL_COLUMNS


def write_summary(path, axis_columns, rows) -> Path:
    """Summary CSV: {experiment, system, controller, <axes...>, mean, stderr, ci95}."""
    return write_table(path, summary_columns(axis_columns), rows)


def raw_columns(p: int) -> tuple:
    return RAW_BASE_COLUMNS + tuple(f"u_{i + 1}" for i in range(p))


def write_raw_rollout(path, record) -> Path:
    """Per-trial record: one row per step plus a terminal row at t = T.

    The terminal row carries the terminal state cost in state_cost with
    zero input columns, so summing state_cost + input_cost over all rows
    reproduces the trial's total cost exactly.
    """
    T, p = record.us.shape
    rows = []
    for t in range(T):
        row = {
            "t": t,
            "state_cost": record.state_costs[t],
            "input_cost": record.input_costs[t],
            "tr_sigma": record.tr_sigmas[t],
            "est_err": record.est_errs[t],
        }
        for i in range(p):
            row[f"u_{i + 1}"] = record.us[t, i]
        rows.append(row)
    terminal = {
        "t": T,
        "state_cost": record.terminal_cost,
        "input_cost": 0.0,
        "tr_sigma": record.tr_sigmas[T],
        "est_err": record.est_errs[T],
    }
    for i in range(p):
        terminal[f"u_{i + 1}"] = 0.0
    rows.append(terminal)
    return write_table(path, raw_columns(p), rows)


def read_table(path):
    """Read a CSV back as (columns, rows of str dicts)."""
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        columns = next(reader)
        rows = [dict(zip(columns, line)) for line in reader]
    return columns, rows


def read_raw_rollout(path):
    """Raw per-trial CSV as a dict of float arrays keyed by column."""
    columns, rows = read_table(path)
    return {c: np.array([float(r[c]) for r in rows]) for c in columns}


def sha256_file(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(path, payload) -> Path:
    """JSON run manifest: config snapshot, seeds, artifact paths, timing."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path
