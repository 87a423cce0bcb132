"""Summary-CSV loading and schema validation.

Each experiment writes a summary with a fixed header: three lead columns
identifying the run, experiment-specific axis columns, and three
statistics columns. Validation happens before any plotting, and a
mismatch reports exactly which columns are missing or unexpected.
"""

import csv
import hashlib
from pathlib import Path


class SchemaError(ValueError):
    """An input file does not match the documented result schema."""


LEAD_COLUMNS = ("experiment", "system", "controller")
TAIL_COLUMNS = ("mean", "stderr", "ci95")

# Axis columns per experiment, matching the harness's summary layout.
AXIS_COLUMNS = {
    "h-sweep": ("H",),
    "decompose": ("H", "component"),
    "kf-diag": ("metric", "t"),
    "counterfactual": ("t", "coord", "u_sep_mpc", "u_b_mpc"),
    "synthetic-gap": ("alpha", "tr_sigma", "median", "q25", "q75"),
    "heatmap": ("r_scale", "c0", "best_h", "sep_mean_cost", "bmpc_mean_cost"),
    "rho-sweep": ("rho",),
    "runtime": ("H",),
    "init-study": ("init", "max_iters"),
}

# Columns that hold labels rather than numbers.
_TEXT_COLUMNS = frozenset(LEAD_COLUMNS) | {"component", "metric", "init"}


def summary_schema(figure_id) -> tuple:
    return LEAD_COLUMNS + AXIS_COLUMNS[figure_id] + TAIL_COLUMNS


def check_schema(figure_id, columns, path):
    """Raise SchemaError with a column-level diagnostic on any mismatch."""
    expected = summary_schema(figure_id)
    if tuple(columns) == expected:
        return
    missing = [c for c in expected if c not in columns]
    unexpected = [c for c in columns if c not in expected]
    parts = [f"{path}: header does not match the {figure_id} summary schema"]
    if missing:
        parts.append("missing columns: " + ", ".join(missing))
    if unexpected:
        parts.append("unexpected columns: " + ", ".join(unexpected))
    if not missing and not unexpected:
        parts.append(f"column order differs: expected {list(expected)}, "
                     f"found {list(columns)}")
    raise SchemaError("; ".join(parts))


def load_summary(figure_id, path):
    """Read a summary CSV as typed row dicts after validating its header."""
    path = Path(path)
    if not path.is_file():
        raise SchemaError(f"{path}: no such input file")
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            columns = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        check_schema(figure_id, columns, path)
        rows = []
        for lineno, line in enumerate(reader, start=2):
            if len(line) != len(columns):
                raise SchemaError(f"{path}:{lineno}: expected "
                                  f"{len(columns)} cells, found {len(line)}")
            row = {}
            for col, cell in zip(columns, line):
                if col in _TEXT_COLUMNS:
                    row[col] = cell
                else:
                    try:
                        row[col] = float(cell)
                    except ValueError:
                        raise SchemaError(
                            f"{path}:{lineno}: column {col!r} holds "
                            f"{cell!r}, expected a number") from None
            rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def sha256_inputs(paths) -> str:
    """One digest over the concatenated bytes of all input files."""
    digest = hashlib.sha256()
    for path in paths:
        digest.update(Path(path).read_bytes())
    return digest.hexdigest()
