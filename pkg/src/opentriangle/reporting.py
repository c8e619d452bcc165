"""Delimited and JSON output helpers.

Floats are written with 17 significant digits, which round-trips IEEE
doubles exactly: rerunning a command from its manifest must reproduce
every output byte for byte, so formatting is part of the contract.
JSON is emitted with sorted keys and no timestamps for the same reason.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from . import __version__


def fmt_float(x: float) -> str:
    return format(float(x), ".17g")


def _cell(x) -> str:
    if isinstance(x, (float, np.floating)):
        return fmt_float(x)
    return str(x)


def write_matrix_csv(path: Path, matrix: np.ndarray, label: str = "vertex") -> None:
    """Row-major matrix with a header row and a leading label column."""
    matrix = np.asarray(matrix, dtype=float)
    lines = [",".join([label] + [str(j) for j in range(matrix.shape[1])])]
    for i, row in enumerate(matrix):
        lines.append(",".join([str(i)] + [fmt_float(x) for x in row]))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def write_table_csv(path: Path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_cell(x) for x in row))
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def sanitize(obj):
    """Recursively convert numpy scalars and arrays into plain Python."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [sanitize(v) for v in obj.tolist()]
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer, int)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    return obj


def write_json(path: Path, payload: dict) -> None:
    text = json.dumps(sanitize(payload), sort_keys=True, indent=2)
    Path(path).write_text(text + "\n", encoding="utf-8")


def build_manifest(
    subcommand: str, params: dict, outputs, results: dict, tolerances: dict
) -> dict:
    """Everything needed to re-run the command and to audit what it saw.

    params holds exactly the flag values (no output directory, which is
    supplied at replay time); outputs are bare file names relative to the
    manifest's own directory.
    """
    return {
        "subcommand": subcommand,
        "params": sanitize(params),
        "outputs": sorted(str(o) for o in outputs),
        "results": sanitize(results),
        "tolerances": sanitize(tolerances),
        "version": __version__,
    }


def load_manifest(path: Path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return json.load(fh)
