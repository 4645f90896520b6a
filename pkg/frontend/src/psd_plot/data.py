"""Readers for the artifact files the training CLI writes.

Each reader validates the documented schema up front and raises
SchemaError naming the offending column or line, so a bad file fails
loudly instead of producing an empty plot.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class SchemaError(ValueError):
    pass


def _require_columns(header: list[str], required: list[str], path) -> None:
    missing = [c for c in required if c not in header]
    if missing:
        raise SchemaError(f"{path}: missing column(s) {missing}")


def _float_column(rows: list[list[str]], header: list[str], name: str,
                  path) -> np.ndarray:
    i = header.index(name)
    out = np.empty(len(rows))
    for r, row in enumerate(rows, start=2):
        try:
            out[r - 2] = float(row[i])
        except (ValueError, IndexError):
            raise SchemaError(
                f"{path}: bad value in column '{name}' at line {r}")
    return out


def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    path = Path(path)
    try:
        with open(path, encoding="utf-8") as fh:
            reader = csv.reader(fh)
            header = next(reader, None)
            rows = [row for row in reader if row]
    except OSError as e:
        raise SchemaError(f"{path}: {e}")
    if header is None:
        raise SchemaError(f"{path}: empty file")
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return header, rows


def read_spectrum_csv(path) -> dict:
    """`skill_id,L,freq,amp,rank` rows from `psd analyze spectrum`."""
    header, rows = _read_csv(path)
    _require_columns(header, ["skill_id", "L", "freq", "amp", "rank"], path)
    sid = [row[header.index("skill_id")] for row in rows]
    return {
        "skill_id": sid,
        "L": _float_column(rows, header, "L", path).astype(int),
        "freq": _float_column(rows, header, "freq", path),
        "amp": _float_column(rows, header, "amp", path),
        "rank": _float_column(rows, header, "rank", path).astype(int),
    }


def read_pca_csv(path) -> dict:
    """`t,L,pc1,pc2` rows from `psd analyze pca`."""
    header, rows = _read_csv(path)
    _require_columns(header, ["t", "L", "pc1", "pc2"], path)
    return {
        "t": _float_column(rows, header, "t", path).astype(int),
        "L": _float_column(rows, header, "L", path).astype(int),
        "pc1": _float_column(rows, header, "pc1", path),
        "pc2": _float_column(rows, header, "pc2", path),
    }


def read_metrics_jsonl(path, required: tuple[str, ...] = ("epoch",)) -> list[dict]:
    """Per-epoch metric objects from the training loop."""
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as e:
        raise SchemaError(f"{path}: {e}")
    records = []
    for n, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            rec = json.loads(line)
        except json.JSONDecodeError as e:
            raise SchemaError(f"{path}: invalid JSON at line {n}: {e}")
        if not isinstance(rec, dict):
            raise SchemaError(f"{path}: line {n} is not an object")
        for key in required:
            if key not in rec:
                raise SchemaError(f"{path}: missing key '{key}' at line {n}")
        records.append(rec)
    if not records:
        raise SchemaError(f"{path}: no records")
    return records


def read_trajectory_csv(path) -> dict:
    """`t,L,obs_*,act_*,r_psd,r_ext[,z_*]` rows from trajectory dumps.

    The final row carries the terminal state with empty action/reward
    cells; it is folded into the observation series.
    """
    header, rows = _read_csv(path)
    _require_columns(header, ["t", "L", "r_psd", "r_ext"], path)
    obs_cols = [c for c in header if c.startswith("obs_")]
    if not obs_cols:
        raise SchemaError(f"{path}: missing column(s) ['obs_0', ...]")
    step_rows = [row for row in rows if row[header.index("r_psd")] != ""]
    obs = np.column_stack([_float_column(rows, header, c, path)
                           for c in obs_cols])
    return {
        "L": int(_float_column(step_rows, header, "L", path)[0]),
        "obs": obs,
        "r_psd": _float_column(step_rows, header, "r_psd", path),
        "r_ext": _float_column(step_rows, header, "r_ext", path),
    }
