"""CSV persistence for scans and training logs (17 significant digits)."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .circuit import format_angle

SCAN_COLUMNS = ("coupling", "S_raw", "S_a", "S_b", "direct_ref", "dual_ref")
LOG_COLUMNS = ("episode", "reward", "S_RL", "epsilon", "loss_mean")


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return "nan" if x is None or not np.isfinite(x) else format_angle(x)


def write_scan_csv(path, result) -> None:
    """Metadata as ``# key: value`` lines, then the data table."""
    meta = dict(result.metadata)
    meta["crossing"] = result.crossing
    meta["flags"] = ",".join(result.flags)
    n = len(result.grid)
    nan = np.full(n, np.nan)
    cols = [result.grid, result.s_raw, result.s_a, result.s_b,
            nan if result.direct_ref is None else result.direct_ref,
            nan if result.dual_ref is None else result.dual_ref]
    with open(path, "w", newline="") as fh:
        for k, v in meta.items():
            fh.write(f"# {k}: {json.dumps(v)}\n")
        fh.write(",".join(SCAN_COLUMNS) + "\n")
        for row in zip(*cols):
            fh.write(",".join(_fmt(float(x)) for x in row) + "\n")


def read_scan_csv(path):
    """Returns ``(metadata, columns)`` with columns as float arrays."""
    meta, rows, header = {}, [], None
    for line in Path(path).read_text().splitlines():
        if line.startswith("#"):
            key, _, val = line[1:].strip().partition(":")
            meta[key.strip()] = json.loads(val)
        elif header is None:
            header = line.split(",")
        elif line:
            rows.append([float(x) for x in line.split(",")])
    if header is None:
        raise ValueError(f"{path}: missing header")
    data = np.array(rows, dtype=float).reshape(-1, len(header))
    return meta, {name: data[:, i] for i, name in enumerate(header)}


def write_log_csv(path, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(LOG_COLUMNS)
        for row in rows:
            w.writerow([_fmt(x) for x in row])


def read_log_csv(path) -> list:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != LOG_COLUMNS:
            raise ValueError(f"{path}: unexpected header {header}")
        return [(int(row[0]), *map(float, row[1:])) for row in r]
