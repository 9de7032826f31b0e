"""Tabular and JSON artifacts with atomic writes and run manifests."""

from __future__ import annotations

import csv
import json
import math
import os
import platform
import tempfile
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np


@dataclass
class SweepTable:
    """Rows of a parameter sweep with fixed column names."""

    columns: list[str]
    rows: list[tuple] = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def append(self, row: Sequence) -> None:
        if len(row) != len(self.columns):
            raise ValueError(f"row has {len(row)} entries, expected {len(self.columns)}")
        self.rows.append(tuple(row))

    def column(self, name: str) -> list:
        i = self.columns.index(name)
        return [r[i] for r in self.rows]

    def __len__(self) -> int:
        return len(self.rows)

    @classmethod
    def from_dicts(cls, dicts: Iterable[dict], columns: Sequence[str], meta: dict | None = None):
        return cls(list(columns), [tuple(d[c] for c in columns) for d in dicts], dict(meta or {}))


def _cell(v):
    # repr round-trips floats exactly, which keeps outputs bitwise reproducible
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return repr(v) if math.isfinite(v) else str(v)
    if isinstance(v, (np.integer,)):
        return str(int(v))
    if v is None:
        return ""
    return str(v)


def _atomic_write(path: Path, write) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            write(fh)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def write_csv(path, table: SweepTable) -> Path:
    def write(fh):
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(table.columns)
        for row in table.rows:
            w.writerow([_cell(v) for v in row])
    return _atomic_write(path, write)


def read_csv(path) -> SweepTable:
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        cols = next(r)
        return SweepTable(cols, [tuple(row) for row in r])


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _jsonable(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (str, int, bool)) or obj is None:
        return obj
    return str(obj)


def write_json(path, obj) -> Path:
    text = json.dumps(_jsonable(obj), indent=2, sort_keys=True) + "\n"
    return _atomic_write(path, lambda fh: fh.write(text))


def versions() -> dict:
    out = {"python": platform.python_version()}
    for name in ("artifact", "numpy", "scipy", "mpmath", "matplotlib"):
        try:
            out[name] = metadata.version(name)
        except metadata.PackageNotFoundError:
            out[name] = None
    return out


def manifest(command: str, config: dict, tolerances: dict, outputs: Sequence[str],
             wall_time: float, extra: dict | None = None) -> dict:
    return {
        "command": command,
        "config": config,
        "tolerances": tolerances,
        "outputs": list(outputs),
        "versions": versions(),
        "wall_time_s": round(wall_time, 3),
        **(extra or {}),
    }
