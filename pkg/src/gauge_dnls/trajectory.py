"""Time-sampled solutions plus their per-sample diagnostics, with CSV/JSON export."""

from __future__ import annotations

import base64
import csv
import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .spectral import Field, Grid

CSV_COLUMNS = ("t", "mass", "gauged_energy", "h1_norm", "hs_norm", "sup_primitive", "picard_iters")
DUMP_FORMAT = "gauge-dnls-fields/1"


@dataclass
class Trajectory:
    grid: Grid
    times: np.ndarray
    values: np.ndarray  # (n_times, n) physical samples
    diagnostics: dict = field(default_factory=dict)
    status: str = "ok"
    message: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.values = np.asarray(self.values, dtype=np.complex128).reshape(len(self.times), self.grid.n)
        if len(self.times) > 1 and np.any(np.diff(self.times) <= 0):
            raise ValueError("trajectory times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def fields(self) -> list[Field]:
        return [Field(self.grid, v) for v in self.values]

    def field_at(self, i: int) -> Field:
        return Field(self.grid, self.values[i])

    @property
    def final(self) -> Field:
        return self.field_at(-1)

    @property
    def ok(self) -> bool:
        return self.status == "ok"

    def to_csv(self, path=None) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        n = len(self.times)
        cols = [self.times] + [self.diagnostics.get(c, np.full(n, np.nan)) for c in CSV_COLUMNS[1:]]
        for row in zip(*cols):
            writer.writerow([_fmt(v) for v in row])
        text = buf.getvalue()
        if path is not None:
            Path(path).write_text(text)
        return text


def _fmt(v) -> str:
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    v = float(v)
    return "nan" if math.isnan(v) else repr(v)


def _encode(arr: np.ndarray) -> str:
    return base64.b64encode(np.ascontiguousarray(arr, dtype="<c16").tobytes()).decode("ascii")


def _decode(text: str, shape) -> np.ndarray:
    return np.frombuffer(base64.b64decode(text), dtype="<c16").reshape(shape).copy()


def dump_trajectory(traj: Trajectory) -> str:
    """Serialise to JSON; sample values are base64 little-endian complex128 (bit exact)."""
    doc = {
        "format": DUMP_FORMAT,
        "grid": traj.grid.to_dict(),
        "times": [float(t).hex() for t in traj.times],
        "values": _encode(traj.values),
        "status": traj.status,
        "message": traj.message,
        "meta": traj.meta,
    }
    return json.dumps(doc, sort_keys=True, indent=1)


def load_trajectory(text: str) -> Trajectory:
    doc = json.loads(text)
    if doc.get("format") != DUMP_FORMAT:
        raise ValueError(f"not a field dump: {doc.get('format')!r}")
    grid = Grid(**doc["grid"])
    times = np.array([float.fromhex(t) for t in doc["times"]])
    values = _decode(doc["values"], (len(times), grid.n))
    return Trajectory(grid, times, values, status=doc["status"], message=doc["message"], meta=doc["meta"])


def dump_field(f: Field) -> str:
    doc = {
        "format": DUMP_FORMAT,
        "grid": f.grid.to_dict(),
        "times": [],
        "representation": f.representation,
        "values": _encode(f.values),
    }
    return json.dumps(doc, sort_keys=True, indent=1)


def load_field(text: str) -> Field:
    doc = json.loads(text)
    grid = Grid(**doc["grid"])
    return Field(grid, _decode(doc["values"], (grid.n,)), doc.get("representation", "physical"))
