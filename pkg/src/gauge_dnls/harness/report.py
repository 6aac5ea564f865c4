"""Deterministic experiment reports and sweep execution."""

from __future__ import annotations

import csv
import io
import json
import math
import os
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

THREADS_ENV = "GAUGE_DNLS_THREADS"


def worker_count() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None or raw == "":
        return 1
    try:
        n = int(raw)
    except ValueError as exc:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}") from exc
    if n < 1:
        raise ValueError(f"{THREADS_ENV} must be a positive integer, got {raw!r}")
    return n


def run_points(fn, items) -> list:
    """Map ``fn`` over sweep points; results come back in sweep order."""
    items = list(items)
    n = min(worker_count(), max(len(items), 1))
    if n == 1:
        return [fn(item) for item in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def clean(obj):
    """Convert numpy scalars/arrays and non-finite floats into JSON-safe values."""
    if isinstance(obj, dict):
        return {str(k): clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return clean(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, complex):
        return [obj.real, obj.imag]
    return obj


@dataclass
class Contract:
    name: str
    value: float
    threshold: float
    relation: str  # "<=", ">=", "in"
    passed: bool

    @classmethod
    def at_most(cls, name, value, threshold):
        return cls(name, value, threshold, "<=", bool(np.isfinite(value) and value <= threshold))

    @classmethod
    def at_least(cls, name, value, threshold):
        return cls(name, value, threshold, ">=", bool(np.isfinite(value) and value >= threshold))

    @classmethod
    def holds(cls, name, flag: bool):
        return cls(name, float(bool(flag)), 1.0, "==", bool(flag))

    def to_dict(self) -> dict:
        return {"name": self.name, "value": self.value, "threshold": self.threshold, "relation": self.relation, "passed": self.passed}


@dataclass
class Report:
    kind: str
    config: dict
    measurements: list = field(default_factory=list)
    fits: dict = field(default_factory=dict)
    contracts: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures and all(c.passed for c in self.contracts)

    def to_dict(self) -> dict:
        """Everything except wall-clock timings, which live in a sidecar file."""
        return clean(
            {
                "kind": self.kind,
                "config": self.config,
                "measurements": self.measurements,
                "fits": self.fits,
                "contracts": [c.to_dict() for c in self.contracts],
                "failures": self.failures,
                "passed": self.passed,
            }
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1) + "\n"

    def to_csv(self) -> str:
        rows = self.measurements
        keys = sorted({k for row in rows for k in row})
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(keys)
        for row in rows:
            writer.writerow([_cell(row.get(k, "")) for k in keys])
        return buf.getvalue()

    def write(self, out_dir, fmt: str = "json", stem: str | None = None) -> list[Path]:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        stem = stem or self.kind
        paths = []
        if fmt == "json":
            p = out / f"{stem}.json"
            p.write_text(self.to_json())
        elif fmt == "csv":
            p = out / f"{stem}.csv"
            p.write_text(self.to_csv())
        else:
            raise ValueError(f"unknown format {fmt!r}")
        paths.append(p)
        t = out / f"{stem}.timings.json"
        t.write_text(json.dumps(clean(self.timings), sort_keys=True, indent=1) + "\n")
        paths.append(t)
        return paths


def _cell(v):
    v = clean(v)
    if isinstance(v, float):
        return repr(v)
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return v


class Timer:
    def __init__(self, timings: dict, key: str):
        self.timings, self.key = timings, key

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.timings[self.key] = self.timings.get(self.key, 0.0) + time.perf_counter() - self.t0
        return False
