"""Experiment reports: named checks, scalar results and CSV tables, written deterministically."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from importlib import metadata
from pathlib import Path

import numpy as np
import scipy


@dataclass
class Check:
    name: str
    value: float
    bound: str
    passed: bool


def _clean(v):
    if isinstance(v, dict):
        return {str(k): _clean(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_clean(x) for x in v]
    if isinstance(v, np.ndarray):
        return _clean(v.tolist())
    if isinstance(v, (np.bool_, bool)):
        return bool(v)
    if isinstance(v, (np.integer,)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else repr(v)
    return v


def versions() -> dict:
    try:
        own = metadata.version("artifact")
    except metadata.PackageNotFoundError:
        own = "unknown"
    return {"monostab": own, "numpy": np.__version__, "scipy": scipy.__version__}


@dataclass
class Report:
    experiment: str
    config: dict
    checks: list = field(default_factory=list)
    results: dict = field(default_factory=dict)
    tables: dict = field(default_factory=dict)
    tolerances: dict = field(default_factory=dict)

    def check(self, name: str, value, bound: str, passed) -> bool:
        self.checks.append(Check(name, float(value), bound, bool(passed)))
        return bool(passed)

    def upper(self, name: str, value, limit: float) -> bool:
        self.tolerances[name] = limit
        return self.check(name, value, f"<= {limit:g}", value <= limit)

    def lower(self, name: str, value, limit: float) -> bool:
        self.tolerances[name] = limit
        return self.check(name, value, f">= {limit:g}", value >= limit)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_dict(self) -> dict:
        return _clean({
            "experiment": self.experiment,
            "passed": self.passed,
            "checks": [{"name": c.name, "value": c.value, "bound": c.bound, "passed": c.passed}
                       for c in self.checks],
            "results": self.results,
            "tolerances": self.tolerances,
            "config": self.config,
            "versions": versions(),
            "tables": sorted(self.tables),
        })

    def write(self, out: str | Path) -> Path:
        out = Path(out)
        out.mkdir(parents=True, exist_ok=True)
        for name in sorted(self.tables):
            (out / f"{name}.csv").write_text(self.tables[name])
        path = out / "report.json"
        path.write_text(json.dumps(self.to_dict(), indent=2, sort_keys=True) + "\n")
        return path

    def summary(self) -> str:
        lines = [f"{self.experiment}: {'PASS' if self.passed else 'FAIL'}"]
        for c in self.checks:
            lines.append(f"  [{'ok' if c.passed else 'FAIL'}] {c.name} = {c.value:.6g} ({c.bound})")
        return "\n".join(lines)


def csv_table(header: list, rows) -> str:
    """Rows of numbers at 17 significant digits; strings pass through."""
    out = [",".join(header)]
    for row in rows:
        out.append(",".join(v if isinstance(v, str) else f"{float(v):.17g}" for v in row))
    return "\n".join(out) + "\n"
