"""Run reports: per-check records with a stable schema, rendered as text or JSON."""
from __future__ import annotations

import dataclasses
import json
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

SCHEMA_VERSION = 1
PROVENANCE = ("paper", "derived", "external", "trivial")


@dataclass
class CheckResult:
    """One reproduced claim.  ``passed`` is None for checks skipped at a reduced limit."""

    check_id: str
    paper_anchor: str
    expected: Any
    computed: Any
    tolerance: Any
    passed: bool | None
    provenance: str = "paper"
    note: str = ""

    def __post_init__(self):
        if self.provenance not in PROVENANCE:
            raise ValueError(f"unknown provenance {self.provenance!r}")

    def as_dict(self) -> dict:
        return {
            "check_id": self.check_id,
            "paper_anchor": self.paper_anchor,
            "expected": self.expected,
            "computed": self.computed,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "provenance": self.provenance,
            "note": self.note,
        }


def skipped(check_id: str, anchor: str, expected: Any, reason: str) -> CheckResult:
    return CheckResult(check_id, anchor, expected, None, None, None, note=reason)


@dataclass
class RunReport:
    command: str
    config: dict
    checks: list[CheckResult] = field(default_factory=list)
    data: dict = field(default_factory=dict)
    wall_time_s: float | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed is not False for c in self.checks)

    @property
    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if c.passed is False]

    def add(self, check: CheckResult) -> CheckResult:
        self.checks.append(check)
        return check

    def to_structured(self) -> str:
        """JSON document; wall time is left out so reruns compare byte for byte."""
        doc = {
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "config": self.config,
            "checks": [c.as_dict() for c in self.checks],
            "data": self.data,
            "pass": self.passed,
        }
        return json.dumps(doc, default=_jsonable, sort_keys=True, indent=2, allow_nan=False)

    def to_text(self) -> str:
        lines = [f"# {self.command}"]
        for c in self.checks:
            status = "SKIP" if c.passed is None else ("PASS" if c.passed else "FAIL")
            line = f"{status} {c.check_id} [{c.paper_anchor}] computed={_fmt(c.computed)} expected={_fmt(c.expected)}"
            if c.tolerance not in (None, 0):
                line += f" tol={_fmt(c.tolerance)}"
            if c.note:
                line += f"  ({c.note})"
            lines.append(line)
        for key in sorted(self.data):
            value = self.data[key]
            if isinstance(value, list) and value and isinstance(value[0], dict):
                lines.append(f"{key}:")
                for row in value:
                    lines.append("  " + " ".join(f"{k}={_fmt(v)}" for k, v in row.items()))
            else:
                lines.append(f"{key}: {_fmt(value)}")
        if self.wall_time_s is not None:
            lines.append(f"wall_time_s: {self.wall_time_s:.2f}")
        lines.append("RESULT: " + ("PASS" if self.passed else "FAIL"))
        return "\n".join(lines)


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return _finite(float(obj))
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if dataclasses.is_dataclass(obj):
        return dataclasses.asdict(obj)
    if isinstance(obj, (set, frozenset)):
        return sorted(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _finite(x: float):
    return x if math.isfinite(x) else str(x)


def _fmt(v) -> str:
    if isinstance(v, float):
        return f"{v:.10g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)
