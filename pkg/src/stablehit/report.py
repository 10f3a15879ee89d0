"""Verification reports shared by the Mellin identity checks and the verify suite."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Any

__all__ = ["CheckPoint", "VerificationReport"]

REPORT_SCHEMA_VERSION = 1


@dataclass(frozen=True)
class CheckPoint:
    input: Any
    expected: Any
    actual: Any
    deviation: float


def _jsonable(v):
    if isinstance(v, float) and not math.isfinite(v):
        return repr(v)
    if hasattr(v, "tolist"):
        return v.tolist()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    return v


@dataclass
class VerificationReport:
    """Outcome of one named check.

    ``passed`` is derived: it holds iff every deviation is finite and at most
    ``tolerance``.  A NaN deviation marks a point that could not be evaluated.
    """

    check_name: str
    points: list[CheckPoint]
    tolerance: float
    metadata: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def max_deviation(self) -> float:
        if not self.points:
            return 0.0
        devs = [float(p.deviation) for p in self.points]
        if any(math.isnan(d) for d in devs):
            return math.nan
        return max(devs)

    @property
    def passed(self) -> bool:
        m = self.max_deviation
        return bool(self.points) and not math.isnan(m) and m <= self.tolerance

    def to_dict(self) -> dict:
        return {
            "schema_version": REPORT_SCHEMA_VERSION,
            "check_name": self.check_name,
            "passed": self.passed,
            "tolerance": self.tolerance,
            "max_deviation": _jsonable(self.max_deviation),
            "points": [
                {
                    "input": _jsonable(p.input),
                    "expected": _jsonable(p.expected),
                    "actual": _jsonable(p.actual),
                    "deviation": _jsonable(float(p.deviation)),
                }
                for p in self.points
            ],
            "metadata": _jsonable(self.metadata),
            "notes": list(self.notes),
        }

    def to_json(self, indent=2) -> str:
        return json.dumps(self.to_dict(), indent=indent)

    def to_text(self, max_points=8) -> str:
        status = "PASS" if self.passed else "FAIL"
        lines = [
            f"[{status}] {self.check_name}: max deviation {self.max_deviation:.3e}"
            f" (tolerance {self.tolerance:.3e}, {len(self.points)} points)"
        ]
        worst = sorted(
            self.points,
            key=lambda p: -math.inf if math.isnan(p.deviation) else -p.deviation,
        )[:max_points]
        for p in worst:
            lines.append(
                f"    input={_fmt(p.input):>22}  expected={_fmt(p.expected):>22}"
                f"  actual={_fmt(p.actual):>22}  dev={p.deviation:.3e}"
            )
        for n in self.notes:
            lines.append(f"    note: {n}")
        return "\n".join(lines)

    def __str__(self):
        return self.to_text()


def _fmt(v):
    if isinstance(v, float):
        return f"{v:.10g}"
    return str(v)
