"""Pass/fail records for inequality checks."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any


def relative_slack(lhs: float, rhs: float, rel: float = 1e-8) -> float:
    """Slack ``rel * (1 + |lhs| + |rhs|)`` used by every inequality check."""
    return rel * (1.0 + abs(lhs) + abs(rhs))


@dataclass
class Check:
    """One named inequality ``lhs <= rhs`` with its measured margin."""

    name: str
    lhs: float
    rhs: float
    tolerance: float
    runtime: float = 0.0
    details: dict[str, Any] = field(default_factory=dict)

    @property
    def margin(self) -> float:
        return self.rhs - self.lhs

    @property
    def passed(self) -> bool:
        return bool(self.margin >= -self.tolerance)

    def as_dict(self, with_runtime: bool = False) -> dict[str, Any]:
        out = {
            "name": self.name,
            "lhs": float(self.lhs),
            "rhs": float(self.rhs),
            "margin": float(self.margin),
            "tolerance": float(self.tolerance),
            "passed": self.passed,
            "details": _plain(self.details),
        }
        if with_runtime:
            out["runtime"] = self.runtime
        return out


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, other: "Report") -> None:
        self.checks.extend(other.checks)

    def __iter__(self):
        return iter(self.checks)

    def __len__(self) -> int:
        return len(self.checks)

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def n_failed(self) -> int:
        return sum(not c.passed for c in self.checks)

    def to_json(self, with_runtime: bool = False) -> str:
        # runtimes are excluded by default so that reruns are byte-identical
        payload = {
            "n_checks": len(self.checks),
            "n_failed": self.n_failed,
            "checks": [c.as_dict(with_runtime) for c in self.checks],
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def to_text(self) -> str:
        width = max([len(c.name) for c in self.checks] + [5])
        lines = [
            f"{'check':<{width}}  {'status':<6}  {'lhs':>14}  {'rhs':>14}  {'margin':>14}  {'time[s]':>8}"
        ]
        for c in self.checks:
            status = "PASS" if c.passed else "FAIL"
            lines.append(
                f"{c.name:<{width}}  {status:<6}  {c.lhs:>14.6e}  {c.rhs:>14.6e}  "
                f"{c.margin:>14.6e}  {c.runtime:>8.3f}"
            )
        lines.append(f"{self.n_failed} of {len(self.checks)} checks failed")
        return "\n".join(lines) + "\n"


def _plain(obj: Any) -> Any:
    """Convert numpy scalars/arrays inside ``details`` to JSON-friendly values."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "tolist"):
        return obj.tolist()
    if isinstance(obj, float) or isinstance(obj, (int, str, bool)) or obj is None:
        return obj
    return str(obj)


__all__ = ["Check", "Report", "relative_slack"]
