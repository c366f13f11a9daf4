"""Check records and verification reports.

A report is a list of named checks. Positive checks pass when the
residual is at or below the tolerance; negative controls are expected to
show a clear effect and pass when the residual is at or ABOVE the
tolerance (a silent negative control means the instrument is broken, so
the suite must not report success). The overall verdict is the
conjunction of both kinds resolving as expected.
"""
from __future__ import annotations

import json
import platform
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Optional

from .errors import ConfigError

ORACLE_TAGS = ("finite-difference", "closed-form", "internal-cross-check")


@dataclass
class CheckRecord:
    name: str
    anchor: str
    residual: float
    tolerance: float
    oracle: str
    negative: bool = False
    detail: str = ""

    def __post_init__(self):
        if self.oracle not in ORACLE_TAGS:
            raise ConfigError(
                f"unknown oracle tag '{self.oracle}'; expected one of "
                f"{ORACLE_TAGS}")
        self.residual = float(self.residual)
        self.tolerance = float(self.tolerance)

    @property
    def passed(self) -> bool:
        if self.negative:
            return self.residual >= self.tolerance
        return self.residual <= self.tolerance

    def row(self) -> dict:
        return {
            "name": self.name,
            "anchor": self.anchor,
            "residual": self.residual,
            "tolerance": self.tolerance,
            "oracle": self.oracle,
            "negative": self.negative,
            "pass": self.passed,
            "detail": self.detail,
        }


@dataclass
class VerificationReport:
    suite: str
    checks: list
    environment: dict = field(default_factory=dict)
    notes: tuple = ()
    timestamp: Optional[str] = None

    def __post_init__(self):
        self.checks = sorted(self.checks, key=lambda c: c.name)
        self.notes = tuple(self.notes)
        if self.timestamp is None:
            self.timestamp = datetime.now(timezone.utc).isoformat()

    @property
    def verdict(self) -> bool:
        return all(c.passed for c in self.checks) and bool(self.checks)

    def to_document(self) -> dict:
        return {
            "suite": self.suite,
            "environment": dict(sorted(self.environment.items())),
            "notes": list(self.notes),
            "checks": [c.row() for c in self.checks],
            "verdict": self.verdict,
            "timestamp": self.timestamp,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_document(), indent=2, sort_keys=False)

    def text_table(self) -> str:
        rows = [c.row() for c in self.checks]
        name_w = max([len("check")] + [len(r["name"]) for r in rows])
        anch_w = max([len("anchor")] + [len(r["anchor"]) for r in rows])
        lines = [
            f"suite: {self.suite}",
            f"{'check':<{name_w}}  {'anchor':<{anch_w}}  "
            f"{'residual':>12}  {'tolerance':>12}  {'oracle':<20}  outcome",
        ]
        for r in rows:
            kind = "expected-effect" if r["negative"] else "bound"
            outcome = "pass" if r["pass"] else "FAIL"
            lines.append(
                f"{r['name']:<{name_w}}  {r['anchor']:<{anch_w}}  "
                f"{r['residual']:>12.3e}  {r['tolerance']:>12.3e}  "
                f"{r['oracle']:<20}  {outcome} ({kind})")
        for note in self.notes:
            lines.append(f"note: {note}")
        lines.append(f"verdict: {'pass' if self.verdict else 'FAIL'}")
        return "\n".join(lines)


def base_environment(**extra) -> dict:
    env = {"python": platform.python_version()}
    env.update(extra)
    return env
