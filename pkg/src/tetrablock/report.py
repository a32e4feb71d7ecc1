"""Residual/verdict bookkeeping shared by every verification routine."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Any

PASS = "pass"
FAIL = "fail"
INCONCLUSIVE = "inconclusive"
SKIPPED = "skipped"


@dataclass
class Check:
    residual: float | None
    threshold: float | None
    verdict: str
    note: str = ""

    def to_dict(self) -> dict[str, Any]:
        d: dict[str, Any] = {
            "residual": self.residual,
            "threshold": self.threshold,
            "verdict": self.verdict,
        }
        if self.note:
            d["note"] = self.note
        return d


@dataclass
class VerificationReport:
    """Named residuals with pass/fail/inconclusive verdicts.

    ``config`` echoes the tolerances and seeds that produced the report and
    ``meta`` carries free-form context (instance provenance, dimensions).
    """

    checks: dict[str, Check] = field(default_factory=dict)
    config: dict[str, Any] = field(default_factory=dict)
    meta: dict[str, Any] = field(default_factory=dict)
    errors: dict[str, str] = field(default_factory=dict)

    def add(self, name: str, residual: float, threshold: float, note: str = "") -> Check:
        residual = float(residual)
        verdict = PASS if residual <= threshold else FAIL
        chk = Check(residual, float(threshold), verdict, note)
        self.checks[name] = chk
        return chk

    def add_dead_zone(self, name: str, residual: float, threshold: float, note: str = "") -> Check:
        """Pass at ``threshold``, fail above ``10*threshold``, else inconclusive."""
        residual = float(residual)
        if residual <= threshold:
            verdict = PASS
        elif residual > 10 * threshold:
            verdict = FAIL
        else:
            verdict = INCONCLUSIVE
        chk = Check(residual, float(threshold), verdict, note)
        self.checks[name] = chk
        return chk

    def add_verdict(self, name: str, verdict: str, residual: float | None = None,
                    threshold: float | None = None, note: str = "") -> Check:
        chk = Check(None if residual is None else float(residual),
                    None if threshold is None else float(threshold), verdict, note)
        self.checks[name] = chk
        return chk

    def skip(self, name: str, reason: str) -> None:
        self.checks[name] = Check(None, None, SKIPPED, reason)

    def merge(self, other: "VerificationReport", prefix: str = "") -> None:
        for name, chk in other.checks.items():
            self.checks[prefix + name] = chk
        for name, msg in other.errors.items():
            self.errors[prefix + name] = msg

    def residual(self, name: str) -> float:
        r = self.checks[name].residual
        return float("nan") if r is None else r

    def max_residual(self, prefix: str = "") -> float:
        vals = [c.residual for n, c in self.checks.items()
                if n.startswith(prefix) and c.residual is not None]
        return max(vals) if vals else 0.0

    def failures(self) -> list[str]:
        return [n for n, c in self.checks.items() if c.verdict == FAIL]

    @property
    def passed(self) -> bool:
        """True when no check failed or was inconclusive and no stage errored."""
        return not self.errors and all(
            c.verdict in (PASS, SKIPPED) for c in self.checks.values()
        )

    def to_dict(self) -> dict[str, Any]:
        return {
            "passed": self.passed,
            "checks": {k: self.checks[k].to_dict() for k in sorted(self.checks)},
            "errors": dict(sorted(self.errors.items())),
            "config": self.config,
            "meta": self.meta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "VerificationReport":
        rep = cls(config=d.get("config", {}), meta=d.get("meta", {}),
                  errors=dict(d.get("errors", {})))
        for name, c in d.get("checks", {}).items():
            rep.checks[name] = Check(c.get("residual"), c.get("threshold"),
                                     c["verdict"], c.get("note", ""))
        return rep

    def render_text(self) -> str:
        lines = []
        width = max((len(n) for n in self.checks), default=10)
        for name in sorted(self.checks):
            c = self.checks[name]
            res = "-" if c.residual is None else f"{c.residual:.3e}"
            thr = "-" if c.threshold is None else f"{c.threshold:.1e}"
            tail = f"  ({c.note})" if c.note else ""
            lines.append(f"{name:<{width}}  {c.verdict.upper():<12} {res:>10} <= {thr}{tail}")
        for name, msg in sorted(self.errors.items()):
            lines.append(f"ERROR {name}: {msg}")
        lines.append(f"overall: {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(lines)
