"""Verification reports shared by the operator checkers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import List


@dataclass
class Check:
    name: str
    residual: float
    tol: float
    detail: str = ""

    @property
    def passed(self) -> bool:
        return self.residual <= self.tol


@dataclass
class VerificationReport:
    subject: str
    checks: List[Check] = field(default_factory=list)

    def add(self, name: str, residual: float, tol: float, detail: str = "") -> None:
        self.checks.append(Check(name, float(residual), float(tol), detail))

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self) -> float:
        return max((c.residual for c in self.checks), default=0.0)

    def failures(self) -> List[Check]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def format(self) -> str:
        width = max((len(c.name) for c in self.checks), default=4)
        lines = [f"{self.subject}:"]
        for c in self.checks:
            mark = "ok  " if c.passed else "FAIL"
            extra = f"  ({c.detail})" if c.detail else ""
            lines.append(f"  {mark} {c.name:<{width}}  residual {c.residual:.3e}  tol {c.tol:.1e}{extra}")
        return "\n".join(lines)

    def rows(self) -> List[tuple]:
        """Machine-readable (subject, check, residual, tol, passed) rows."""
        return [(self.subject, c.name, c.residual, c.tol, c.passed) for c in self.checks]
