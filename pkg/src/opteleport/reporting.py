"""Named residual checks collected into reports; shared by the verifiers and the CLI."""

from __future__ import annotations

from dataclasses import dataclass, field


@dataclass
class Check:
    name: str
    residual: float
    passed: bool
    detail: str | None = None

    def as_dict(self) -> dict:
        out = {"name": self.name, "residual": float(self.residual), "passed": bool(self.passed)}
        if self.detail is not None:
            out["detail"] = self.detail
        return out


@dataclass
class Report:
    """Ordered list of checks with an aggregate pass flag."""

    checks: list[Check] = field(default_factory=list)

    def add(self, name: str, residual: float, threshold: float, detail: str | None = None) -> Check:
        check = Check(name, float(residual), bool(residual <= threshold), detail)
        self.checks.append(check)
        return check

    def add_flag(self, name: str, passed: bool, detail: str | None = None) -> Check:
        check = Check(name, 0.0 if passed else float("inf"), bool(passed), detail)
        self.checks.append(check)
        return check

    def merge(self, other: "Report", prefix: str = "") -> None:
        for check in other.checks:
            self.checks.append(
                Check(prefix + check.name, check.residual, check.passed, check.detail)
            )

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def max_residual(self) -> float:
        finite = [c.residual for c in self.checks if c.residual != float("inf")]
        return max(finite) if finite else 0.0

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        return {
            "checks": [c.as_dict() for c in self.checks],
            "passed": self.passed,
            "max_residual": float(self.max_residual),
        }
