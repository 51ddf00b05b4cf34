"""Proof reports and their JSON and text forms."""

from __future__ import annotations

from dataclasses import dataclass, field

PROVED = "PROVED"
FAILED = "FAILED"
ASSUMPTION_GATED = "ASSUMPTION_GATED"

SCHEMA_VERSION = 1


@dataclass
class ZeroTest:
    name: str
    passed: bool
    detail: str = ""

    def to_dict(self) -> dict:
        out = {"name": self.name, "passed": self.passed}
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class ProofReport:
    id: str
    strategy: str
    title: str = ""
    operators: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    initials_required: int = 0
    initials_checked: int = 0
    zero_tests: list = field(default_factory=list)
    assumptions: list = field(default_factory=list)
    annotations: list = field(default_factory=list)
    witness: str | None = None
    verdict: str = ""

    def fail(self, witness: str):
        if self.witness is None:
            self.witness = witness

    def check(self, name: str, passed: bool, detail: str = "", witness: str | None = None) -> bool:
        self.zero_tests.append(ZeroTest(name, bool(passed), detail))
        if not passed:
            self.fail(witness or (f"{name}: {detail}" if detail else name))
        return bool(passed)

    def finish(self) -> "ProofReport":
        if self.witness is not None or any(not t.passed for t in self.zero_tests) or not self.zero_tests:
            self.verdict = FAILED
            if self.witness is None:
                self.witness = "no checks were run"
        elif self.assumptions:
            self.verdict = ASSUMPTION_GATED
        else:
            self.verdict = PROVED
        return self

    @property
    def ok(self) -> bool:
        return self.verdict in (PROVED, ASSUMPTION_GATED)

    def to_dict(self) -> dict:
        out = {
            "id": self.id,
            "title": self.title,
            "strategy": self.strategy,
            "operators": list(self.operators),
            "certificates": list(self.certificates),
            "initials_required": self.initials_required,
            "initials_checked": self.initials_checked,
            "zero_tests": [t.to_dict() for t in self.zero_tests],
            "assumptions": list(self.assumptions),
            "annotations": list(self.annotations),
            "verdict": self.verdict,
        }
        if self.witness is not None:
            out["witness"] = self.witness
        return out

    def to_text(self, verbose: bool = False) -> str:
        head = f"{self.id}  {self.verdict}  [{self.strategy}]"
        if self.title:
            head += f"  {self.title}"
        lines = [head]
        if self.witness is not None:
            lines.append(f"  witness: {self.witness}")
        for a in self.assumptions:
            lines.append(f"  assumes: {a}")
        if verbose:
            for op in self.operators:
                lines.append(f"  operator  {op}")
            for c in self.certificates:
                lines.append(f"  certificate  {c}")
            lines.append(f"  initial values: {self.initials_checked} checked, {self.initials_required} required")
            for t in self.zero_tests:
                mark = "ok  " if t.passed else "FAIL"
                lines.append(f"  {mark} {t.name}" + (f"  ({t.detail})" if t.detail else ""))
            for a in self.annotations:
                lines.append(f"  note: {a}")
        return "\n".join(lines)


def document(reports: list, order: int) -> dict:
    return {
        "schema_version": SCHEMA_VERSION,
        "order": order,
        "reports": [r.to_dict() for r in reports],
    }
