"""Check reports with deterministic text and JSON renderings."""

from __future__ import annotations

import json
from dataclasses import dataclass, field


@dataclass
class Case:
    id: str
    passed: bool
    witness: str | None = None
    inconclusive: bool = False


@dataclass
class Report:
    suite: str
    params: object = None
    cases: list = field(default_factory=list)
    notes: list = field(default_factory=list)  # free text lines, rendered in both formats
    extra: dict = field(default_factory=dict)  # additional top-level JSON keys

    def add(self, case_id: str, passed: bool, witness: str | None = None, inconclusive: bool = False):
        self.cases.append(Case(case_id, bool(passed), None if passed else witness, inconclusive))
        return self

    def extend(self, other: "Report", prefix: str | None = None):
        for c in other.cases:
            cid = f"{prefix}/{c.id}" if prefix else c.id
            self.cases.append(Case(cid, c.passed, c.witness, c.inconclusive))
        return self

    @property
    def passed(self) -> int:
        return sum(1 for c in self.cases if c.passed and not c.inconclusive)

    @property
    def failed(self) -> int:
        return sum(1 for c in self.cases if not c.passed and not c.inconclusive)

    @property
    def inconclusive(self) -> int:
        return sum(1 for c in self.cases if c.inconclusive)

    @property
    def ok(self) -> bool:
        return self.failed == 0

    def failures(self) -> list:
        return [c for c in self.cases if not c.passed and not c.inconclusive]

    def as_dict(self) -> dict:
        params = self.params.as_json() if hasattr(self.params, "as_json") else self.params
        out = {
            "suite": self.suite,
            "params": params,
            "cases": [
                {"id": c.id, "pass": c.passed, "witness": c.witness}
                for c in self.cases
            ],
            "passed": self.passed,
            "failed": self.failed,
            "inconclusive": self.inconclusive,
        }
        if self.notes:
            out["notes"] = list(self.notes)
        out.update(self.extra)
        return out

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=False) + "\n"

    def to_text(self, verbose: bool = False) -> str:
        lines = [f"suite: {self.suite}"]
        if self.params is not None and hasattr(self.params, "as_json"):
            p = self.params.as_json()
            lines.append(
                f"params: n={p['n']} r={p['r']} gamma2={p['gamma2']} lambda={','.join(p['lambda'])}"
            )
        lines.extend(self.notes)
        for c in self.cases:
            if c.inconclusive:
                lines.append(f"INCONCLUSIVE {c.id}")
            elif not c.passed:
                lines.append(f"FAIL {c.id}" + (f"  witness: {c.witness}" if c.witness else ""))
            elif verbose:
                lines.append(f"ok   {c.id}")
        lines.append(
            f"passed: {self.passed}  failed: {self.failed}  inconclusive: {self.inconclusive}"
        )
        return "\n".join(lines) + "\n"

    def __str__(self):
        return self.to_text()
