"""Uniform pass/fail records for every inequality and identity check.

All the verifiers in this package answer the same kind of question:
for each subset S (and possibly a server index i), does a computed
left-hand side relate to a right-hand side within slack? A CheckRecord
captures one such comparison; a CheckReport is a named bundle of them
with the aggregate verdict.

Slack convention, used everywhere: a defect passes when

    defect <= slack * (1 + max(|lhs|, |rhs|))

i.e. an absolute-plus-relative mix, so checks stay meaningful both for
order-one quantities and for the large table entries that appear at
strong weight separation.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field


def tol(slack: float, lhs: float, rhs: float) -> float:
    return slack * (1.0 + max(abs(lhs), abs(rhs)))


def as_float(x) -> float:
    """float(x), saturating to +-inf when x is an int too large to represent."""
    try:
        return float(x)
    except OverflowError:
        return math.inf if x > 0 else -math.inf


@dataclass(frozen=True)
class CheckRecord:
    check: str      # short name of the identity or inequality
    subset: int     # bitmask of S, or -1 when the check has no subset
    index: int      # server index i, or 0 when the check has none
    lhs: float
    rhs: float
    defect: float   # how far the claim is from holding; <= 0 counts as holding
    passed: bool

    def to_dict(self) -> dict:
        return {
            "check": self.check,
            "S": self.subset,
            "i": self.index,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "defect": self.defect,
            "pass": self.passed,
        }


@dataclass
class CheckReport:
    name: str
    records: list[CheckRecord] = field(default_factory=list)

    def add(self, check: str, subset: int, index: int, lhs, rhs, defect,
            passed: bool) -> None:
        self.records.append(CheckRecord(
            check, subset, index, as_float(lhs), as_float(rhs),
            as_float(defect), bool(passed)))

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.records)

    @property
    def max_defect(self) -> float:
        return max((r.defect for r in self.records), default=0.0)

    @property
    def failures(self) -> list[CheckRecord]:
        return [r for r in self.records if not r.passed]

    def to_json(self, indent: int | None = None) -> str:
        return json.dumps([r.to_dict() for r in self.records], indent=indent)

    def summary(self) -> str:
        verdict = "pass" if self.passed else f"FAIL ({len(self.failures)} records)"
        return (f"{self.name}: {verdict}, {len(self.records)} checks, "
                f"max defect {self.max_defect:.3e}")
