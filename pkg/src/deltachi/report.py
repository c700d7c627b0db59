"""Structured check results shared by the verification suites.

Provides:
- CheckStatus / CheckEntry: one identity or inequality check with its
  two sides, tolerance, and witness data.
- VerifyReport: a named suite of entries; fails iff any non-REPORT-ONLY
  entry fails.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from typing import Dict, List, Union


class CheckStatus(enum.Enum):
    PASS = "PASS"
    FAIL = "FAIL"
    REPORT_ONLY = "REPORT-ONLY"


@dataclass(frozen=True)
class CheckEntry:
    """Outcome of a single check.

    Attributes:
        check_id: stable identifier including the parameters checked.
        status: PASS, FAIL, or REPORT-ONLY (informational, never fatal).
        lhs: left side of the inequality or identity.
        rhs: right side (or reference value).
        tolerance: slack used in the comparison.
        witness: free-form context (witness run, parameters, notes).
    """

    check_id: str
    status: CheckStatus
    lhs: float
    rhs: float
    tolerance: float
    witness: Union[str, Dict] = ""

    def to_dict(self) -> Dict:
        return {
            "checkId": self.check_id,
            "status": self.status.value,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "tolerance": self.tolerance,
            "witness": self.witness,
        }


def pass_fail(
    check_id: str,
    lhs: float,
    rhs: float,
    tolerance: float,
    witness: Union[str, Dict] = "",
    report_only: bool = False,
) -> CheckEntry:
    """Entry asserting lhs <= rhs + tolerance (or recording it only)."""
    ok = lhs <= rhs + tolerance
    status = (
        CheckStatus.REPORT_ONLY
        if report_only
        else (CheckStatus.PASS if ok else CheckStatus.FAIL)
    )
    return CheckEntry(check_id, status, float(lhs), float(rhs), tolerance, witness)


@dataclass
class VerifyReport:
    """A named collection of check entries."""

    suite: str
    entries: List[CheckEntry] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(
            e.status is not CheckStatus.FAIL for e in self.entries
        )

    @property
    def n_failed(self) -> int:
        return sum(1 for e in self.entries if e.status is CheckStatus.FAIL)

    def extend(self, entries: List[CheckEntry]) -> None:
        self.entries.extend(entries)

    def to_dict(self) -> Dict:
        return {
            "suite": self.suite,
            "passed": self.passed,
            "entries": [e.to_dict() for e in self.entries],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent)
