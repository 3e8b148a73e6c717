"""Three-valued inequality reports."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional

K_DEFAULT = 3.0
ABS_SLACK = 1e-12

HOLDS, VIOLATED, INCONCLUSIVE = "holds", "violated", "inconclusive"


def verdict_for(margin, uncertainty, k=K_DEFAULT):
    """``inconclusive`` iff |margin| <= k * uncertainty, else the sign of the margin decides."""
    if not math.isfinite(margin):
        return HOLDS if margin > 0 else VIOLATED
    if abs(margin) <= k * uncertainty + ABS_SLACK * max(1.0, abs(margin)):
        return INCONCLUSIVE
    return HOLDS if margin > 0 else VIOLATED


@dataclass
class InequalityReport:
    """Outcome of a statistical inequality check.

    ``margin`` is oriented so that a positive value means the inequality
    holds.  An inconclusive verdict means the margin is within ``k``
    uncertainties of zero, which is how an equality case shows up; the
    ``equality`` flag records that reading.
    """

    name: str
    lhs: float
    rhs: float
    margin: float
    uncertainty: float
    verdict: str = ""
    k: float = K_DEFAULT
    clauses: List["InequalityReport"] = field(default_factory=list)
    details: dict = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def __post_init__(self):
        self.lhs = float(self.lhs)
        self.rhs = float(self.rhs)
        self.margin = float(self.margin)
        self.uncertainty = float(self.uncertainty)
        if not self.verdict:
            self.verdict = verdict_for(self.margin, self.uncertainty, self.k)

    @property
    def equality(self):
        return self.verdict == INCONCLUSIVE

    @property
    def holds_or_equal(self):
        return self.verdict in (HOLDS, INCONCLUSIVE)

    def to_dict(self):
        out = {
            "name": self.name,
            "lhs": _num(self.lhs),
            "rhs": _num(self.rhs),
            "margin": _num(self.margin),
            "uncertainty": _num(self.uncertainty),
            "verdict": self.verdict,
            "equality": self.equality,
            "k": self.k,
        }
        if self.clauses:
            out["clauses"] = [c.to_dict() for c in self.clauses]
        if self.details:
            out["details"] = {key: _jsonable(v) for key, v in self.details.items()}
        if self.notes:
            out["notes"] = list(self.notes)
        return out


def conjunction(name, clauses, k=K_DEFAULT, details=None, notes=None) -> InequalityReport:
    """A report that holds when every clause holds; its margin is the smallest clause margin."""
    verdicts = [c.verdict for c in clauses]
    if VIOLATED in verdicts:
        verdict = VIOLATED
    elif all(v == HOLDS for v in verdicts):
        verdict = HOLDS
    else:
        verdict = INCONCLUSIVE
    worst = min(clauses, key=lambda c: c.margin / c.uncertainty if c.uncertainty > 0 else math.copysign(math.inf, c.margin) if c.margin else 0.0)
    return InequalityReport(
        name,
        worst.lhs,
        worst.rhs,
        worst.margin,
        worst.uncertainty,
        verdict=verdict,
        k=k,
        clauses=list(clauses),
        details=details or {},
        notes=notes or [],
    )


def _num(x):
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def _jsonable(v):
    if isinstance(v, InequalityReport):
        return v.to_dict()
    if isinstance(v, dict):
        return {str(k): _jsonable(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    if hasattr(v, "tolist"):
        return _jsonable(v.tolist())
    if isinstance(v, float):
        return _num(v)
    if isinstance(v, (int, str, bool)) or v is None:
        return v
    return str(v)


def exit_code(report: Optional[InequalityReport]) -> int:
    """0 holds, 2 violated, 3 inconclusive."""
    if report is None:
        return 0
    return {HOLDS: 0, VIOLATED: 2, INCONCLUSIVE: 3}[report.verdict]
