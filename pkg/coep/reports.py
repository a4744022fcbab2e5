import math
from dataclasses import dataclass, field
from typing import Any, Dict, List

import numpy as np


def json_ready(value: Any) -> Any:
    """Convert numpy scalars and non-finite floats into JSON-safe values."""
    if isinstance(value, dict):
        return {str(k): json_ready(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [json_ready(v) for v in value]
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.floating, float)):
        number = float(value)
        if math.isnan(number):
            return None
        if math.isinf(number):
            return "inf" if number > 0 else "-inf"
        return number
    if isinstance(value, (np.complexfloating, complex)):
        return [json_ready(value.real), json_ready(value.imag)]
    return value


@dataclass(frozen=True)
class Statement:
    label: str
    value: bool
    margin: float = float("nan")
    applicable: bool = True
    note: str = ""

    def to_dict(self) -> Dict[str, Any]:
        data = {"label": self.label, "value": self.value, "margin": self.margin, "applicable": self.applicable}
        if self.note:
            data["note"] = self.note
        return data


@dataclass
class EquivalenceAudit:
    """A list of statements that a theorem declares equivalent."""

    name: str
    statements: List[Statement]
    notes: List[str] = field(default_factory=list)

    @property
    def all_agree(self) -> bool:
        return len({s.value for s in self.statements}) <= 1

    @property
    def common_value(self):
        return self.statements[0].value if self.all_agree and self.statements else None

    def values(self) -> Dict[str, bool]:
        return {s.label: s.value for s in self.statements}

    def to_dict(self) -> Dict[str, Any]:
        return json_ready(
            {
                "name": self.name,
                "all_agree": self.all_agree,
                "value": self.common_value,
                "statements": [s.to_dict() for s in self.statements],
                "notes": self.notes,
            }
        )


@dataclass
class CheckReport:
    """Independent checks that should each pass; inapplicable ones are skipped."""

    name: str
    statements: List[Statement]
    notes: List[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(s.value for s in self.statements if s.applicable)

    def get(self, label: str) -> Statement:
        for statement in self.statements:
            if statement.label == label:
                return statement
        raise KeyError(label)

    def to_dict(self) -> Dict[str, Any]:
        return json_ready(
            {
                "name": self.name,
                "passed": self.passed,
                "statements": [s.to_dict() for s in self.statements],
                "notes": self.notes,
            }
        )
