"""
Check Report - itemized result of a verifier
"""

import math
from dataclasses import dataclass, field
from typing import Any, Dict, List


@dataclass
class CheckReport:
    """Named boolean checks with their worst defects and free-form details"""
    name: str
    checks: Dict[str, bool] = field(default_factory=dict)
    max_defects: Dict[str, float] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)

    def record(self, check: str, defect: float, limit: float) -> bool:
        """Record a defect against its limit; NaN always fails"""
        defect = float(defect)
        passed = defect <= limit
        self.checks[check] = self.checks.get(check, True) and passed
        previous = self.max_defects.get(check, 0.0)
        self.max_defects[check] = defect if math.isnan(defect) else max(previous, defect)
        return passed

    def flag(self, check: str, passed: bool):
        """Record a pass/fail check without a numeric defect"""
        self.checks[check] = self.checks.get(check, True) and bool(passed)

    def merge(self, other: "CheckReport", prefix: str = ""):
        """Fold another report's checks into this one"""
        for key, value in other.checks.items():
            self.flag(prefix + key, value)
        for key, value in other.max_defects.items():
            self.max_defects[prefix + key] = max(self.max_defects.get(prefix + key, 0.0), value)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def failures(self) -> List[str]:
        """Names of failed checks"""
        return [key for key, value in self.checks.items() if not value]

    def to_dict(self) -> Dict[str, Any]:
        return {
            'name': self.name,
            'passed': self.passed,
            'checks': dict(self.checks),
            'max_defects': dict(self.max_defects),
            'details': dict(self.details),
        }
