"""
Verdict evaluation for run reports.

Mandatory verdicts decide the exit status; informational ones are reported
alongside but never change it.
"""

from dataclasses import dataclass, field
from typing import Any, Dict

import structlog

logger = structlog.get_logger(__name__)

EXIT_PASS = 0
EXIT_VERDICT = 1
EXIT_CONFIG = 2
EXIT_INTERNAL = 3

IDENTITY_RTOL = 1e-10


@dataclass
class VerdictSummary:
    mandatory: Dict[str, bool] = field(default_factory=dict)
    informational: Dict[str, bool] = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.mandatory.values())

    @property
    def failed(self):
        return [name for name, ok in self.mandatory.items() if not ok]

    @property
    def exit_code(self) -> int:
        return exit_code(self.mandatory)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "mandatory": dict(self.mandatory),
            "informational": dict(self.informational),
            "passed": self.passed,
            "failed": self.failed,
        }


def exit_code(mandatory: Dict[str, bool]) -> int:
    """0 when every mandatory verdict holds, 1 otherwise."""
    return EXIT_PASS if all(mandatory.values()) else EXIT_VERDICT


def identity_holds(computed: float, expected: float, rtol: float = IDENTITY_RTOL) -> bool:
    if expected == 0:
        return computed == 0
    return abs(computed - expected) <= rtol * abs(expected)


def evaluate_verdicts(report: Dict[str, Any]) -> VerdictSummary:
    """Verdicts of a report document (the dict form of RunReport)."""
    summary = VerdictSummary()

    conditions = report.get("conditions") or {}
    for condition_id in report.get("required_conditions", []):
        entry = conditions.get(condition_id)
        summary.mandatory[f"condition_{condition_id}"] = bool(entry and entry["pass"])
    for condition_id, entry in conditions.items():
        if condition_id not in report.get("required_conditions", []):
            summary.informational[f"condition_{condition_id}"] = bool(entry["pass"])

    for name, entry in (report.get("identities") or {}).items():
        summary.mandatory[f"{name}_identity"] = bool(entry["pass"])

    if report.get("eigen") is not None:
        summary.informational["eigen_bound"] = bool(report["eigen"]["pass"])

    iteration = report.get("iteration")
    if iteration is not None:
        summary.mandatory["iteration_completed"] = iteration.get("halt") is None
        convergence = iteration.get("convergence")
        if convergence is not None:
            summary.informational["cauchy"] = bool(convergence["cauchy"])
    elif report.get("skipped", {}).get("iteration"):
        summary.mandatory["iteration_completed"] = False

    measure = report.get("measure")
    if measure is not None:
        if "error" in measure:
            summary.mandatory["measure_fit"] = False
        else:
            summary.mandatory["measure_fit"] = bool(measure["verdicts"].get("monotone", False))
            for name, ok in measure["verdicts"].items():
                if name != "monotone":
                    summary.informational[f"measure_{name}"] = bool(ok)

    logger.info("verdicts_evaluated", passed=summary.passed, failed=summary.failed)
    return summary
