"""
Wall-clock timing of the phases of a run.

Timings go to runtime.json next to the report; the report body itself
stays free of them so that identical runs produce identical reports.
"""

import time
from contextlib import contextmanager
from dataclasses import dataclass
from datetime import datetime
from typing import Any, Dict, Iterator, List, Optional

import structlog

logger = structlog.get_logger(__name__)


@dataclass
class TimingPhase:
    """A named phase with its start and, once complete, its duration."""
    name: str
    start_time: datetime
    started: float
    duration_seconds: Optional[float] = None

    def complete(self) -> None:
        self.duration_seconds = time.perf_counter() - self.started


class StandardPhases:
    """Phase names used by the runner."""

    CONDITIONS = "conditions"
    ITERATION = "iteration"
    MEASURE = "measure"
    REPORT = "report"


class PhaseTimer:
    """Tracks consecutive phases; starting a phase completes the active one."""

    def __init__(self):
        self.current_phase: Optional[TimingPhase] = None
        self.completed_phases: List[TimingPhase] = []
        self.created = time.perf_counter()

    def start_phase(self, name: str) -> TimingPhase:
        if self.current_phase is not None:
            self.complete_current_phase()
        self.current_phase = TimingPhase(name=name, start_time=datetime.now(), started=time.perf_counter())
        logger.debug("phase_started", phase=name)
        return self.current_phase

    def complete_current_phase(self) -> Optional[TimingPhase]:
        if self.current_phase is None:
            return None
        phase = self.current_phase
        phase.complete()
        self.completed_phases.append(phase)
        self.current_phase = None
        logger.debug("phase_completed", phase=phase.name, seconds=phase.duration_seconds)
        return phase

    @contextmanager
    def phase(self, name: str) -> Iterator[TimingPhase]:
        current = self.start_phase(name)
        try:
            yield current
        finally:
            if self.current_phase is current:
                self.complete_current_phase()

    def durations(self) -> Dict[str, float]:
        totals: Dict[str, float] = {}
        for phase in self.completed_phases:
            totals[phase.name] = totals.get(phase.name, 0.0) + (phase.duration_seconds or 0.0)
        return totals

    def to_dict(self) -> Dict[str, Any]:
        total = time.perf_counter() - self.created
        durations = self.durations()
        return {
            "total_seconds": total,
            "phases": [
                {
                    "name": phase.name,
                    "start_time": phase.start_time.isoformat(),
                    "duration_seconds": phase.duration_seconds,
                }
                for phase in self.completed_phases
            ],
            "distribution": {name: round(100.0 * d / total, 2) if total > 0 else 0.0
                             for name, d in durations.items()},
        }
