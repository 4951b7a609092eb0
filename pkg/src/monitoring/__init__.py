# Run timing module
from .timing_tracker import PhaseTimer, StandardPhases, TimingPhase
