"""
Exception hierarchy for the multi-scale KAM engine.
"""

from typing import Any, Dict, List, Optional, Sequence, Tuple


class KamEngineError(Exception):
    """Base class for all engine errors."""


# Series algebra

class SeriesError(KamEngineError):
    """Invalid series construction or operation."""


class DimensionMismatchError(SeriesError, ValueError):
    """Operands live in different phase dimensions."""

    def __init__(self, left: int, right: int):
        super().__init__(f"dimension mismatch: {left} != {right}")
        self.left = left
        self.right = right


class SeriesOverflowError(SeriesError, OverflowError):
    """A majorant term exceeded the floating-point range."""


class RealityError(SeriesError, ValueError):
    """Coefficients flagged real violate conjugate symmetry."""


class SeriesFormatError(SeriesError, ValueError):
    """Malformed line in the text serialization."""

    def __init__(self, line_number: int, message: str):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


# Model

class ModelError(KamEngineError, ValueError):
    """Invalid Hamiltonian data or scale set."""


class DomainError(ModelError):
    """Base point too close to the boundary of the action domain."""


# Conditions

class ConditionError(KamEngineError, ValueError):
    """Invalid input to a non-degeneracy check."""


# KAM step

class StepError(KamEngineError):
    """A KAM step could not be carried out."""

    kind = "step"

    def details(self) -> Dict[str, Any]:
        return {}


class GateFailure(StepError):
    """One or more step gates failed."""

    kind = "gate"

    def __init__(self, failed: Sequence[str], margins: Dict[str, float], nu: Optional[int] = None):
        where = f" at step {nu}" if nu is not None else ""
        super().__init__(f"gate(s) {', '.join(failed)} failed{where}")
        self.failed = list(failed)
        self.margins = dict(margins)
        self.nu = nu

    def details(self) -> Dict[str, Any]:
        return {"failed": self.failed, "margins": self.margins}


class DivisorFailure(StepError):
    """Small divisors fell below the screening threshold."""

    kind = "divisor"

    def __init__(self, modes: List[Tuple[int, ...]], nu: Optional[int] = None):
        shown = ", ".join(str(tuple(k)) for k in modes[:5])
        more = f" (+{len(modes) - 5} more)" if len(modes) > 5 else ""
        where = f" at step {nu}" if nu is not None else ""
        super().__init__(f"resonant mode(s) {shown}{more}{where}")
        self.modes = [tuple(k) for k in modes]
        self.nu = nu

    def details(self) -> Dict[str, Any]:
        return {"modes": [list(k) for k in self.modes]}


class CorrectionFailure(StepError):
    """Frequency or iso-energetic correction failed."""

    kind = "correction"

    def __init__(self, message: str, info: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.info = dict(info or {})

    def details(self) -> Dict[str, Any]:
        return dict(self.info)


# Schedule and measure

class ScheduleError(KamEngineError, ValueError):
    """Schedule parameters violate their constraints."""

    def __init__(self, messages: Sequence[str]):
        super().__init__("; ".join(messages))
        self.messages = list(messages)


class MeasureError(KamEngineError, ValueError):
    """Invalid resonance query or fit."""


class EmptyResonanceSetError(MeasureError):
    """A resonance estimate was zero, so its logarithm is undefined."""

    def __init__(self, gamma: float):
        super().__init__(f"resonance set is empty at gamma={gamma!r}")
        self.gamma = gamma


# Configuration

class ConfigError(KamEngineError):
    """Configuration could not be parsed or validated."""

    def __init__(self, errors: Sequence[str]):
        super().__init__("\n".join(errors))
        self.errors = list(errors)


# Pipeline

class RunError(KamEngineError):
    """A run phase failed outside the recorded step halts."""

    def __init__(self, phase: str, cause: Exception, nu: Optional[int] = None):
        where = f" at step {nu}" if nu is not None else ""
        super().__init__(f"{phase} phase failed{where}: {cause}")
        self.phase = phase
        self.nu = nu
        self.cause = cause
