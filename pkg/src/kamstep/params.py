"""
Parameters of a single KAM step.
"""

from dataclasses import dataclass
from typing import Optional

from ..model import ScaleSet
from ..series import DomainWindow


@dataclass(frozen=True)
class StepParams:
    """Window, strip loss, shrink factor, Fourier order and Diophantine data of one step."""
    window: DomainWindow
    sigma: float
    eta: float
    K: float
    gamma: float
    tau: float
    m_taylor: int
    scales: ScaleSet
    theta_gate: float = 0.1
    lie_order: int = 4
    slack: float = 0.5
    work_degree: Optional[int] = None

    def __post_init__(self):
        if not 0.0 < self.eta < 0.125:
            raise ValueError(f"eta must lie in (0, 1/8), got {self.eta!r}")
        if not 0.0 < 5.0 * self.sigma < self.window.s:
            raise ValueError(f"a step consumes 5*sigma of strip: need 0 < 5*{self.sigma!r} < s={self.window.s!r}")
        if self.K < 1:
            raise ValueError(f"Fourier order K must be >= 1, got {self.K!r}")
        if not self.gamma > 0:
            raise ValueError(f"gamma must be > 0, got {self.gamma!r}")
        if self.m_taylor < 3:
            raise ValueError(f"m_taylor must be >= 3, got {self.m_taylor}")
        if self.lie_order < 1:
            raise ValueError(f"lie_order must be >= 1, got {self.lie_order}")

    @property
    def r(self) -> float:
        return self.window.r

    @property
    def s(self) -> float:
        return self.window.s

    @property
    def h(self) -> float:
        return self.window.h

    @property
    def fourier_order(self) -> int:
        return int(self.K)

    @property
    def degree_cutoff(self) -> int:
        """Taylor degree kept in the new perturbation."""
        return self.work_degree if self.work_degree is not None else self.m_taylor + 2

    def check_dimension(self, n: int) -> None:
        if self.tau < n - 1:
            raise ValueError(f"tau must be >= n - 1 = {n - 1}, got {self.tau!r}")
