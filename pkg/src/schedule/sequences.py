"""
Iteration sequences for repeated KAM steps.

    r_v = r_{v-1} eta_{v-1}          h_v = h_{v-1} eta_{v-1}
    eta_v = eta_{v-1}^{(2m-2)/m}     s_v = s_{v-1} / 4,  sigma_v = 0.15 s_v
    K_v = (floor(log(1/eta_v^m)) + 1)^a
    gamma_v = gamma_0 (1 - 2^{-v-1})

Radii and eta underflow quickly, so every sequence is also kept in log form.
"""

from dataclasses import dataclass, field
from math import exp, floor, log
from typing import Any, Dict, List, Optional

import numpy as np
import structlog

from ..errors import ScheduleError
from ..kamstep import StepParams, gate_check
from ..model import ScaleSet
from ..series import DomainWindow

logger = structlog.get_logger(__name__)

SIGMA_FRACTION = 0.15
STRIP_FACTOR = 0.25
ETA_CAP = 0.125


def min_exponent(m: int) -> float:
    """Smallest admissible a: log 4 / log(2 - 2/m)."""
    return log(4.0) / log(2.0 - 2.0 / m)


@dataclass(frozen=True)
class InitialParams:
    """Starting data for the schedule.

    n is needed for gates (a), (b); the remaining gates are checked at v = 0
    only when scales and epsilon_ratio are supplied.
    """
    n: int
    r0: float
    s0: float
    eta0: float
    h0: float
    gamma0: float
    tau: float
    scales: Optional[ScaleSet] = None
    epsilon_ratio: Optional[float] = None
    fourier_order: Optional[float] = None
    theta_gate: float = 0.1


@dataclass
class StepSchedule:
    m: int
    a: float
    nu_max: int
    init: InitialParams
    log_r: np.ndarray
    log_h: np.ndarray
    log_eta: np.ndarray
    s: np.ndarray
    sigma: np.ndarray
    K: np.ndarray
    gamma: np.ndarray
    log_target_ratio: np.ndarray
    notes: List[str] = field(default_factory=list)

    @property
    def r(self) -> np.ndarray:
        return np.exp(self.log_r)

    @property
    def h(self) -> np.ndarray:
        return np.exp(self.log_h)

    @property
    def eta(self) -> np.ndarray:
        return np.exp(self.log_eta)

    @property
    def target_ratio(self) -> np.ndarray:
        """gamma_v r_v^2 eta_v^m sigma_v^{tau+1}, the relative error allowed at v."""
        return np.exp(self.log_target_ratio)

    def target(self, eps_min: float) -> np.ndarray:
        return eps_min * self.target_ratio

    def __len__(self) -> int:
        return self.nu_max + 1

    def window(self, nu: int) -> DomainWindow:
        return DomainWindow(r=exp(self.log_r[nu]), s=float(self.s[nu]), h=exp(self.log_h[nu]))

    def step_params(self, nu: int, scales: ScaleSet, m_taylor: Optional[int] = None, **options) -> StepParams:
        """StepParams for index nu; options go to StepParams (theta_gate, lie_order, slack, work_degree)."""
        if not 0 <= nu <= self.nu_max:
            raise IndexError(f"schedule has indices 0..{self.nu_max}, got {nu}")
        options.setdefault("theta_gate", self.init.theta_gate)
        return StepParams(
            window=self.window(nu),
            sigma=float(self.sigma[nu]),
            eta=exp(self.log_eta[nu]),
            K=float(self.K[nu]),
            gamma=float(self.gamma[nu]),
            tau=self.init.tau,
            m_taylor=self.m if m_taylor is None else m_taylor,
            scales=scales,
            **options,
        )

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "nu": nu,
                "r": exp(self.log_r[nu]),
                "s": float(self.s[nu]),
                "sigma": float(self.sigma[nu]),
                "eta": exp(self.log_eta[nu]),
                "h": exp(self.log_h[nu]),
                "K": float(self.K[nu]),
                "gamma": float(self.gamma[nu]),
                "target_ratio": exp(self.log_target_ratio[nu]),
            }
            for nu in range(self.nu_max + 1)
        ]


def closed_form_log_r(init: InitialParams, m: int, nu: int) -> float:
    """log r_v from r_v = r_0 eta_0^{(m^v - (2m-2)^v) / (m^{v-1} (2 - m))}."""
    if nu == 0:
        return log(init.r0)
    ratio = (2.0 * m - 2.0) / m
    exponent = m * (1.0 - ratio ** nu) / (2.0 - m)
    return log(init.r0) + exponent * log(init.eta0)


def validate_schedule(init: InitialParams, m: int, a: float, nu_max: int) -> List[str]:
    messages = []
    if not m > 2:
        messages.append(f"m_taylor must be > 2, got {m}")
    elif not a > min_exponent(m):
        messages.append(f"a must be > log 4 / log(2 - 2/m) = {min_exponent(m):.6g} for m = {m}, got {a!r}")
    if not 0.0 < init.eta0 < ETA_CAP:
        messages.append(f"eta0 must be < 1/8 and > 0, got {init.eta0!r}")
    for name in ("r0", "s0", "h0", "gamma0"):
        value = getattr(init, name)
        if not value > 0:
            messages.append(f"{name} must be > 0, got {value!r}")
    if init.tau < init.n - 1:
        messages.append(f"tau must be >= n - 1 = {init.n - 1}, got {init.tau!r}")
    if nu_max < 0:
        messages.append(f"nu_max must be >= 0, got {nu_max}")
    return messages


def make_schedule(init: InitialParams, m: int, a: float, nu_max: int) -> StepSchedule:
    """Build the sequences for v = 0..nu_max and check the gates at v = 0.

    Raises ScheduleError naming every violated constraint or failing gate.
    """
    messages = validate_schedule(init, m, a, nu_max)
    if messages:
        raise ScheduleError(messages)

    count = nu_max + 1
    growth = (2.0 * m - 2.0) / m
    log_eta = np.empty(count)
    log_r = np.empty(count)
    log_h = np.empty(count)
    log_eta[0], log_r[0], log_h[0] = log(init.eta0), log(init.r0), log(init.h0)
    for nu in range(1, count):
        log_r[nu] = log_r[nu - 1] + log_eta[nu - 1]
        log_h[nu] = log_h[nu - 1] + log_eta[nu - 1]
        log_eta[nu] = log_eta[nu - 1] * growth
    s = init.s0 * STRIP_FACTOR ** np.arange(count, dtype=float)
    sigma = SIGMA_FRACTION * s
    K = np.array([(floor(-m * le) + 1.0) ** a for le in log_eta])
    gamma = init.gamma0 * (1.0 - 2.0 ** (-np.arange(count, dtype=float) - 1.0))
    log_target = np.log(gamma) + 2.0 * log_r + m * log_eta + (init.tau + 1.0) * np.log(sigma)

    schedule = StepSchedule(m=m, a=a, nu_max=nu_max, init=init, log_r=log_r, log_h=log_h, log_eta=log_eta,
                            s=s, sigma=sigma, K=K, gamma=gamma, log_target_ratio=log_target)
    failures = _initial_gate_failures(schedule)
    if failures:
        raise ScheduleError(failures)
    logger.info("schedule_built", m=m, a=a, nu_max=nu_max, K0=float(K[0]), eta0=init.eta0)
    return schedule


def _initial_gate_failures(schedule: StepSchedule) -> List[str]:
    init = schedule.init
    scales = init.scales if init.scales is not None else ScaleSet((1.0,))
    p = schedule.step_params(0, scales)
    report = gate_check(p, init.n, init.epsilon_ratio, fourier_order=init.fourier_order)
    checked = ("a", "b") if init.scales is None else tuple(report.results)
    return [
        f"gate ({name}) fails at step 0: lhs {report.results[name].lhs:.6g} vs rhs {report.results[name].rhs:.6g}"
        for name in checked
        if not report.results[name].passed
    ]
