"""
Step admissibility gates.

(a) sigma K > n - 1
(b) n! K^n e^{-K sigma} / sigma^{n+1} < eta^m     (bound for the tail integral)
(c) eps_max h K^{tau+1} <= theta * gamma * eps_min
(d) r K^{tau+1} <= theta * gamma * eps_min
(e) epsilon < gamma r^2 eta^m sigma^{tau+1}

Each gate reports lhs, rhs and margin = rhs / lhs (> 1 means room to spare).
"""

from dataclasses import dataclass, field
from math import exp, inf, lgamma, log
from typing import Any, Dict, List, Optional

import structlog

from .params import StepParams

logger = structlog.get_logger(__name__)

GATE_NAMES = ("a", "b", "c", "d", "e")


@dataclass(frozen=True)
class GateResult:
    name: str
    passed: bool
    lhs: float
    rhs: float

    @property
    def margin(self) -> float:
        if self.lhs == 0:
            return inf if self.rhs > 0 else 0.0
        return self.rhs / self.lhs


@dataclass
class GateReport:
    results: Dict[str, GateResult] = field(default_factory=dict)
    fourier_order: float = 0.0

    @property
    def passed(self) -> bool:
        return all(res.passed for res in self.results.values())

    @property
    def failed(self) -> List[str]:
        return [name for name, res in self.results.items() if not res.passed]

    @property
    def margins(self) -> Dict[str, float]:
        return {name: res.margin for name, res in self.results.items()}

    def to_dict(self) -> Dict[str, Any]:
        return {
            name: {"pass": res.passed, "lhs": res.lhs, "rhs": res.rhs, "margin": res.margin}
            for name, res in self.results.items()
        }


def log_tail_integral_bound(K: float, sigma: float, n: int) -> float:
    return lgamma(n + 1) + n * log(K) - K * sigma - (n + 1) * log(sigma)


def tail_integral_bound(K: float, sigma: float, n: int) -> float:
    """Closed-form bound n! K^n e^{-K sigma} / sigma^{n+1} for int_K^inf x^{n-1} e^{-x sigma} dx."""
    value = log_tail_integral_bound(K, sigma, n)
    return exp(value) if value < 709.0 else inf


def gate_check(p: StepParams, n: int, epsilon: Optional[float] = None,
               fourier_order: Optional[float] = None) -> GateReport:
    """Evaluate gates (a)-(e); gate (e) is skipped when epsilon is None.

    fourier_order, when given, replaces K in (c) and (d) by min(K, fourier_order).
    """
    K = p.K
    K_eff = K if fourier_order is None else min(K, max(float(fourier_order), 1.0))
    scales = p.scales
    budget = p.theta_gate * p.gamma * scales.eps_min
    results = {}

    results["a"] = GateResult("a", p.sigma * K > n - 1, float(n - 1), p.sigma * K)

    log_lhs = log_tail_integral_bound(K, p.sigma, n)
    log_rhs = p.m_taylor * log(p.eta)
    results["b"] = GateResult("b", log_lhs < log_rhs, exp(min(log_lhs, 709.0)), exp(log_rhs))

    c_lhs = scales.eps_max * p.h * K_eff ** (p.tau + 1)
    results["c"] = GateResult("c", c_lhs <= budget, c_lhs, budget)

    d_lhs = p.r * K_eff ** (p.tau + 1)
    results["d"] = GateResult("d", d_lhs <= budget, d_lhs, budget)

    if epsilon is not None:
        e_rhs = p.gamma * p.r ** 2 * p.eta ** p.m_taylor * p.sigma ** (p.tau + 1)
        results["e"] = GateResult("e", epsilon < e_rhs, float(epsilon), e_rhs)

    report = GateReport(results, fourier_order=K_eff)
    logger.debug("gates_evaluated", passed=report.passed, failed=report.failed, K=K, K_eff=K_eff)
    return report
