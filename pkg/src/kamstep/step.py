"""
One KAM step: compose H = N + P with the time-one map of F, absorb [R] into the
normal form and measure the new perturbation on the shrunk window.
"""

from dataclasses import dataclass, field
from math import factorial
from typing import Any, Dict, List, Optional, Tuple, Union

import structlog

from ..errors import GateFailure
from ..model import NormalForm
from ..series import (
    FourierTaylorSeries,
    TimeOneMap,
    average,
    degree_part,
    lie_series,
    linear_combination,
    majorant_norm,
    truncate,
)
from .divisors import DivisorScreen
from .gates import GateReport, gate_check
from .homological import GeneratingFunction
from .params import StepParams

logger = structlog.get_logger(__name__)


@dataclass
class KamStepReport:
    """Diagnostics of a single step, serialized into the run report."""
    nu: Optional[int]
    gates: GateReport
    divisor_min: float
    resonant: List[Tuple[int, ...]]
    f_norm: float
    transform_bounds: Dict[str, Dict[str, Any]]
    old_error: float
    new_error: float
    contraction_ratio: float
    lie_remainder: float
    energy_change: float
    epsilon: Optional[float] = None
    truncated_norm: float = 0.0
    shift: Optional[List[float]] = None
    shift_t: Optional[float] = None
    correction: Dict[str, Any] = field(default_factory=dict)
    accepted: Optional[bool] = None
    target_error: Optional[float] = None

    @property
    def bounds_hold(self) -> bool:
        return all(entry["ok"] for entry in self.transform_bounds.values())

    def to_dict(self) -> Dict[str, Any]:
        return {
            "nu": self.nu,
            "gates": self.gates.to_dict(),
            "divisor_min": self.divisor_min,
            "resonant": [list(k) for k in self.resonant],
            "f_norm": self.f_norm,
            "transform_bounds": self.transform_bounds,
            "old_error": self.old_error,
            "new_error": self.new_error,
            "contraction_ratio": self.contraction_ratio,
            "lie_remainder": self.lie_remainder,
            "energy_change": self.energy_change,
            "epsilon": self.epsilon,
            "truncated_norm": self.truncated_norm,
            "shift": self.shift,
            "t": self.shift_t,
            "correction": self.correction,
            "accepted": self.accepted,
            "target_error": self.target_error,
        }


def transform_bounds(tmap: TimeOneMap, p: StepParams, epsilon: float, n: int) -> Dict[str, Dict[str, Any]]:
    """Measured near-identity deviations of the time-one map next to their closed-form bounds.

    epsilon is the relative error size (perturbation majorant over eps_min).
    """
    r, s, sigma, eta = p.r, p.s, p.sigma, p.eta
    gamma, tau = p.gamma, p.tau
    half = r / 2.0
    u_id, v_id = tmap.displacement_norms(half, s - 3.0 * sigma)
    table = {
        "U-id": (u_id, epsilon / (gamma * sigma ** (n + 1)), half, s - 3.0 * sigma),
        "V-id": (v_id, epsilon / (gamma * r * sigma ** tau), half, s - 3.0 * sigma),
        "U_I-I": (tmap.derivative_norm("U", "I", eta * r, s - 3.0 * sigma),
                  epsilon / (gamma * r * sigma ** (tau + 1)), eta * r, s - 3.0 * sigma),
        "V_theta-I": (tmap.derivative_norm("V", "theta", half, s - 4.0 * sigma),
                      epsilon / (gamma * r * sigma ** (tau + 1)), half, s - 4.0 * sigma),
        "U_theta": (tmap.derivative_norm("U", "theta", half, s - 4.0 * sigma),
                    epsilon / (gamma * sigma ** (tau + 2)), half, s - 4.0 * sigma),
        "V_I": (tmap.derivative_norm("V", "I", eta * r, s - 3.0 * sigma),
                epsilon / (gamma * r ** 2 * sigma ** (tau + 1)), eta * r, s - 3.0 * sigma),
    }
    return {
        name: {"value": value, "bound": bound, "r": wr, "s": ws, "ok": bool(value <= bound)}
        for name, (value, bound, wr, ws) in table.items()
    }


def apply_step(nf: NormalForm, pert: FourierTaylorSeries, F: Union[GeneratingFunction, FourierTaylorSeries],
               p: StepParams, *, nu: Optional[int] = None, epsilon: Optional[float] = None,
               gates: Optional[GateReport] = None,
               screen: Optional[DivisorScreen] = None) -> Tuple[NormalForm, FourierTaylorSeries, KamStepReport]:
    """Carry out the step with a solved generating function F.

    Returns (nf_plus, pert_plus, report). epsilon defaults to the measured
    error majorant(P, r, s) / eps_min. Raises GateFailure when any gate fails.
    """
    n = nf.n
    p.check_dimension(n)
    f_series = F.series if isinstance(F, GeneratingFunction) else F
    old_error = majorant_norm(pert, p.r, p.s)
    if epsilon is None:
        epsilon = old_error / p.scales.eps_min
    _, r_series = truncate(pert, p.K, p.m_taylor)
    if gates is None:
        gates = gate_check(p, n, epsilon, fourier_order=r_series.max_order())
    if not gates.passed:
        raise GateFailure(gates.failed, gates.margins, nu)

    cut = p.degree_cutoff
    r_avg = average(r_series)
    exact_pert = pert.with_options(floor=0.0)
    kept = degree_part(exact_pert, 0, cut)
    truncated_norm = majorant_norm(degree_part(exact_pert, cut + 1), p.r, p.s)

    h_total = linear_combination([(1.0, nf.as_series()), (1.0, kept)]).with_options(floor=0.0, taylor_cutoff=cut)
    f_exact = f_series.with_options(floor=0.0)
    lie = lie_series(h_total, f_exact, p.lie_order)
    terms = [(1.0, kept.with_options(taylor_cutoff=cut)), (-1.0, r_avg.with_options(floor=0.0))]
    terms += [(1.0 / factorial(l), lie.terms[l]) for l in range(1, p.lie_order + 1)]
    pert_plus = linear_combination(terms).with_options(floor=pert.floor, taylor_cutoff=None)

    nf_plus = nf.absorb(r_avg)

    new_r, new_s = p.eta * p.r, p.s - 5.0 * p.sigma
    new_error = majorant_norm(pert_plus, new_r, new_s)
    ratio = new_error / old_error if old_error > 0 else 0.0
    tmap = TimeOneMap(f_exact, p.lie_order)
    bounds = transform_bounds(tmap, p, epsilon, n)
    zero = (0,) * n
    report = KamStepReport(
        nu=nu,
        gates=gates,
        divisor_min=screen.divisor_min if screen is not None else (
            F.divisor_min if isinstance(F, GeneratingFunction) else float("inf")),
        resonant=list(screen.resonant) if screen is not None else [],
        f_norm=majorant_norm(f_series, p.r, p.s - 2.0 * p.sigma),
        transform_bounds=bounds,
        old_error=old_error,
        new_error=new_error,
        contraction_ratio=ratio,
        lie_remainder=lie.remainder_norm(new_r, new_s),
        energy_change=r_avg.coefficient(zero, zero).real,
        epsilon=epsilon,
        truncated_norm=truncated_norm,
    )
    logger.info("kam_step_applied", nu=nu, old_error=old_error, new_error=new_error,
                contraction_ratio=ratio, bounds_hold=report.bounds_hold)
    return nf_plus, pert_plus, report


def error_target(p_next: StepParams) -> float:
    """eps_min gamma r^2 eta^m sigma^{tau+1} on the next window."""
    return (p_next.scales.eps_min * p_next.gamma * p_next.r ** 2 * p_next.eta ** p_next.m_taylor
            * p_next.sigma ** (p_next.tau + 1))


def error_update(report: KamStepReport, p: StepParams, p_next: StepParams) -> bool:
    """Accept the step when the error contracted by eta^m (with slack) and meets the next target."""
    contracted = report.new_error <= report.old_error * p.eta ** p.m_taylor * (1.0 + p.slack)
    target = error_target(p_next)
    report.target_error = target
    accepted = bool(contracted and report.new_error <= target)
    logger.debug("error_updated", nu=report.nu, contracted=contracted, target=target, accepted=accepted)
    return accepted
