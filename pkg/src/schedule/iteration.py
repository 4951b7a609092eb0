"""
Repeated KAM steps along a schedule.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import structlog

from ..conditions.checks import best_submatrix, bordered_matrix
from ..errors import DivisorFailure, GateFailure, SeriesOverflowError, StepError
from ..kamstep import (
    KamStepReport,
    StepParams,
    apply_step,
    error_update,
    frequency_correction,
    gate_check,
    isoenergetic_correction,
    screen_divisors,
    select_block,
    solve_homological,
)
from ..model import FrequencyField, HamiltonianSpec, NormalForm, expand_at, initial_perturbation
from ..series import FourierTaylorSeries, average, majorant_norm, translate, truncate
from .convergence import ConvergenceTrace, step_deviation
from .sequences import StepSchedule

logger = structlog.get_logger(__name__)

MODE_KINDS = ("full", "frequency_preserving", "isoenergetic")


@dataclass(frozen=True)
class RunMode:
    kind: str = "full"
    n1: Optional[int] = None

    def __post_init__(self):
        if self.kind not in MODE_KINDS:
            raise ValueError(f"mode must be one of {', '.join(MODE_KINDS)}, got {self.kind!r}")
        if self.n1 is not None and self.n1 < 1:
            raise ValueError(f"n1 must be >= 1, got {self.n1}")
        if self.kind == "full" and self.n1 is not None:
            raise ValueError("full mode takes no n1")

    @classmethod
    def parse(cls, text: str) -> "RunMode":
        """Parse "full", "frequency_preserving[:n1]" or "isoenergetic[:n1]"."""
        kind, _, count = text.strip().partition(":")
        if count:
            try:
                return cls(kind, int(count))
            except ValueError as exc:
                raise ValueError(f"invalid mode {text!r}: {exc}") from exc
        return cls(kind)

    def resolved_n1(self, n: int) -> int:
        return n if self.n1 is None else self.n1

    def __str__(self) -> str:
        return self.kind if self.n1 is None else f"{self.kind}:{self.n1}"


@dataclass(frozen=True)
class IterationSettings:
    theta_gate: float = 0.1
    lie_order: int = 4
    slack: float = 0.5
    error_floor: float = 0.0
    work_degree: Optional[int] = None
    correction_tol: float = 1e-14
    fixed_point_tol: float = 1e-12
    fixed_point_max_iter: int = 50

    def step_options(self) -> Dict[str, Any]:
        return {"theta_gate": self.theta_gate, "lie_order": self.lie_order, "slack": self.slack,
                "work_degree": self.work_degree}


@dataclass(frozen=True)
class HaltRecord:
    nu: int
    kind: str
    message: str
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"nu": self.nu, "kind": self.kind, "message": self.message, "details": self.details}


@dataclass
class IterationResult:
    nf: NormalForm
    initial_nf: NormalForm
    perturbation: FourierTaylorSeries
    trace: ConvergenceTrace
    reports: List[KamStepReport]
    mode: RunMode
    halt: Optional[HaltRecord] = None
    stop_reason: str = "nu_max"
    rows: Tuple[int, ...] = ()
    cols: Tuple[int, ...] = ()

    @property
    def completed(self) -> bool:
        return self.halt is None


def _mode_block(nf: NormalForm, mode: RunMode) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    if mode.kind == "full":
        return (), ()
    n1 = mode.resolved_n1(nf.n)
    if mode.kind == "frequency_preserving":
        return select_block(nf.A, n1)
    _, rows, cols, _ = best_submatrix(bordered_matrix(nf.A, nf.omega), n1, border=nf.n)
    return tuple(rows[:-1]), tuple(cols[:-1])


def _correct(mode: RunMode, nf: NormalForm, nf_plus: NormalForm, pert_plus: FourierTaylorSeries,
             r_avg: FourierTaylorSeries, report: KamStepReport, p: StepParams, settings: IterationSettings,
             rows, cols) -> Tuple[NormalForm, FourierTaylorSeries]:
    if mode.kind == "full":
        return nf_plus, pert_plus
    eps = nf.scales.eps_pert
    p01 = (nf_plus.omega - nf.omega) / eps
    n1 = mode.resolved_n1(nf.n)
    if mode.kind == "frequency_preserving":
        corr = frequency_correction(nf_plus, p01, n1, rows, cols, omega_reference=nf.omega, r=p.r,
                                    epsilon_ratio=report.epsilon, tol=settings.correction_tol)
        report.correction = corr.to_dict()
    else:
        corr = isoenergetic_correction(nf_plus, p01, r_avg, n1, tol=settings.fixed_point_tol,
                                       max_iter=settings.fixed_point_max_iter, rows=rows, cols=cols,
                                       energy_reference=nf, r=p.r)
        report.correction = corr.to_dict()
        report.shift_t = corr.t
    report.shift = corr.shift.tolist()
    if corr.shift.any():
        pert_plus = translate(pert_plus, corr.shift)
        report.new_error = majorant_norm(pert_plus, p.eta * p.r, p.s - 5.0 * p.sigma)
        report.contraction_ratio = report.new_error / report.old_error if report.old_error > 0 else 0.0
    return corr.nf, pert_plus


def run_iteration(spec: HamiltonianSpec, xi, sched: StepSchedule, mode: Optional[RunMode] = None,
                  settings: Optional[IterationSettings] = None) -> IterationResult:
    """Run steps v = 0..nu_max-1 from the expansion of spec at xi.

    Stops at nu_max, when the new error drops to settings.error_floor, or at
    the first failing step; failures are recorded as a halt, not raised.
    """
    mode = mode or RunMode()
    settings = settings or IterationSettings()
    scales = spec.scales
    nf, tail, unit = expand_at(spec, xi, sched.window(0))
    pert = initial_perturbation(tail, unit, scales)
    initial_nf = nf
    freq = FrequencyField.from_spec(spec)
    rows, cols = _mode_block(nf, mode)
    result = IterationResult(nf=nf, initial_nf=initial_nf, perturbation=pert, trace=ConvergenceTrace(),
                             reports=[], mode=mode, rows=rows, cols=cols)
    options = settings.step_options()
    logger.info("iteration_started", mode=str(mode), nu_max=sched.nu_max, n=spec.n)

    for nu in range(sched.nu_max):
        try:
            p = sched.step_params(nu, scales, m_taylor=spec.m_taylor, **options)
            p_next = sched.step_params(nu + 1, scales, m_taylor=spec.m_taylor, **options)
        except ValueError as exc:
            result.halt = HaltRecord(nu, "schedule", str(exc))
            break
        try:
            error = majorant_norm(pert, p.r, p.s)
            epsilon = scales.epsilon_ratio if nu == 0 else error / scales.eps_min
            _, r_series = truncate(pert, p.K, p.m_taylor)
            gates = gate_check(p, nf.n, epsilon, fourier_order=r_series.max_order())
            if not gates.passed:
                raise GateFailure(gates.failed, gates.margins, nu)
            lipschitz = freq.lipschitz_bound(nf.base_point, p.h)
            screen = screen_divisors(nf.omega, p, lipschitz, modes=r_series.modes())
            if screen.resonant:
                raise DivisorFailure(screen.resonant, nu)
            F = solve_homological(nf, r_series, p)
            nf_plus, pert_plus, report = apply_step(nf, pert, F, p, nu=nu, epsilon=epsilon,
                                                    gates=gates, screen=screen)
            nf_plus, pert_plus = _correct(mode, nf, nf_plus, pert_plus, average(r_series), report, p,
                                          settings, rows, cols)
        except StepError as exc:
            result.halt = HaltRecord(nu, exc.kind, str(exc), exc.details())
            logger.warning("iteration_halted", nu=nu, kind=exc.kind, reason=str(exc))
            break
        except SeriesOverflowError as exc:
            result.halt = HaltRecord(nu, "overflow", str(exc))
            logger.warning("iteration_halted", nu=nu, kind="overflow", reason=str(exc))
            break

        report.accepted = error_update(report, p, p_next)
        deviation = step_deviation(error / scales.eps_min, error, p.gamma, p.r, p.sigma, p.h, p.tau)
        result.trace.record(nu, error, report.new_error, report.target_error, deviation,
                            report.contraction_ratio)
        result.reports.append(report)
        logger.info("kam_step_completed", nu=nu, error=error, new_error=report.new_error,
                    accepted=report.accepted)
        if not report.accepted:
            result.halt = HaltRecord(nu, "error_update",
                                     f"step {nu} did not meet the error contraction or target",
                                     {"new_error": report.new_error, "target": report.target_error,
                                      "contraction_ratio": report.contraction_ratio})
            break
        nf, pert = nf_plus, pert_plus
        result.nf, result.perturbation = nf, pert
        if report.new_error <= settings.error_floor:
            result.stop_reason = "error_floor"
            break

    if result.halt is not None:
        result.stop_reason = result.halt.kind
    logger.info("iteration_finished", steps=len(result.reports), stop_reason=result.stop_reason)
    return result
