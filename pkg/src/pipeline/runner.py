"""
Run orchestration: condition checks required by the mode, the KAM
iteration, the optional measure fit, and the verdict set deciding the exit
status.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, List, Optional

import structlog

from .. import __version__
from ..analysis.verdicts import evaluate_verdicts, identity_holds
from ..conditions import (
    ConditionReport,
    bordered_determinant,
    box_grid,
    check_I,
    check_I_grid,
    check_K,
    check_K_grid,
    check_R,
    eigen_lower_bound,
    hessian_determinant,
)
from ..errors import KamEngineError, MeasureError, RunError, ScheduleError
from ..measure import ResonanceQuery, fit_measure_exponent
from ..model import FrequencyField, HamiltonianSpec, NormalForm, expand_at
from ..monitoring import PhaseTimer, StandardPhases
from ..schedule import convergence_report, make_schedule, run_iteration
from ..series import DomainWindow
from .config import RunConfig, build_spec, initial_params, iteration_settings, measure_box
from .example import bordered_identity, hessian_identity

logger = structlog.get_logger(__name__)

TOOL_NAME = "multiscale-kam-engine"
STAGES = ("conditions", "iteration", "measure")

REQUIRED_BY_MODE = {
    "full": ("R",),
    "frequency_preserving": ("R", "K"),
    "isoenergetic": ("R", "K", "I"),
}


@dataclass
class RunReport:
    """Self-contained result of a run; the config echo re-creates it."""
    config: Dict[str, Any]
    stages: List[str]
    mode: str
    required_conditions: List[str] = field(default_factory=list)
    conditions: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    identities: Dict[str, Dict[str, Any]] = field(default_factory=dict)
    eigen: Optional[Dict[str, Any]] = None
    schedule: List[Dict[str, Any]] = field(default_factory=list)
    iteration: Optional[Dict[str, Any]] = None
    measure: Optional[Dict[str, Any]] = None
    skipped: Dict[str, str] = field(default_factory=dict)
    verdicts: Dict[str, Any] = field(default_factory=dict)
    exit_code: int = 0
    scales_ordered: Optional[bool] = None

    def to_dict(self) -> Dict[str, Any]:
        return {
            "tool": {"name": TOOL_NAME, "version": __version__},
            "mode": self.mode,
            "stages": self.stages,
            "required_conditions": self.required_conditions,
            "scales_ordered": self.scales_ordered,
            "conditions": self.conditions,
            "identities": self.identities,
            "eigen": self.eigen,
            "schedule": self.schedule,
            "iteration": self.iteration,
            "measure": self.measure,
            "skipped": self.skipped,
            "verdicts": self.verdicts,
            "exit_code": self.exit_code,
            "config": self.config,
        }


def initial_window(config: RunConfig) -> DomainWindow:
    s = config.schedule
    return DomainWindow(r=s.r0, s=s.s0, h=s.h0)


def check_conditions(config: RunConfig, spec: HamiltonianSpec, nf: NormalForm) -> List[ConditionReport]:
    """Run the enabled checks at the base point, or over a grid when grid_points > 1."""
    cond = config.conditions
    n1 = config.run_mode().resolved_n1(spec.n)
    freq = FrequencyField.from_spec(spec)
    primed = cond.grid_points > 1
    grid = box_grid(config.xi(), cond.grid_radius, cond.grid_points)
    eps_min = spec.scales.eps_min
    reports = []
    if cond.check_r:
        reports.append(check_R(freq, grid, svd_tol=cond.svd_tol, order=cond.order,
                               equilibrate=cond.equilibrate, primed=primed))
    if cond.check_k:
        reports.append(check_K_grid(freq, grid, n1, cond.c_k, eps_min) if primed else check_K(nf, n1, cond.c_k))
    if cond.check_i:
        reports.append(check_I_grid(freq, grid, n1, cond.c_i, eps_min) if primed else check_I(nf, n1, cond.c_i))
    return reports


def example_identities(config: RunConfig, nf: NormalForm) -> Dict[str, Dict[str, Any]]:
    """Closed-form determinant identities of the built-in example at the base point."""
    ex = config.example
    hessian = hessian_determinant(nf)
    hessian_expected = hessian_identity(ex.epsilon, ex.a)
    bordered = bordered_determinant(nf)
    bordered_expected = bordered_identity(ex.epsilon, ex.a, config.xi())
    return {
        "hessian": {"computed": hessian, "expected": hessian_expected,
                    "pass": identity_holds(hessian, hessian_expected)},
        "bordered": {"computed": bordered, "expected": bordered_expected,
                     "pass": identity_holds(bordered, bordered_expected)},
    }


def _conditions_phase(config: RunConfig, spec: HamiltonianSpec, nf: NormalForm, report: RunReport) -> None:
    needed = REQUIRED_BY_MODE[config.run_mode().kind]
    for result in check_conditions(config, spec, nf):
        report.conditions[result.condition_id] = result.to_dict()
        if result.condition_id.rstrip("'") in needed:
            report.required_conditions.append(result.condition_id)
    if config.uses_example():
        report.identities = example_identities(config, nf)
    if config.conditions.eigen:
        report.eigen = eigen_lower_bound(nf.a_parts, spec.scales).to_dict()


def _iteration_phase(config: RunConfig, spec: HamiltonianSpec, pert_order: int, report: RunReport) -> None:
    s = config.schedule
    init = initial_params(config, spec, fourier_order=max(pert_order, 1))
    try:
        sched = make_schedule(init, s.m, s.a, s.nu_max)
    except ScheduleError as exc:
        report.iteration = {
            "stop_reason": "schedule",
            "halt": {"nu": 0, "kind": "schedule", "message": str(exc), "details": {"messages": exc.messages}},
            "steps": [],
            "trace": [],
            "convergence": None,
        }
        return
    report.schedule = sched.rows()
    result = run_iteration(spec, config.xi(), sched, config.run_mode(), iteration_settings(config))
    report.iteration = {
        "stop_reason": result.stop_reason,
        "halt": result.halt.to_dict() if result.halt is not None else None,
        "rows": list(result.rows),
        "cols": list(result.cols),
        "steps": [step.to_dict() for step in result.reports],
        "trace": result.trace.rows(),
        "convergence": convergence_report(result.trace).to_dict() if len(result.trace) else None,
        "initial": {"e": result.initial_nf.e, "omega": result.initial_nf.omega.tolist()},
        "final": {"e": result.nf.e, "omega": result.nf.omega.tolist(),
                  "base_point": result.nf.base_point.tolist()},
    }


def _measure_phase(config: RunConfig, spec: HamiltonianSpec, report: RunReport) -> None:
    block = config.measure
    lower, upper = measure_box(config)
    tau = block.tau if block.tau is not None else config.schedule.tau
    try:
        query = ResonanceQuery(FrequencyField.from_spec(spec), (tuple(lower), tuple(upper)), max(block.gammas),
                               tau, block.k_max, spec.scales, samples=block.samples, seed=block.seed,
                               exponent=block.exponent, batch_size=block.batch_size)
        report.measure = fit_measure_exponent(query, block.gammas, block.order).to_dict()
    except MeasureError as exc:
        logger.warning("measure_failed", reason=str(exc))
        report.measure = {"error": str(exc)}


def run(config: RunConfig, stages: Iterable[str] = STAGES, timer: Optional[PhaseTimer] = None) -> RunReport:
    """Execute the requested stages and evaluate the verdicts.

    The iteration is skipped when a condition required by the mode fails;
    the measure stage runs only when the config has a measure block.
    """
    stages = [stage for stage in STAGES if stage in set(stages)]
    timer = timer or PhaseTimer()
    report = RunReport(config=config.model_dump(mode="json"), stages=stages, mode=config.mode)
    spec = build_spec(config)
    report.scales_ordered = spec.scales.is_ordered()
    nf, _, pert = expand_at(spec, config.xi(), initial_window(config))
    logger.info("run_started", mode=config.mode, stages=stages, n=spec.n)

    if "conditions" in stages:
        with timer.phase(StandardPhases.CONDITIONS):
            try:
                _conditions_phase(config, spec, nf, report)
            except KamEngineError as exc:
                raise RunError("conditions", exc) from exc

    if "iteration" in stages:
        failed = [cid for cid in report.required_conditions if not report.conditions[cid]["pass"]]
        if failed:
            report.skipped["iteration"] = f"required condition(s) {', '.join(failed)} failed"
            logger.warning("iteration_skipped", failed=failed)
        else:
            with timer.phase(StandardPhases.ITERATION):
                try:
                    _iteration_phase(config, spec, pert.max_order(), report)
                except KamEngineError as exc:
                    raise RunError("iteration", exc) from exc

    if "measure" in stages:
        if config.measure is None:
            report.skipped["measure"] = "no measure block in config"
        else:
            with timer.phase(StandardPhases.MEASURE):
                _measure_phase(config, spec, report)

    summary = evaluate_verdicts(report.to_dict())
    report.verdicts = summary.to_dict()
    report.exit_code = summary.exit_code
    logger.info("run_finished", exit_code=report.exit_code, failed=summary.failed)
    return report
