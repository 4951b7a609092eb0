"""
Run configuration: pydantic models, parsing with field-precise errors, and
the canonical emitter.

A config is one JSON object with the blocks hamiltonian, example,
base_point, mode, schedule, conditions, measure and output. Unknown keys
are errors everywhere. The exact grammar is documented in docs/CONFIG.md.
"""

import json
from math import log10
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator

from ..errors import ConfigError, KamEngineError
from ..measure.resonance import MIN_DECADES, MIN_GAMMAS
from ..model import HamiltonianSpec, ScaleSet
from ..schedule import InitialParams, IterationSettings, RunMode, validate_schedule
from ..series import FourierTaylorSeries, loads_series
from .example import example_coorbital

DEFAULT_BASE_POINT = (10.0, 1.0, 1.0, 1.0, 1.0, 1.0)


class StrictModel(BaseModel):
    model_config = ConfigDict(extra="forbid")


class HamiltonianBlock(StrictModel):
    """Either the built-in example or inline series in the line format."""
    source: Literal["example", "inline"] = "example"
    n: Optional[int] = None
    scales: Optional[List[float]] = None
    epsilon_ratio: float = 1.0
    parts: Optional[List[str]] = None
    perturbation: str = ""
    domain: Optional[List[List[float]]] = None


class ExampleBlock(StrictModel):
    epsilon: float = 1e-3
    a: float = 4.0
    mean_field: float = 0.0
    perturbed: bool = True


class ScheduleBlock(StrictModel):
    r0: float = 6.4e-5
    s0: float = 1.0
    eta0: float = 0.1
    h0: float = 6.4e-5
    gamma0: float = 1.28e17
    tau: float = 5.0
    m: int = 4
    a: float = 4.0
    nu_max: int = 5
    theta_gate: float = 0.1
    lie_order: int = 4
    slack: float = 0.5
    error_floor: float = 0.0

    @field_validator("eta0")
    @classmethod
    def _eta0_below_eighth(cls, value: float) -> float:
        if not value < 0.125:
            raise ValueError("eta0 must be < 1/8 for the error contraction estimate")
        if not value > 0:
            raise ValueError("eta0 must be > 0")
        return value


class ConditionsBlock(StrictModel):
    check_r: bool = True
    check_k: bool = True
    check_i: bool = True
    c_k: float = 1.0
    c_i: float = 1.0
    svd_tol: Optional[float] = None
    order: Optional[int] = None
    grid_radius: float = 0.0
    grid_points: int = Field(default=1, ge=1)
    equilibrate: bool = True
    eigen: bool = True


class MeasureBlock(StrictModel):
    gammas: List[float] = Field(default_factory=lambda: [1.0, 0.1, 0.01, 0.001])
    k_max: int = Field(default=2, ge=1)
    samples: int = Field(default=100_000, ge=1)
    seed: int = 0
    tau: Optional[float] = None
    exponent: Optional[float] = None
    box: Optional[List[List[float]]] = None
    box_radius: float = Field(default=0.5, gt=0)
    order: Optional[int] = None
    batch_size: int = Field(default=20_000, ge=1)


class OutputBlock(StrictModel):
    dir: str = "runs/latest"
    tables: bool = True
    html: bool = False
    archive: bool = False


class RunConfig(StrictModel):
    hamiltonian: HamiltonianBlock = Field(default_factory=HamiltonianBlock)
    example: ExampleBlock = Field(default_factory=ExampleBlock)
    base_point: List[float] = Field(default_factory=lambda: list(DEFAULT_BASE_POINT))
    mode: str = "full"
    schedule: ScheduleBlock = Field(default_factory=ScheduleBlock)
    conditions: ConditionsBlock = Field(default_factory=ConditionsBlock)
    measure: Optional[MeasureBlock] = None
    output: OutputBlock = Field(default_factory=OutputBlock)

    @field_validator("mode")
    @classmethod
    def _canonical_mode(cls, value: str) -> str:
        return str(RunMode.parse(value))

    def run_mode(self) -> RunMode:
        return RunMode.parse(self.mode)

    def xi(self) -> np.ndarray:
        return np.asarray(self.base_point, dtype=float)

    def uses_example(self) -> bool:
        return self.hamiltonian.source == "example"


def build_spec(config: RunConfig) -> HamiltonianSpec:
    """HamiltonianSpec described by the hamiltonian (and example) blocks."""
    block = config.hamiltonian
    m_taylor = config.schedule.m
    if block.source == "example":
        ex = config.example
        return example_coorbital(ex.epsilon, ex.a, mean_field=ex.mean_field, perturbed=ex.perturbed,
                                 m_taylor=m_taylor)
    if block.n is None or block.scales is None or block.parts is None:
        raise ConfigError(["hamiltonian: inline source needs n, scales and parts"])
    parts = tuple(loads_series(text, dim=block.n, real=True, floor=0.0) for text in block.parts)
    if block.perturbation.strip():
        perturbation = loads_series(block.perturbation, dim=block.n, real=True)
    else:
        perturbation = FourierTaylorSeries.zero(block.n, real=True)
    domain = None if block.domain is None else tuple(tuple(b) for b in block.domain)
    return HamiltonianSpec(n=block.n, integrable_parts=parts, perturbation=perturbation,
                           scales=ScaleSet(tuple(block.scales), block.epsilon_ratio), m_taylor=m_taylor,
                           domain=domain)


def initial_params(config: RunConfig, spec: HamiltonianSpec, fourier_order: Optional[float] = None) -> InitialParams:
    s = config.schedule
    return InitialParams(n=spec.n, r0=s.r0, s0=s.s0, eta0=s.eta0, h0=s.h0, gamma0=s.gamma0, tau=s.tau,
                         scales=spec.scales, epsilon_ratio=spec.scales.epsilon_ratio,
                         fourier_order=fourier_order, theta_gate=s.theta_gate)


def iteration_settings(config: RunConfig) -> IterationSettings:
    s = config.schedule
    return IterationSettings(theta_gate=s.theta_gate, lie_order=s.lie_order, slack=s.slack,
                             error_floor=s.error_floor)


def measure_box(config: RunConfig) -> List[List[float]]:
    block = config.measure
    if block.box is not None:
        return block.box
    xi = config.xi()
    return [(xi - block.box_radius).tolist(), (xi + block.box_radius).tolist()]


def _format_error(err: Dict[str, Any]) -> str:
    where = ".".join(str(part) for part in err["loc"]) or "config"
    return f"{where}: {err['msg']}"


def _cross_check(config: RunConfig) -> List[str]:
    try:
        spec = build_spec(config)
    except ConfigError as exc:
        return exc.errors
    except KamEngineError as exc:
        return [f"hamiltonian: {exc}"]
    n = spec.n
    messages = []
    if len(config.base_point) != n:
        messages.append(f"base_point: expected {n} entries, got {len(config.base_point)}")
    mode = config.run_mode()
    if mode.n1 is not None and mode.n1 > n:
        messages.append(f"mode: n1 must lie in [1, {n}], got {mode.n1}")
    cond = config.conditions
    if mode.kind == "isoenergetic" and not (cond.check_k and cond.check_i):
        messages.append("mode: isoenergetic runs need the iso-energetic non-degeneracy conditions K and I; "
                        "enable conditions.check_k and conditions.check_i")
    if mode.kind == "frequency_preserving" and not cond.check_k:
        messages.append("mode: frequency_preserving runs need the Kolmogorov non-degeneracy condition K; "
                        "enable conditions.check_k")
    s = config.schedule
    init = InitialParams(n=n, r0=s.r0, s0=s.s0, eta0=s.eta0, h0=s.h0, gamma0=s.gamma0, tau=s.tau)
    messages.extend(f"schedule: {msg}" for msg in validate_schedule(init, s.m, s.a, s.nu_max))
    if s.lie_order < 1:
        messages.append(f"schedule.lie_order: must be >= 1, got {s.lie_order}")
    if config.measure is not None:
        messages.extend(_check_measure(config, n))
    out = Path(config.output.dir)
    if out.exists() and not out.is_dir():
        messages.append(f"output.dir: {out} exists and is not a directory")
    return messages


def _check_measure(config: RunConfig, n: int) -> List[str]:
    block = config.measure
    messages = []
    gammas = block.gammas
    if len(gammas) < MIN_GAMMAS:
        messages.append(f"measure.gammas: need at least {MIN_GAMMAS} values, got {len(gammas)}")
    elif min(gammas) <= 0:
        messages.append("measure.gammas: values must be positive")
    elif log10(max(gammas) / min(gammas)) < MIN_DECADES:
        messages.append(f"measure.gammas: values must span at least {MIN_DECADES:g} decades")
    tau = block.tau if block.tau is not None else config.schedule.tau
    if not tau > n - 1:
        messages.append(f"measure.tau: must be > n - 1 = {n - 1}, got {tau!r}")
    if block.box is not None:
        if len(block.box) != 2 or any(len(b) != n for b in block.box):
            messages.append(f"measure.box: expected [lower, upper] with {n} entries each")
        elif any(lo >= hi for lo, hi in zip(*block.box)):
            messages.append("measure.box: lower bounds must be below upper bounds")
    return messages


def validate_data(data: Any) -> RunConfig:
    """Validate a decoded JSON document; raises ConfigError with every problem found."""
    if not isinstance(data, dict):
        raise ConfigError(["config: top level must be a JSON object"])
    try:
        config = RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError([_format_error(err) for err in exc.errors()]) from exc
    messages = _cross_check(config)
    if messages:
        raise ConfigError(messages)
    return config


def parse_config(text: str) -> RunConfig:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError([f"line {exc.lineno}, column {exc.colno}: {exc.msg}"]) from exc
    return validate_data(data)


def load_config(path) -> RunConfig:
    return parse_config(Path(path).read_text(encoding="utf-8"))


def emit_config(config: RunConfig) -> str:
    """Canonical text: 2-space indent, field order, shortest round-trip floats."""
    return json.dumps(config.model_dump(mode="json"), indent=2) + "\n"


def with_overrides(config: RunConfig, seed: Optional[int] = None, out: Optional[str] = None,
                   mode: Optional[str] = None) -> RunConfig:
    """Apply command-line overrides and validate the result again."""
    data = config.model_dump(mode="json")
    if seed is not None and data.get("measure") is not None:
        data["measure"]["seed"] = seed
    if out is not None:
        data["output"]["dir"] = out
    if mode is not None:
        data["mode"] = mode
    return validate_data(data)


def example_config() -> RunConfig:
    """Config of the built-in co-orbital example with default settings."""
    return RunConfig()
