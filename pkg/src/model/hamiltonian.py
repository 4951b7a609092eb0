"""
Multi-scale Hamiltonians and parameterized normal forms.

A HamiltonianSpec holds the integrable parts H_1..H_m (angle-free polynomial
series), their scale factors and a unit perturbation P(I, theta). The full
Hamiltonian is  sum_i eps_i H_i(I) + eps P(I, theta)  with eps = epsilon_ratio * eps_min.

A NormalForm is the Hamiltonian recentred at a base point xi and split per scale:

    N = sum_i eps_i (e^i + <omega^i, I> + 1/2 <I, A^i I> + sum_j h^i_j I^j) + drift

The drift series collects everything the KAM steps add later (absorbed
averages and action translations). Combined quantities are always read off
the assembled series, so they can never disagree with the parts.
"""

from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..errors import DomainError, ModelError
from ..series import (
    DomainWindow,
    FourierTaylorSeries,
    degree_part,
    derivative,
    evaluate,
    linear_combination,
    majorant_norm,
    translate,
    translation_increment,
)

logger = structlog.get_logger(__name__)

SYMMETRY_RTOL = 1e-12


@dataclass(frozen=True)
class ScaleSet:
    """Scale factors eps_1..eps_m and the perturbation size eps = ratio * eps_min."""
    epsilons: Tuple[float, ...]
    epsilon_ratio: float = 1.0

    def __post_init__(self):
        eps = tuple(float(e) for e in self.epsilons)
        if not eps:
            raise ModelError("scale set needs at least one scale")
        for i, e in enumerate(eps, start=1):
            if not 0.0 < e <= 1.0:
                raise ModelError(f"scale eps_{i} must lie in (0, 1], got {e!r}")
        if not self.epsilon_ratio > 0:
            raise ModelError(f"epsilon_ratio must be > 0, got {self.epsilon_ratio!r}")
        object.__setattr__(self, "epsilons", eps)
        object.__setattr__(self, "epsilon_ratio", float(self.epsilon_ratio))

    @property
    def m(self) -> int:
        return len(self.epsilons)

    @property
    def eps_min(self) -> float:
        return min(self.epsilons)

    @property
    def eps_max(self) -> float:
        return max(self.epsilons)

    @property
    def eps_pert(self) -> float:
        return self.epsilon_ratio * self.eps_min

    def rescaled(self, factor: float) -> "ScaleSet":
        return ScaleSet(tuple(e * factor for e in self.epsilons), self.epsilon_ratio)

    def is_ordered(self) -> bool:
        """True when the scales are strictly decreasing in index order."""
        return all(a > b for a, b in zip(self.epsilons, self.epsilons[1:]))


def _zero_mode(dim: int) -> Tuple[int, ...]:
    return (0,) * dim


def _unit(dim: int, i: int) -> Tuple[int, ...]:
    j = [0] * dim
    j[i] = 1
    return tuple(j)


@dataclass(frozen=True)
class HamiltonianSpec:
    """Polynomial multi-scale Hamiltonian: scales index the integrable parts from 1."""
    n: int
    integrable_parts: Tuple[FourierTaylorSeries, ...]
    perturbation: FourierTaylorSeries
    scales: ScaleSet
    m_taylor: int = 4
    domain: Optional[Tuple[Tuple[float, ...], Tuple[float, ...]]] = None

    def __post_init__(self):
        if self.m_taylor < 3:
            raise ModelError(f"m_taylor must be >= 3, got {self.m_taylor}")
        if len(self.integrable_parts) != self.scales.m:
            raise ModelError(
                f"{len(self.integrable_parts)} integrable parts for {self.scales.m} scales"
            )
        parts = []
        for i, part in enumerate(self.integrable_parts, start=1):
            if part.dim != self.n:
                raise ModelError(f"integrable part {i} has dimension {part.dim}, expected {self.n}")
            if any(any(k) for k in part.modes()):
                raise ModelError(f"integrable part {i} depends on the angles")
            parts.append(part.with_options(floor=0.0, real=True))
        object.__setattr__(self, "integrable_parts", tuple(parts))
        if self.perturbation.dim != self.n:
            raise ModelError(f"perturbation has dimension {self.perturbation.dim}, expected {self.n}")
        if self.domain is not None:
            lower, upper = (tuple(float(x) for x in b) for b in self.domain)
            if len(lower) != self.n or len(upper) != self.n or any(lo >= hi for lo, hi in zip(lower, upper)):
                raise ModelError("action domain must be a nonempty box in R^n")
            object.__setattr__(self, "domain", (lower, upper))

    def integrable_series(self) -> FourierTaylorSeries:
        return linear_combination([(e, h) for e, h in zip(self.scales.epsilons, self.integrable_parts)])

    def value(self, actions, angles) -> np.ndarray:
        """Full Hamiltonian sum_i eps_i H_i + eps P at the given points."""
        integrable = evaluate(self.integrable_series(), actions, angles)
        return integrable + self.scales.eps_pert * evaluate(self.perturbation, actions, angles)


class NormalForm:
    """Per-scale normal form of degree <= m_taylor - 1 around a base point."""

    def __init__(
        self,
        scales: ScaleSet,
        e_parts,
        omega_parts,
        a_parts,
        h_parts: Sequence[Dict[Tuple[int, ...], float]],
        m_taylor: int,
        base_point=None,
        drift: Optional[FourierTaylorSeries] = None,
    ):
        self.scales = scales
        self.e_parts = np.asarray(e_parts, dtype=float)
        self.omega_parts = np.atleast_2d(np.asarray(omega_parts, dtype=float))
        self.a_parts = np.asarray(a_parts, dtype=float)
        self.m_taylor = int(m_taylor)
        m, n = self.omega_parts.shape
        if self.e_parts.shape != (m,) or self.a_parts.shape != (m, n, n) or m != scales.m:
            raise ModelError(f"normal form parts do not match {scales.m} scales in dimension {n}")
        for i, a in enumerate(self.a_parts, start=1):
            if not np.allclose(a, a.T, rtol=SYMMETRY_RTOL, atol=SYMMETRY_RTOL * max(np.abs(a).max(), 1e-300)):
                raise ModelError(f"A^{i} is not symmetric")
        self.h_parts = tuple({tuple(j): float(c) for j, c in part.items()} for part in h_parts)
        if len(self.h_parts) != m:
            raise ModelError(f"expected {m} h blocks, got {len(self.h_parts)}")
        for part in self.h_parts:
            for j in part:
                if len(j) != n or not 3 <= sum(j) <= self.m_taylor - 1:
                    raise ModelError(f"h coefficient {j} outside degrees 3..{self.m_taylor - 1}")
        self.base_point = np.zeros(n) if base_point is None else np.asarray(base_point, dtype=float).copy()
        if drift is None:
            drift = FourierTaylorSeries.zero(n, real=True, floor=0.0)
        if any(any(k) for k in drift.modes()) or drift.max_degree() > self.m_taylor - 1:
            raise ModelError("drift must be angle-free with degree <= m_taylor - 1")
        self.drift = drift.with_options(floor=0.0)
        self._part_series = tuple(self._scale_series(i) for i in range(m))
        self._series: Optional[FourierTaylorSeries] = None

    @property
    def n(self) -> int:
        return self.omega_parts.shape[1]

    def _scale_series(self, i: int) -> FourierTaylorSeries:
        n = self.n
        zero = _zero_mode(n)
        coeffs = {}
        if self.e_parts[i] != 0:
            coeffs[(zero, zero)] = self.e_parts[i]
        for a in range(n):
            if self.omega_parts[i, a] != 0:
                coeffs[(zero, _unit(n, a))] = self.omega_parts[i, a]
            for b in range(a, n):
                value = self.a_parts[i, a, b] * (0.5 if a == b else 1.0)
                if value != 0:
                    j = [0] * n
                    j[a] += 1
                    j[b] += 1
                    coeffs[(zero, tuple(j))] = value
        for j, c in self.h_parts[i].items():
            coeffs[(zero, j)] = coeffs.get((zero, j), 0.0) + c
        return FourierTaylorSeries(n, coeffs, real=True, floor=0.0)

    def part_series(self, i: int) -> FourierTaylorSeries:
        return self._part_series[i]

    def as_series(self) -> FourierTaylorSeries:
        """The integrable part N as one series (floor 0)."""
        if self._series is None:
            terms = [(e, s) for e, s in zip(self.scales.epsilons, self._part_series)]
            terms.append((1.0, self.drift))
            self._series = linear_combination(terms).with_options(floor=0.0)
        return self._series

    @property
    def e(self) -> float:
        zero = _zero_mode(self.n)
        return self.as_series().coefficient(zero, zero).real

    @property
    def omega(self) -> np.ndarray:
        zero = _zero_mode(self.n)
        series = self.as_series()
        return np.array([series.coefficient(zero, _unit(self.n, a)).real for a in range(self.n)])

    @property
    def A(self) -> np.ndarray:
        return hessian_from_series(self.as_series())

    @property
    def h(self) -> Dict[Tuple[int, ...], float]:
        return {j: c.real for (k, j), c in self.as_series().items() if sum(j) >= 3}

    def frequency_at(self, actions) -> np.ndarray:
        """Gradient of N at real action offsets (from the base point)."""
        series = self.as_series()
        return np.array([evaluate(derivative(series, "I", a), actions).real for a in range(self.n)]).T

    def gradient_series(self) -> List[FourierTaylorSeries]:
        return [derivative(self.as_series(), "I", a) for a in range(self.n)]

    def with_drift(self, drift: FourierTaylorSeries, base_point=None) -> "NormalForm":
        return NormalForm(
            self.scales, self.e_parts, self.omega_parts, self.a_parts, self.h_parts, self.m_taylor,
            self.base_point if base_point is None else base_point, drift,
        )

    def absorb(self, averaged: FourierTaylorSeries) -> "NormalForm":
        """Add the angle average [R] (degrees 0..m_taylor-1) to the drift."""
        extra = degree_part(averaged, 0, self.m_taylor - 1)
        if any(any(k) for k in extra.modes()):
            raise ModelError("only angle-free terms can be absorbed into the normal form")
        return self.with_drift(linear_combination([(1.0, self.drift), (1.0, extra.with_options(floor=0.0))]))

    def translate(self, shift) -> "NormalForm":
        """Normal form in the actions recentred at I = shift."""
        shift = np.asarray(shift, dtype=float)
        increment = translation_increment(self.as_series(), shift).with_options(floor=0.0)
        drift = linear_combination([(1.0, self.drift), (1.0, increment)])
        return self.with_drift(drift, base_point=self.base_point + shift)

    def set_drift_constant(self, value: complex) -> "NormalForm":
        """Copy whose drift constant term is exactly `value`."""
        zero = _zero_mode(self.n)
        coeffs = {key: c for key, c in self.drift.items() if key != (zero, zero)}
        if value != 0:
            coeffs[(zero, zero)] = value
        return self.with_drift(FourierTaylorSeries(self.n, coeffs, real=True, floor=0.0))

    def drift_constant(self) -> complex:
        zero = _zero_mode(self.n)
        return self.drift.coefficient(zero, zero)

    def rescaled(self, factor: float) -> "NormalForm":
        return NormalForm(
            self.scales.rescaled(factor), self.e_parts, self.omega_parts, self.a_parts, self.h_parts,
            self.m_taylor, self.base_point, self.drift,
        )

    def __repr__(self) -> str:
        return f"NormalForm(n={self.n}, m={self.scales.m}, m_taylor={self.m_taylor})"


def hessian_from_series(series: FourierTaylorSeries) -> np.ndarray:
    """Symmetric matrix A with 1/2 <I, A I> equal to the k = 0 quadratic part."""
    n = series.dim
    A = np.zeros((n, n))
    for (k, j), c in series.items():
        if any(k) or sum(j) != 2:
            continue
        idx = [a for a in range(n) for _ in range(j[a])]
        a, b = idx
        if a == b:
            A[a, a] = 2.0 * c.real
        else:
            A[a, b] = A[b, a] = c.real
    return A


def _split_quadratic(series: FourierTaylorSeries, m_taylor: int):
    n = series.dim
    zero = _zero_mode(n)
    e = series.coefficient(zero, zero).real
    omega = np.array([series.coefficient(zero, _unit(n, a)).real for a in range(n)])
    A = hessian_from_series(series)
    h = {j: c.real for (k, j), c in series.items() if 3 <= sum(j) <= m_taylor - 1}
    return e, omega, A, h


def expand_at(spec: HamiltonianSpec, xi, window: DomainWindow):
    """Recentre the Hamiltonian at base point xi.

    Returns (nf, tail, pert): the per-scale normal form of degree < m_taylor,
    the combined integrable terms of degree >= m_taylor, and the unit
    perturbation in the shifted actions. For polynomial specs

        spec(xi + I, theta) == nf(I) + tail(I) + eps * pert(I, theta)
    """
    xi = np.asarray(xi, dtype=float)
    if xi.shape != (spec.n,):
        raise ModelError(f"base point must have {spec.n} entries, got shape {xi.shape}")
    if spec.domain is not None:
        lower, upper = (np.asarray(b) for b in spec.domain)
        distance = float(min(np.min(xi - lower), np.min(upper - xi)))
        if distance < window.r:
            raise DomainError(
                f"base point is {distance:.3g} from the action domain boundary, window needs {window.r:.3g}"
            )

    e_parts, omega_parts, a_parts, h_parts, tails = [], [], [], [], []
    for eps, part in zip(spec.scales.epsilons, spec.integrable_parts):
        shifted = translate(part, xi)
        e, omega, A, h = _split_quadratic(shifted, spec.m_taylor)
        e_parts.append(e)
        omega_parts.append(omega)
        a_parts.append(A)
        h_parts.append(h)
        tails.append((eps, degree_part(shifted, spec.m_taylor)))

    nf = NormalForm(spec.scales, e_parts, omega_parts, a_parts, h_parts, spec.m_taylor, base_point=xi)
    tail = linear_combination(tails).with_options(floor=0.0)
    pert = translate(spec.perturbation, xi)
    logger.debug("expanded_at_base_point", n=spec.n, scales=spec.scales.m,
                 tail_terms=len(tail), pert_terms=len(pert))
    return nf, tail, pert


def tail_constant(tail: FourierTaylorSeries, window: DomainWindow, scales: ScaleSet) -> float:
    """Measured c with majorant_norm(tail, r, s) = c * eps."""
    return majorant_norm(tail, window.r, window.s) / scales.eps_pert


def perturbation_gate(pert: FourierTaylorSeries, window: DomainWindow, scales: ScaleSet, c: float) -> bool:
    """Strict smallness test |P|_{r,s} < c * eps with the majorant norm."""
    if not c > 0:
        raise ModelError(f"gate constant must be > 0, got {c!r}")
    return majorant_norm(pert, window.r, window.s) < c * scales.eps_pert


def initial_perturbation(tail: FourierTaylorSeries, pert: FourierTaylorSeries, scales: ScaleSet) -> FourierTaylorSeries:
    """Full-size perturbation tail + eps * pert entering the first step."""
    return linear_combination([(1.0, tail), (scales.eps_pert, pert)])
