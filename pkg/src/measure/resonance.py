"""
Monte Carlo estimates of resonant parameter sets

    {xi in box : exists 0 < |k| <= k_max with |<k, omega(xi)>| < eps_min gamma / |k|^exponent}

and the power-law exponent of their measure in gamma.
"""

from dataclasses import dataclass, field
from math import log10, prod
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import structlog
from scipy import stats

from ..errors import EmptyResonanceSetError, MeasureError
from ..kamstep import half_space_modes
from ..model import FrequencyField, ScaleSet

logger = structlog.get_logger(__name__)

DEFAULT_BATCH = 20_000
MIN_GAMMAS = 4
MIN_DECADES = 2.0


@dataclass(frozen=True)
class ResonanceQuery:
    """Frequency map, parameter box and Diophantine data of a measure estimate.

    exponent defaults to tau; modes, when given, replace the enumeration of
    0 < |k| <= k_max.
    """
    frequency: FrequencyField
    box: Tuple[Tuple[float, ...], Tuple[float, ...]]
    gamma: float
    tau: float
    k_max: int
    scales: ScaleSet
    samples: int = 1_000_000
    seed: int = 0
    exponent: Optional[float] = None
    modes: Optional[Tuple[Tuple[int, ...], ...]] = None
    batch_size: int = DEFAULT_BATCH

    def __post_init__(self):
        n = self.frequency.n
        lower, upper = (np.asarray(b, dtype=float) for b in self.box)
        if lower.shape != (n,) or upper.shape != (n,):
            raise MeasureError(f"box bounds must have {n} entries")
        if not np.all(upper > lower):
            raise MeasureError("box must have positive volume")
        if not self.gamma > 0:
            raise MeasureError(f"gamma must be > 0, got {self.gamma!r}")
        if not self.tau > n - 1:
            raise MeasureError(f"tau must be > n - 1 = {n - 1}, got {self.tau!r}")
        if self.k_max < 1 and self.modes is None:
            raise MeasureError(f"k_max must be >= 1, got {self.k_max}")
        if self.batch_size < 1:
            raise MeasureError(f"batch_size must be >= 1, got {self.batch_size}")

    @property
    def n(self) -> int:
        return self.frequency.n

    @property
    def divisor_exponent(self) -> float:
        return self.tau if self.exponent is None else self.exponent

    @property
    def volume(self) -> float:
        lower, upper = self.box
        return float(prod(u - l for l, u in zip(lower, upper)))

    def with_gamma(self, gamma: float) -> "ResonanceQuery":
        return ResonanceQuery(self.frequency, self.box, gamma, self.tau, self.k_max, self.scales, self.samples,
                              self.seed, self.exponent, self.modes, self.batch_size)

    def mode_array(self) -> np.ndarray:
        modes = self.modes if self.modes is not None else half_space_modes(self.n, self.k_max)
        modes = [tuple(k) for k in modes if any(k)]
        if not modes:
            raise MeasureError("no nonzero modes to screen")
        return np.array(modes, dtype=float)


@dataclass(frozen=True)
class MeasurePoint:
    gamma: float
    estimate: float
    stderr: float
    hits: int
    samples: int

    def to_dict(self) -> Dict[str, Any]:
        return {"gamma": self.gamma, "estimate": self.estimate, "stderr": self.stderr,
                "hits": self.hits, "samples": self.samples}


@dataclass(frozen=True)
class PowerLawFit:
    beta: float
    stderr: float
    intercept: float
    ci: Tuple[float, float]


@dataclass
class ResonanceEstimate:
    points: List[MeasurePoint]
    beta: float
    stderr: float
    ci: Tuple[float, float]
    intercept: float
    order: int
    samples: int
    verdicts: Dict[str, bool] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "points": [pt.to_dict() for pt in self.points],
            "beta": self.beta,
            "stderr": self.stderr,
            "ci": list(self.ci),
            "intercept": self.intercept,
            "N": self.order,
            "samples": self.samples,
            "verdicts": self.verdicts,
            "notes": self.notes,
        }


def scaled_divisors(q: ResonanceQuery) -> np.ndarray:
    """min_k |<k, omega(xi)>| |k|^exponent at each of q.samples uniform points (seeded batches)."""
    if q.samples <= 0:
        raise MeasureError(f"sample_count must be > 0, got {q.samples}")
    modes = q.mode_array()
    weights = np.abs(modes).sum(axis=1) ** q.divisor_exponent
    lower = np.asarray(q.box[0], dtype=float)
    width = np.asarray(q.box[1], dtype=float) - lower
    batches = -(-q.samples // q.batch_size)
    children = np.random.SeedSequence(q.seed).spawn(batches)
    out = np.empty(q.samples)
    start = 0
    for child in children:
        size = min(q.batch_size, q.samples - start)
        rng = np.random.default_rng(child)
        points = lower + width * rng.random((size, q.n))
        omega = np.atleast_2d(q.frequency(points))
        out[start:start + size] = np.min(np.abs(omega @ modes.T) * weights[None, :], axis=1)
        start += size
    logger.debug("measure_batches", batches=batches, samples=q.samples, modes=len(modes))
    return out


def _point(q: ResonanceQuery, minima: np.ndarray, gamma: float) -> MeasurePoint:
    hits = int(np.count_nonzero(minima < q.scales.eps_min * gamma))
    n = minima.size
    frac = hits / n
    volume = q.volume
    return MeasurePoint(gamma=gamma, estimate=volume * frac, stderr=volume * np.sqrt(frac * (1.0 - frac) / n),
                        hits=hits, samples=n)


def resonance_measure(q: ResonanceQuery) -> MeasurePoint:
    """Estimate and binomial standard error of the resonant volume at q.gamma."""
    point = _point(q, scaled_divisors(q), q.gamma)
    logger.info("resonance_measured", gamma=q.gamma, estimate=point.estimate, hits=point.hits)
    return point


def resonance_curve(q: ResonanceQuery, gammas: Sequence[float]) -> List[MeasurePoint]:
    """Estimates for several gamma from one shared sample."""
    minima = scaled_divisors(q)
    return [_point(q, minima, float(g)) for g in gammas]


def fit_power_law(gammas: Sequence[float], estimates: Sequence[float]) -> PowerLawFit:
    """Least-squares slope of log(estimate) against log(gamma)."""
    g = np.asarray(gammas, dtype=float)
    e = np.asarray(estimates, dtype=float)
    for gamma, value in zip(g, e):
        if not value > 0:
            raise EmptyResonanceSetError(float(gamma))
    fit = stats.linregress(np.log(g), np.log(e))
    beta, se = float(fit.slope), float(fit.stderr)
    return PowerLawFit(beta=beta, stderr=se, intercept=float(fit.intercept), ci=(beta - 2.0 * se, beta + 2.0 * se))


def fit_measure_exponent(q: ResonanceQuery, gammas: Sequence[float], order: Optional[int] = None) -> ResonanceEstimate:
    """Fit measure ~ C gamma^beta over the given gammas.

    order is the derivative order N of the non-degeneracy condition (default
    n - 1, at least 1); beta is compared with both 1/(N+1) and 1/N.
    """
    gammas = [float(g) for g in gammas]
    if len(gammas) < MIN_GAMMAS:
        raise MeasureError(f"need at least {MIN_GAMMAS} gamma values, got {len(gammas)}")
    if min(gammas) <= 0:
        raise MeasureError("gamma values must be positive")
    if log10(max(gammas) / min(gammas)) < MIN_DECADES:
        raise MeasureError(f"gamma values must span at least {MIN_DECADES:g} decades")
    points = resonance_curve(q, gammas)
    fit = fit_power_law([pt.gamma for pt in points], [pt.estimate for pt in points])
    N = max(order if order is not None else q.n - 1, 1)
    ordered = sorted(points, key=lambda pt: pt.gamma)
    verdicts = {
        "beta_ge_1_over_N_plus_1": bool(fit.beta >= 1.0 / (N + 1) - 2.0 * fit.stderr),
        "beta_ge_1_over_N": bool(fit.beta >= 1.0 / N - 2.0 * fit.stderr),
        "monotone": all(a.estimate <= b.estimate for a, b in zip(ordered, ordered[1:])),
    }
    notes = []
    if q.divisor_exponent != q.tau:
        notes.append(f"divisor exponent {q.divisor_exponent:g} differs from tau {q.tau:g}")
    if verdicts["beta_ge_1_over_N_plus_1"] != verdicts["beta_ge_1_over_N"]:
        notes.append("exponent verdicts against 1/(N+1) and 1/N disagree")
    estimate = ResonanceEstimate(points=points, beta=fit.beta, stderr=fit.stderr, ci=fit.ci,
                                 intercept=fit.intercept, order=N, samples=q.samples, verdicts=verdicts,
                                 notes=notes)
    logger.info("measure_exponent_fitted", beta=fit.beta, stderr=fit.stderr, N=N)
    return estimate
