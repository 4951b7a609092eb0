"""
Convergence monitoring of a run from its per-step deviations.
"""

from dataclasses import dataclass, field
from math import inf
from typing import Any, Dict, List, Optional

import numpy as np
import structlog

logger = structlog.get_logger(__name__)

DEFAULT_TOL = 1e-12


@dataclass
class ConvergenceTrace:
    """Per-step measured errors and the weighted deviation surrogate."""
    nu: List[int] = field(default_factory=list)
    errors: List[float] = field(default_factory=list)
    new_errors: List[float] = field(default_factory=list)
    targets: List[float] = field(default_factory=list)
    deviations: List[float] = field(default_factory=list)
    contraction: List[float] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.deviations)

    def record(self, nu: int, error: float, new_error: float, target: Optional[float],
               deviation: float, contraction: float) -> None:
        self.nu.append(nu)
        self.errors.append(error)
        self.new_errors.append(new_error)
        self.targets.append(inf if target is None else target)
        self.deviations.append(deviation)
        self.contraction.append(contraction)

    def rows(self) -> List[Dict[str, Any]]:
        return [
            {
                "nu": nu,
                "error": e,
                "new_error": ne,
                "target": t,
                "deviation": d,
                "contraction_ratio": c,
            }
            for nu, e, ne, t, d, c in zip(self.nu, self.errors, self.new_errors, self.targets,
                                          self.deviations, self.contraction)
        ]

    def to_dict(self) -> Dict[str, Any]:
        return {"rows": self.rows()}


def step_deviation(epsilon: float, error: float, gamma: float, r: float, sigma: float, h: float,
                   tau: float) -> float:
    """max(epsilon / (gamma r sigma^{tau+1}), error / (r h))."""
    if epsilon == 0 and error == 0:
        return 0.0
    return max(epsilon / (gamma * r * sigma ** (tau + 1)), error / (r * h))


@dataclass(frozen=True)
class ConvergenceSummary:
    deviations: List[float]
    partial_sums: List[float]
    product_bound: float
    ratio: float
    tail_estimate: float
    cauchy: bool
    tol: float

    def to_dict(self) -> Dict[str, Any]:
        return {
            "deviations": self.deviations,
            "partial_sums": self.partial_sums,
            "product_bound": self.product_bound,
            "ratio": self.ratio,
            "tail_estimate": self.tail_estimate,
            "cauchy": self.cauchy,
            "tol": self.tol,
        }


def _max_ratio(values: np.ndarray) -> float:
    worst = 0.0
    for prev, cur in zip(values[:-1], values[1:]):
        if prev == 0:
            if cur > 0:
                return inf
            continue
        worst = max(worst, cur / prev)
    return worst


def convergence_report(trace: ConvergenceTrace, tol: float = DEFAULT_TOL, c1: float = 1.0) -> ConvergenceSummary:
    """Partial sums, product bound and a Cauchy verdict for the deviation sequence.

    The verdict estimates the unseen tail geometrically from the largest
    successive ratio q: tail = d_last q / (1 - q), and requires q < 1 and tail <= tol.
    """
    if not len(trace):
        raise ValueError("convergence_report needs a nonempty trace")
    d = np.asarray(trace.deviations, dtype=float)
    partial = np.cumsum(d)
    product = float(np.prod(1.0 + c1 * d))
    if not d.any():
        ratio, tail, cauchy = 0.0, 0.0, True
    elif d.size == 1:
        ratio, tail = inf, float(d[0])
        cauchy = bool(d[0] <= tol)
    else:
        ratio = _max_ratio(d)
        if ratio < 1.0:
            tail = float(d[-1] * ratio / (1.0 - ratio))
            cauchy = bool(tail <= tol)
        else:
            tail, cauchy = inf, False
    summary = ConvergenceSummary(
        deviations=d.tolist(),
        partial_sums=partial.tolist(),
        product_bound=product,
        ratio=float(ratio),
        tail_estimate=float(tail),
        cauchy=cauchy,
        tol=tol,
    )
    logger.info("convergence_summarized", steps=int(d.size), ratio=summary.ratio, cauchy=cauchy)
    return summary
