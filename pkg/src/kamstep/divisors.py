"""
Small-divisor screening of the Fourier modes entering a step.
"""

import itertools
from dataclasses import dataclass, field
from math import comb, floor, inf
from typing import Any, Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
import structlog

from ..series import FourierMode
from .params import StepParams

logger = structlog.get_logger(__name__)

ENUMERATION_CAP = 200_000


@dataclass
class DivisorScreen:
    """Outcome of screening: flagged modes and the smallest scaled divisor among the rest."""
    resonant: List[Tuple[int, ...]] = field(default_factory=list)
    divisor_min: float = inf
    checked: int = 0
    exhaustive: bool = False

    @property
    def passed(self) -> bool:
        return not self.resonant

    def to_dict(self) -> Dict[str, Any]:
        return {
            "resonant": [list(k) for k in self.resonant],
            "divisor_min": self.divisor_min,
            "checked": self.checked,
            "exhaustive": self.exhaustive,
        }


def half_space_modes(n: int, k_max: int) -> List[Tuple[int, ...]]:
    """One representative of each pair {k, -k} with 0 < |k| <= k_max."""
    out = []
    for k in itertools.product(range(-k_max, k_max + 1), repeat=n):
        norm = sum(abs(x) for x in k)
        if 0 < norm <= k_max and FourierMode(k).canonical().entries == k:
            out.append(k)
    return out


def count_modes(n: int, k_max: int) -> int:
    """Number of nonzero k with |k| <= k_max (both signs)."""
    total = sum(comb(n, d) * comb(k_max, d) * 2 ** d for d in range(0, min(n, k_max) + 1))
    return total - 1


def _representatives(modes: Iterable[Sequence[int]], order: int) -> List[Tuple[int, ...]]:
    seen = set()
    for k in modes:
        k = tuple(int(x) for x in k)
        if not any(k) or sum(abs(x) for x in k) > order:
            continue
        seen.add(FourierMode(k).canonical().entries)
    return sorted(seen)


def screen_divisors(omega, p: StepParams, lipschitz: float,
                    modes: Optional[Iterable[Sequence[int]]] = None,
                    max_enumeration: int = ENUMERATION_CAP) -> DivisorScreen:
    """Flag modes whose divisor can drop below eps_min*gamma/(2|k|^tau) on the parameter window.

    A mode k is flagged when |<k, omega>| - K h lipschitz < eps_min gamma / (2 |k|^tau).
    Without a mode list every 0 < |k| <= K is screened, provided that fits under
    max_enumeration.
    """
    omega = np.asarray(omega, dtype=float)
    n = omega.shape[0]
    order = int(floor(p.K))
    exhaustive = modes is None
    if exhaustive:
        if count_modes(n, order) > max_enumeration:
            raise ValueError(
                f"exhaustive screening of |k| <= {order} in dimension {n} exceeds {max_enumeration} modes; "
                "pass the modes present in the truncated perturbation"
            )
        reps = half_space_modes(n, order)
    else:
        reps = _representatives(modes, order)

    screen = DivisorScreen(checked=len(reps), exhaustive=exhaustive)
    if not reps:
        return screen
    scale = p.scales.eps_min * p.gamma
    drift = p.K * p.h * lipschitz
    ks = np.array(reps, dtype=float)
    norms = np.abs(ks).sum(axis=1)
    divisors = np.abs(ks @ omega)
    thresholds = scale / (2.0 * norms ** p.tau)
    flagged = divisors - drift < thresholds
    screen.resonant = [reps[i] for i in np.flatnonzero(flagged)]
    clean = ~flagged
    if clean.any():
        screen.divisor_min = float(np.min(divisors[clean] * norms[clean] ** p.tau / scale))
    logger.debug("divisors_screened", checked=screen.checked, resonant=len(screen.resonant),
                 divisor_min=screen.divisor_min)
    return screen
