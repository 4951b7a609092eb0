"""
Homological equation  {N, F} + R - [R] = 0  for an angle-free normal form N.

Writing grad N(I) = omega + g(I) with g of degree >= 1, each Fourier block of
F solves  i <k, omega + g(I)> F_k(I) = R_k(I)  and is built degree by degree:

    F_{k,d} = (R_{k,d} - i [<k, g> F_k^{<d}]_d) / (i <k, omega>)
"""

from dataclasses import dataclass
from math import inf
from typing import Dict, List, Optional, Tuple

import numpy as np
import structlog

from ..errors import DivisorFailure
from ..model import NormalForm
from ..series import (
    FourierMode,
    FourierTaylorSeries,
    average,
    degree_part,
    derivative,
    linear_combination,
    majorant_norm,
    mul,
    poisson,
    restrict,
)
from .params import StepParams

logger = structlog.get_logger(__name__)


@dataclass(frozen=True)
class GeneratingFunction:
    series: FourierTaylorSeries
    divisor_min: float
    modes: int
    norm_bound: float = 0.0

    def norm(self, r: float, s: float) -> float:
        return majorant_norm(self.series, r, s)

    def is_empty(self) -> bool:
        return self.series.is_empty()


def _k_weighted(gradient_rest: List[FourierTaylorSeries], k: Tuple[int, ...]) -> Optional[FourierTaylorSeries]:
    terms = [(float(ka), g) for ka, g in zip(k, gradient_rest) if ka != 0 and not g.is_empty()]
    return linear_combination(terms) if terms else None


def _solve_block(r_block: Dict[int, FourierTaylorSeries], weighted: Optional[FourierTaylorSeries],
                 divisor: complex, max_degree: int, n: int) -> Tuple[Dict, Dict]:
    """Degree-by-degree solution for one Fourier block (angle-free series in I)."""
    solved = FourierTaylorSeries.zero(n, floor=0.0)
    coeffs: Dict = {}
    mags: Dict = {}
    for d in range(max_degree + 1):
        terms = []
        if d in r_block:
            terms.append((1.0, r_block[d]))
        if weighted is not None and not solved.is_empty():
            coupling = degree_part(mul(weighted, solved), d, d)
            if not coupling.is_empty():
                terms.append((-1j, coupling))
        if not terms:
            continue
        numerator = linear_combination(terms)
        if numerator.is_empty():
            continue
        part = {}
        part_mags = {}
        for key, c in numerator.items():
            part[key] = c / divisor
            part_mags[key] = numerator.magnitude(*key) / abs(divisor)
        coeffs.update(part)
        mags.update(part_mags)
        solved = FourierTaylorSeries(n, coeffs, floor=0.0, mags=mags)
    return coeffs, mags


def solve_homological(nf: NormalForm, r_series: FourierTaylorSeries, p: StepParams) -> GeneratingFunction:
    """Generating function F with {N, F} + R - [R] = 0 on |k| <= K, |j| <= m-1.

    Raises DivisorFailure when some |<k, omega>| in R falls below eps_min*gamma/(2|k|^tau).
    """
    n = nf.n
    if r_series.dim != n:
        raise ValueError(f"perturbation has dimension {r_series.dim}, normal form {n}")
    order = p.fourier_order
    m = p.m_taylor
    if r_series.max_degree() > m - 1 or r_series.max_order() > order:
        raise ValueError(f"R must be truncated to |k| <= {order} and |j| <= {m - 1}")
    omega = nf.omega
    n_series = nf.as_series()
    gradient_rest = [degree_part(derivative(n_series, "I", a), 1) for a in range(n)]

    zero = (0,) * n
    raw_blocks: Dict[Tuple[int, ...], Dict[int, Tuple[Dict, Dict]]] = {}
    for (k, j), c in r_series.items():
        if not any(k):
            continue
        coeffs_d, mags_d = raw_blocks.setdefault(k, {}).setdefault(sum(j), ({}, {}))
        coeffs_d[(zero, j)] = c
        mags_d[(zero, j)] = r_series.magnitude(k, j)
    blocks = {
        k: {d: FourierTaylorSeries(n, c, floor=0.0, mags=mg) for d, (c, mg) in by_degree.items()}
        for k, by_degree in raw_blocks.items()
    }

    scale = p.scales.eps_min * p.gamma
    small = []
    divisor_min = inf
    for k in blocks:
        norm = sum(abs(x) for x in k)
        value = abs(float(np.dot(k, omega)))
        if value < scale / (2.0 * norm ** p.tau):
            small.append(k)
        elif value > 0:
            divisor_min = min(divisor_min, value * norm ** p.tau / scale)
    if small:
        reps = sorted({FourierMode(k).canonical().entries for k in small})
        raise DivisorFailure(reps)

    coeffs: Dict = {}
    mags: Dict = {}
    done = set()
    for k in sorted(blocks):
        if k in done:
            continue
        divisor = 1j * float(np.dot(k, omega))
        weighted = _k_weighted(gradient_rest, k)
        block_coeffs, block_mags = _solve_block(blocks[k], weighted, divisor, m - 1, n)
        for (_, jj), c in block_coeffs.items():
            coeffs[(k, jj)] = c
            mags[(k, jj)] = block_mags[((0,) * n, jj)]
        done.add(k)
        minus = tuple(-x for x in k)
        if r_series.real and minus in blocks:
            for (_, jj), c in block_coeffs.items():
                coeffs[(minus, jj)] = c.conjugate()
                mags[(minus, jj)] = block_mags[((0,) * n, jj)]
            done.add(minus)

    series = FourierTaylorSeries(n, coeffs, real=r_series.real, floor=0.0, mags=mags)
    logger.debug("homological_solved", modes=len(blocks), terms=len(series), divisor_min=divisor_min)
    norm_bound = majorant_norm(series, p.r, p.s - 2.0 * p.sigma)
    return GeneratingFunction(series=series, divisor_min=divisor_min, modes=len(blocks), norm_bound=norm_bound)


def homological_residual(nf: NormalForm, f: FourierTaylorSeries, r_series: FourierTaylorSeries,
                         K: float, m: int) -> FourierTaylorSeries:
    """{N, F} + R - [R] restricted to |k| <= K and |j| <= m-1 (empty when F solves the equation)."""
    order = int(np.floor(K))
    total = linear_combination([
        (1.0, poisson(nf.as_series(), f)),
        (1.0, r_series),
        (-1.0, average(r_series)),
    ])
    return restrict(total, lambda k, j: sum(abs(x) for x in k) <= order and sum(j) <= m - 1)
