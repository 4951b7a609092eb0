"""
Built-in six-degree-of-freedom co-orbital example.

Integrable parts I_1^2, ..., I_6^2 with scales (1, eps^2, eps^a, eps^3, eps^(a+1), eps^4)
and a perturbation of size eps^(a+2):

    H = I_1^2 + eps^2 I_2^2 + eps^a I_3^2 + eps^3 I_4^2 + eps^(a+1) I_5^2 + eps^4 I_6^2
        + eps^(a+2) (cos(theta_1 + theta_2) + mean_field * sum_i I_i)
"""

from typing import Tuple

import structlog

from ..errors import ModelError
from ..model import HamiltonianSpec, ScaleSet
from ..series import FourierTaylorSeries

logger = structlog.get_logger(__name__)

N_COORBITAL = 6


def coorbital_exponents(a: float) -> Tuple[float, ...]:
    return (0.0, 2.0, a, 3.0, a + 1.0, 4.0)


def coorbital_scales(epsilon: float, a: float) -> ScaleSet:
    epsilons = tuple(epsilon ** p for p in coorbital_exponents(a))
    eps_min = min(epsilons)
    return ScaleSet(epsilons, epsilon_ratio=epsilon ** (a + 2.0) / eps_min)


def coorbital_perturbation(mean_field: float = 0.0) -> FourierTaylorSeries:
    n = N_COORBITAL
    zero = (0,) * n
    plus = (1, 1, 0, 0, 0, 0)
    minus = (-1, -1, 0, 0, 0, 0)
    coeffs = {(plus, zero): 0.5, (minus, zero): 0.5}
    if mean_field:
        for i in range(n):
            j = tuple(1 if a == i else 0 for a in range(n))
            coeffs[(zero, j)] = mean_field
    return FourierTaylorSeries(n, coeffs, real=True)


def example_coorbital(epsilon: float, a: float, mean_field: float = 0.0,
                      perturbed: bool = True, m_taylor: int = 4) -> HamiltonianSpec:
    """Six-scale quadratic spec with an optional eps^(a+2) angle-dependent perturbation."""
    if not 0.0 < epsilon < 1.0:
        raise ModelError(f"epsilon must lie in (0, 1), got {epsilon!r}")
    if not a > 2.0:
        raise ModelError(f"a must be > 2, got {a!r}")
    n = N_COORBITAL
    zero = (0,) * n
    parts = []
    for i in range(n):
        j = tuple(2 if b == i else 0 for b in range(n))
        parts.append(FourierTaylorSeries(n, {(zero, j): 1.0}, real=True, floor=0.0))
    perturbation = coorbital_perturbation(mean_field) if perturbed else FourierTaylorSeries.zero(n, real=True)
    scales = coorbital_scales(epsilon, a)
    logger.debug("coorbital_example_built", epsilon=epsilon, a=a, ordered=scales.is_ordered())
    return HamiltonianSpec(n=n, integrable_parts=tuple(parts), perturbation=perturbation,
                           scales=scales, m_taylor=m_taylor)


def hessian_identity(epsilon: float, a: float) -> float:
    """Closed form of det A for the example: 64 eps^(10 + 2a)."""
    return 64.0 * epsilon ** (10.0 + 2.0 * a)


def bordered_identity(epsilon: float, a: float, actions) -> float:
    """Closed form of the bordered determinant at absolute actions I."""
    weights = [epsilon ** p for p in coorbital_exponents(a)]
    return -128.0 * epsilon ** (10.0 + 2.0 * a) * sum(w * x * x for w, x in zip(weights, actions))
