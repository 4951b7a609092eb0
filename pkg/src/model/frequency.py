"""
Polynomial frequency maps xi -> omega(xi) = grad_I sum_i eps_i H_i at I = xi.
"""

import itertools
from typing import Dict, List, Sequence, Tuple

import numpy as np

from ..errors import ModelError
from ..series import FourierTaylorSeries, derivative, evaluate, linear_combination, majorant_norm, translate
from .hamiltonian import HamiltonianSpec


def multi_indices(n: int, max_order: int) -> List[Tuple[int, ...]]:
    """All alpha in N^n with |alpha| <= max_order, graded then lexicographic (descending)."""
    out = []
    for order in range(max_order + 1):
        for alpha in itertools.product(range(order, -1, -1), repeat=n):
            if sum(alpha) == order:
                out.append(alpha)
    return out


class FrequencyField:
    """Frequency map given by n angle-free polynomial series in the actions."""

    def __init__(self, components: Sequence[FourierTaylorSeries]):
        components = tuple(components)
        if not components:
            raise ModelError("frequency field needs at least one component")
        n = components[0].dim
        if len(components) != n:
            raise ModelError(f"frequency field has {len(components)} components in dimension {n}")
        for comp in components:
            if comp.dim != n or any(any(k) for k in comp.modes()):
                raise ModelError("frequency components must be angle-free series in the same dimension")
        self.components = tuple(c.with_options(floor=0.0) for c in components)
        self._derivatives: Dict[Tuple[int, ...], Tuple[FourierTaylorSeries, ...]] = {}

    @classmethod
    def from_spec(cls, spec: HamiltonianSpec) -> "FrequencyField":
        total = spec.integrable_series().with_options(floor=0.0)
        return cls([derivative(total, "I", a) for a in range(spec.n)])

    @classmethod
    def from_parts(cls, parts: Sequence[FourierTaylorSeries], epsilons: Sequence[float]) -> "FrequencyField":
        total = linear_combination([(e, p) for e, p in zip(epsilons, parts)]).with_options(floor=0.0)
        return cls([derivative(total, "I", a) for a in range(total.dim)])

    @property
    def n(self) -> int:
        return len(self.components)

    def __call__(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        values = np.array([evaluate(c, xi).real for c in self.components])
        return values.T

    def partial(self, alpha: Tuple[int, ...]) -> Tuple[FourierTaylorSeries, ...]:
        """Components of d^alpha omega as series (cached)."""
        alpha = tuple(alpha)
        if alpha not in self._derivatives:
            comps = []
            for comp in self.components:
                for index, power in enumerate(alpha):
                    for _ in range(power):
                        comp = derivative(comp, "I", index)
                comps.append(comp)
            self._derivatives[alpha] = tuple(comps)
        return self._derivatives[alpha]

    def jacobian(self, xi) -> np.ndarray:
        xi = np.asarray(xi, dtype=float)
        J = np.zeros((self.n, self.n))
        for b in range(self.n):
            alpha = tuple(1 if i == b else 0 for i in range(self.n))
            J[:, b] = [evaluate(c, xi).real for c in self.partial(alpha)]
        return J

    def derivative_stack(self, xi, order: int) -> np.ndarray:
        """n x N matrix whose columns are d^alpha omega(xi) for |alpha| <= order.

        A 2-d `xi` (one point per row) gives a (points, n, N) array.
        """
        xi = np.asarray(xi, dtype=float)
        points = np.atleast_2d(xi)
        alphas = multi_indices(self.n, order)
        stack = np.zeros((len(points), self.n, len(alphas)))
        for col, alpha in enumerate(alphas):
            for a, comp in enumerate(self.partial(alpha)):
                stack[:, a, col] = evaluate(comp, points).real
        return stack[0] if xi.ndim == 1 else stack

    def lipschitz_bound(self, center, radius: float) -> float:
        """Operator-norm bound (max row sum of majorants) of d omega over the ball |xi - center| < radius."""
        center = np.asarray(center, dtype=float)
        bound = 0.0
        for a in range(self.n):
            row = 0.0
            for b in range(self.n):
                alpha = tuple(1 if i == b else 0 for i in range(self.n))
                shifted = translate(self.partial(alpha)[a], center)
                row += majorant_norm(shifted, radius, 1.0)
            bound = max(bound, row)
        return bound
