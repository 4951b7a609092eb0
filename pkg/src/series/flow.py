"""
Lie series and time-one maps of generating functions.

With the bracket convention {f, g} = f_theta g_I - f_I g_theta, the flow of a
generating function F is  theta' = F_I,  I' = -F_theta,  and composition with
its time-one map is  h o phi = sum_l ad_F^l(h) / l!  where ad_F(h) = {h, F}.
"""

from dataclasses import dataclass
from math import factorial
from typing import List, Sequence, Tuple

import numpy as np

from ..errors import DimensionMismatchError
from .fourier_taylor import (
    FourierTaylorSeries,
    derivative,
    evaluate,
    linear_combination,
    majorant_norm,
    poisson,
)


@dataclass(frozen=True)
class LieSeries:
    """Terms ad_F^l(h) for l = 0..order, their sum and the first dropped bracket."""
    order: int
    terms: Tuple[FourierTaylorSeries, ...]
    series: FourierTaylorSeries
    next_bracket: FourierTaylorSeries

    def remainder_norm(self, r: float, s: float) -> float:
        """Majorant of the first dropped term ad_F^{L+1}(h) / (L+1)!."""
        return majorant_norm(self.next_bracket, r, s) / factorial(self.order + 1)


def lie_series(h: FourierTaylorSeries, f: FourierTaylorSeries, order: int = 4) -> LieSeries:
    if order < 1:
        raise ValueError(f"Lie order must be >= 1, got {order}")
    if h.dim != f.dim:
        raise DimensionMismatchError(h.dim, f.dim)
    terms = [h]
    for _ in range(order):
        terms.append(poisson(terms[-1], f))
    next_bracket = poisson(terms[-1], f)
    total = linear_combination([(1.0 / factorial(l), t) for l, t in enumerate(terms)])
    total = total.with_options(taylor_cutoff=h.taylor_cutoff, fourier_cutoff=h.fourier_cutoff)
    return LieSeries(order=order, terms=tuple(terms), series=total, next_bracket=next_bracket)


def lie_transform(h: FourierTaylorSeries, f: FourierTaylorSeries, order: int = 4) -> FourierTaylorSeries:
    """Order-L Lie series  sum_{l<=L} ad_F^l(h) / l!, truncated to h's cutoffs."""
    return lie_series(h, f, order).series


def _shift_series(seed: FourierTaylorSeries, f: FourierTaylorSeries, order: int):
    # displacement = sum_{l=1..L} ad^{l-1}(seed) / l!, remainder = ad^L(seed) / (L+1)!
    iterates = [seed]
    for _ in range(order):
        iterates.append(poisson(iterates[-1], f))
    shift = linear_combination([(1.0 / factorial(l + 1), t) for l, t in enumerate(iterates[:-1])])
    remainder = linear_combination([(1.0 / factorial(order + 1), iterates[-1])])
    return shift, remainder


def _derivative_table(components: Sequence[FourierTaylorSeries]):
    table = []
    for comp in components:
        row_theta = [derivative(comp, "theta", b) for b in range(comp.dim)]
        row_action = [derivative(comp, "I", b) for b in range(comp.dim)]
        table.append((row_theta, row_action))
    return table


class TimeOneMap:
    """Degree-truncated time-one map (U, V) of a generating function F.

    U_a = I_a + action_shift[a],  V_a = theta_a + angle_shift[a].
    """

    def __init__(self, f: FourierTaylorSeries, order: int = 4):
        if order < 1:
            raise ValueError(f"Lie order must be >= 1, got {order}")
        self.dim = f.dim
        self.order = order
        action, angle, action_rem, angle_rem = [], [], [], []
        for a in range(f.dim):
            shift, rem = _shift_series(-derivative(f, "theta", a), f, order)
            action.append(shift)
            action_rem.append(rem)
            shift, rem = _shift_series(derivative(f, "I", a), f, order)
            angle.append(shift)
            angle_rem.append(rem)
        self.action_shift: Tuple[FourierTaylorSeries, ...] = tuple(action)
        self.angle_shift: Tuple[FourierTaylorSeries, ...] = tuple(angle)
        self.action_remainder: Tuple[FourierTaylorSeries, ...] = tuple(action_rem)
        self.angle_remainder: Tuple[FourierTaylorSeries, ...] = tuple(angle_rem)
        self._action_table = _derivative_table(self.action_shift)
        self._angle_table = _derivative_table(self.angle_shift)

    def jacobian(self, actions, angles) -> np.ndarray:
        """Real 2n x 2n Jacobian at (I, theta), coordinates ordered (theta, I)."""
        n = self.dim
        M = np.eye(2 * n)
        for a in range(n):
            d_theta, d_action = self._angle_table[a]
            for b in range(n):
                M[a, b] += evaluate(d_theta[b], actions, angles).real
                M[a, n + b] += evaluate(d_action[b], actions, angles).real
            d_theta, d_action = self._action_table[a]
            for b in range(n):
                M[n + a, b] += evaluate(d_theta[b], actions, angles).real
                M[n + a, n + b] += evaluate(d_action[b], actions, angles).real
        return M

    def symplectic_defect(self, actions, angles) -> float:
        """Spectral norm of M^T J M - J."""
        n = self.dim
        J = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
        M = self.jacobian(actions, angles)
        return float(np.linalg.norm(M.T @ J @ M - J, 2))

    def remainder_norm(self, r: float, s: float) -> float:
        """Sum of majorants of all first derivatives of the first dropped term."""
        total = 0.0
        for comp in list(self.action_remainder) + list(self.angle_remainder):
            for b in range(self.dim):
                total += majorant_norm(derivative(comp, "theta", b), r, s)
                total += majorant_norm(derivative(comp, "I", b), r, s)
        return total

    def displacement_norms(self, r: float, s: float) -> Tuple[float, float]:
        """(max_a |U_a - I_a|, max_a |V_a - theta_a|) as majorants."""
        u = max((majorant_norm(c, r, s) for c in self.action_shift), default=0.0)
        v = max((majorant_norm(c, r, s) for c in self.angle_shift), default=0.0)
        return u, v

    def derivative_norm(self, component: str, variable: str, r: float, s: float) -> float:
        """Row-sum majorant of d(shift)/d(variable) for the U or V component."""
        table = self._action_table if component == "U" else self._angle_table
        pick = 0 if variable == "theta" else 1
        rows: List[float] = []
        for entry in table:
            rows.append(sum(majorant_norm(d, r, s) for d in entry[pick]))
        return max(rows, default=0.0)


def time_one_map(f: FourierTaylorSeries, order: int = 4) -> TimeOneMap:
    return TimeOneMap(f, order)
