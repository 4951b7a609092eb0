"""
Action shifts that undo the frequency drift of a step.

frequency_correction keeps n1 selected components of omega fixed;
isoenergetic_correction keeps the ratios of n1 components fixed on the
energy surface of the previous normal form.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg
import structlog

from ..conditions import graded
from ..conditions.checks import best_submatrix, bordered_matrix
from ..errors import CorrectionFailure
from ..model import NormalForm
from ..series import FourierTaylorSeries, degree_part, evaluate

logger = structlog.get_logger(__name__)

_TINY = np.finfo(float).tiny


@dataclass
class FrequencyCorrection:
    shift: np.ndarray
    nf: NormalForm
    rows: Tuple[int, ...]
    cols: Tuple[int, ...]
    iterations: int
    residual_other: np.ndarray
    predicted_other: np.ndarray
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shift": self.shift.tolist(),
            "rows": list(self.rows),
            "cols": list(self.cols),
            "iterations": self.iterations,
            "residual_other": self.residual_other.tolist(),
            "predicted_other": self.predicted_other.tolist(),
            **self.details,
        }


@dataclass
class IsoenergeticCorrection:
    shift: np.ndarray
    t: float
    nf: NormalForm
    rows: Tuple[int, ...]
    cols: Tuple[int, ...]
    iterations: int
    energy_residual: float
    ratio_error: float
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "shift": self.shift.tolist(),
            "t": self.t,
            "rows": list(self.rows),
            "cols": list(self.cols),
            "iterations": self.iterations,
            "energy_residual": self.energy_residual,
            "ratio_error": self.ratio_error,
            **self.details,
        }


def select_block(A: np.ndarray, n1: int, rows: Optional[Sequence[int]] = None,
                 cols: Optional[Sequence[int]] = None) -> Tuple[Tuple[int, ...], Tuple[int, ...]]:
    """Index sets of a nonsingular n1 x n1 block of A, keeping any that are supplied."""
    n = A.shape[0]
    if not 1 <= n1 <= n:
        raise CorrectionFailure(f"n1 must lie in [1, {n}], got {n1}")
    if rows is not None and cols is not None:
        return tuple(int(i) for i in rows), tuple(int(j) for j in cols)
    if rows is not None:
        rows = tuple(int(i) for i in rows)
        if len(rows) != n1:
            raise CorrectionFailure(f"expected {n1} preserved rows, got {len(rows)}")
        return rows, _pivot_columns(A[list(rows), :], n1)
    _, r_idx, c_idx, _ = best_submatrix(A, n1)
    return tuple(r_idx), tuple(c_idx)


def _pivot_columns(sub: np.ndarray, count: int) -> Tuple[int, ...]:
    B, _, _ = graded.equilibrate(sub)
    _, _, piv = scipy.linalg.qr(B, pivoting=True, mode="economic")
    return tuple(sorted(int(j) for j in piv[:count]))


def dependent_rows(A: np.ndarray, rows: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Least-squares D1 with A[other] = D1 A[rows]; returns (other indices, D1)."""
    n = A.shape[0]
    other = np.array([i for i in range(n) if i not in set(rows)], dtype=int)
    if other.size == 0:
        return other, np.zeros((0, len(rows)))
    D1 = np.linalg.lstsq(A[list(rows)].T, A[other].T, rcond=None)[0].T
    return other, D1


def _component_scale(target: np.ndarray, A: np.ndarray, x: np.ndarray) -> np.ndarray:
    return np.maximum(np.maximum(np.abs(target), np.abs(A) @ np.abs(x)), _TINY)


def frequency_correction(nf_plus: NormalForm, p01, n1: int, preserved_rows: Optional[Sequence[int]] = None,
                         cols: Optional[Sequence[int]] = None, *, omega_reference=None, r: Optional[float] = None,
                         epsilon_ratio: Optional[float] = None, tol: float = 1e-14,
                         max_iter: int = 20) -> FrequencyCorrection:
    """Shift the actions so that omega keeps its pre-step value on n1 rows.

    p01 is the normalized frequency drift (omega_plus - omega) / eps_pert.
    The target on the preserved rows is omega_reference when given, otherwise
    omega_plus - eps_pert * p01. A chord iteration with the block A[rows, cols]
    absorbs terms of N beyond quadratic order.
    """
    p01 = np.asarray(p01, dtype=float)
    n = nf_plus.n
    eps = nf_plus.scales.eps_pert
    A = nf_plus.A
    omega_plus = nf_plus.omega
    target = omega_plus - eps * p01 if omega_reference is None else np.asarray(omega_reference, dtype=float)
    rows, cols = select_block(A, n1, preserved_rows, cols)
    other, D1 = dependent_rows(A, rows)
    predicted = p01[other] - D1 @ p01[list(rows)] if other.size else np.zeros(0)

    if not p01.any():
        return FrequencyCorrection(np.zeros(n), nf_plus, rows, cols, 0, np.zeros(other.size), predicted,
                                   {"shift_norm": 0.0})

    block = A[np.ix_(rows, cols)]
    if graded.smallest_singular_value(block) == 0.0:
        raise CorrectionFailure(f"block rows={list(rows)} cols={list(cols)} of A is singular",
                                {"rows": list(rows), "cols": list(cols)})
    gradient = nf_plus.gradient_series()
    x = np.zeros(n)
    iterations = 0
    for iterations in range(1, max_iter + 1):
        current = np.array([evaluate(g, x).real for g in gradient])
        residual = current[list(rows)] - target[list(rows)]
        scale = _component_scale(target[list(rows)], A[list(rows)], x)
        if np.all(np.abs(residual) <= tol * scale):
            break
        x[list(cols)] -= graded.solve(block, residual)
        if r is not None and np.max(np.abs(x)) > r / 2.0:
            raise CorrectionFailure(f"action shift {np.max(np.abs(x)):.3g} leaves the window r/2 = {r / 2.0:.3g}",
                                    {"shift": x.tolist()})
    else:
        raise CorrectionFailure(f"frequency correction did not converge in {max_iter} iterations",
                                {"shift": x.tolist()})

    corrected = nf_plus.translate(x)
    residual_other = (corrected.omega[other] - target[other]) / eps if other.size else np.zeros(0)
    shift_norm = float(np.max(np.abs(x)))
    details = {"shift_norm": shift_norm}
    if r is not None:
        details["shift_over_eps_per_r"] = shift_norm * r / eps
        if epsilon_ratio:
            details["shift_over_ratio_per_r"] = shift_norm * r / epsilon_ratio
    logger.debug("frequency_corrected", rows=list(rows), cols=list(cols), shift_norm=shift_norm,
                 iterations=iterations)
    return FrequencyCorrection(x, corrected, rows, cols, iterations, residual_other, predicted, details)


def isoenergetic_correction(nf_plus: NormalForm, p01, r_avg: FourierTaylorSeries, n1: int,
                            tol: float = 1e-12, max_iter: int = 50, *, rows: Optional[Sequence[int]] = None,
                            cols: Optional[Sequence[int]] = None,
                            energy_reference: Optional[NormalForm] = None, r: Optional[float] = None,
                            linear: bool = False) -> IsoenergeticCorrection:
    """Shift the actions and rescale time so that n1 frequency ratios and the energy stay fixed.

    Unknowns (I on the chosen columns, t) solve

        grad N_+(I)[rows] = (1 - t) omega[rows],   N_+(I) = e

    where omega and e belong to the pre-step normal form (energy_reference, or
    nf_plus with [R] removed). The bordered matrix ((A, omega), (omega^T, 0))
    is solved once per sweep with the nonlinear part frozen at the previous
    iterate. With linear=True the quadratic term and [R] are dropped and a
    single solve is made.
    """
    p01 = np.asarray(p01, dtype=float)
    n = nf_plus.n
    eps = nf_plus.scales.eps_pert
    zero = (0,) * n
    A = nf_plus.A
    omega_plus = nf_plus.omega
    if energy_reference is not None:
        omega_prev = energy_reference.omega
        constant = energy_reference.drift_constant()
    else:
        omega_prev = omega_plus - eps * p01
        shift0 = r_avg.coefficient(zero, zero).real
        constant = nf_plus.drift_constant() - shift0

    if rows is None or cols is None:
        _, r_idx, c_idx, _ = best_submatrix(bordered_matrix(A, omega_prev), n1, border=n)
        rows, cols = r_idx[:-1], c_idx[:-1]
    rows, cols = tuple(int(i) for i in rows), tuple(int(j) for j in cols)
    if len(rows) != n1 or len(cols) != n1:
        raise CorrectionFailure(f"expected {n1} rows and columns, got {len(rows)} and {len(cols)}")
    M = np.zeros((n1 + 1, n1 + 1))
    M[:n1, :n1] = A[np.ix_(rows, cols)]
    M[:n1, n1] = omega_prev[list(rows)]
    M[n1, :n1] = omega_plus[list(cols)]
    if graded.smallest_singular_value(M) == 0.0:
        raise CorrectionFailure("bordered block is singular", {"rows": list(rows), "cols": list(cols)})

    gradient = nf_plus.gradient_series()
    variable = degree_part(nf_plus.as_series(), 1)
    energy_shift = r_avg.coefficient(zero, zero).real
    freq_scale = np.maximum(np.abs(omega_prev[list(rows)]), _TINY)

    def residual(x: np.ndarray, t: float) -> np.ndarray:
        # energy row: e_+ - e plus the non-constant part of N_+ at x, free of cancellation against e
        if linear:
            freq = omega_plus + A @ x
            level = float(omega_plus @ x)
        else:
            freq = np.array([evaluate(g, x).real for g in gradient])
            level = energy_shift + evaluate(variable, x).real
        return np.append(freq[list(rows)] - (1.0 - t) * omega_prev[list(rows)], level)

    def settled(res: np.ndarray, x: np.ndarray) -> bool:
        level_scale = max(abs(energy_shift) + float(np.abs(omega_plus) @ np.abs(x)), _TINY)
        return bool(np.all(np.abs(res[:n1]) <= tol * freq_scale) and abs(res[n1]) <= tol * level_scale)

    x = np.zeros(n)
    t = 0.0
    iterations = 0
    res = residual(x, t)
    while not settled(res, x):
        if iterations >= (1 if linear else max_iter):
            break
        step = graded.solve(M, res)
        x[list(cols)] -= step[:n1]
        t -= step[n1]
        iterations += 1
        if r is not None and np.max(np.abs(x)) > r / 2.0:
            raise CorrectionFailure(
                f"iso-energetic iterate {np.max(np.abs(x)):.3g} leaves the window r/2 = {r / 2.0:.3g}",
                {"iterations": iterations, "t": t},
            )
        res = residual(x, t)
    if not linear and not settled(res, x):
        raise CorrectionFailure(f"iso-energetic fixed point did not settle in {max_iter} iterations",
                                {"t": t, "shift": x.tolist()})

    moved = nf_plus.translate(x)
    energy_residual = float(res[n1])
    corrected = moved.set_drift_constant(constant)
    ratio_error = _ratio_error(corrected.omega, omega_prev, rows)
    logger.debug("isoenergetic_corrected", t=t, iterations=iterations, energy_residual=energy_residual,
                 ratio_error=ratio_error)
    return IsoenergeticCorrection(
        shift=x, t=float(t), nf=corrected, rows=rows, cols=cols, iterations=iterations,
        energy_residual=float(energy_residual), ratio_error=ratio_error,
        details={"C": abs(t) / eps, "shift_norm": float(np.max(np.abs(x)))},
    )


def _ratio_error(omega: np.ndarray, omega_prev: np.ndarray, rows: Sequence[int]) -> float:
    rows = list(rows)
    pivot = rows[int(np.argmax(np.abs(omega_prev[rows])))]
    if omega_prev[pivot] == 0 or omega[pivot] == 0:
        return 0.0
    before = omega_prev[rows] / omega_prev[pivot]
    after = omega[rows] / omega[pivot]
    scale = np.maximum(np.abs(before), _TINY)
    return float(np.max(np.abs(after - before) / scale))
