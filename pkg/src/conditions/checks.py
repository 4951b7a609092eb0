"""
Non-degeneracy checks on frequency maps and normal forms.

(R)  rank of the derivative stack {d^alpha omega, |alpha| <= order} is n
(K)  some n1 x n1 submatrix of the Hessian A has sigma_min >= sqrt(c) * eps_min
(I)  the same for (n1+1) x (n1+1) submatrices of ((A, omega), (omega^T, 0))
     that contain the border row and column

The primed variants evaluate the same quantities over a grid of base points
and merge the per-point reports by minimum margin.
"""

import itertools
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import structlog

from ..errors import ConditionError
from ..model import FrequencyField, NormalForm, hessian_from_series, multi_indices
from ..series import translate
from . import graded

logger = structlog.get_logger(__name__)

EXHAUSTIVE_LIMIT = 10
DEFAULT_RELATIVE_SVD_TOL = 1e-10


@dataclass
class ConditionReport:
    condition_id: str
    passed: bool
    margin: float
    threshold: float
    witness: Dict[str, Any] = field(default_factory=dict)
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "condition_id": self.condition_id,
            "pass": bool(self.passed),
            "margin": float(self.margin),
            "witness": self.witness,
            "threshold": float(self.threshold),
            "details": self.details,
        }


@dataclass
class DerivativeStack:
    base_points: np.ndarray
    alphas: List[Tuple[int, ...]]
    matrices: np.ndarray
    singular_values: np.ndarray

    @property
    def column_count(self) -> int:
        return len(self.alphas)


def merge_reports(reports: Sequence[ConditionReport], condition_id: Optional[str] = None) -> ConditionReport:
    """Combine per-sample reports: pass iff all pass, margin and witness of the worst sample."""
    if not reports:
        raise ConditionError("cannot merge an empty list of reports")
    worst = min(reports, key=lambda rep: rep.margin)
    return ConditionReport(
        condition_id=condition_id or worst.condition_id,
        passed=all(rep.passed for rep in reports),
        margin=worst.margin,
        threshold=worst.threshold,
        witness=dict(worst.witness),
        details={**worst.details, "samples": len(reports)},
    )


def _as_grid(grid, n: int) -> np.ndarray:
    points = np.atleast_2d(np.asarray(grid, dtype=float))
    if points.size == 0:
        raise ConditionError("grid is empty")
    if points.shape[1] != n:
        raise ConditionError(f"grid points must have {n} coordinates, got {points.shape[1]}")
    return points


def build_derivative_stack(freq: FrequencyField, grid, order: Optional[int] = None,
                           equilibrate: bool = False) -> DerivativeStack:
    points = _as_grid(grid, freq.n)
    order = freq.n - 1 if order is None else int(order)
    alphas = multi_indices(freq.n, order)
    matrices = freq.derivative_stack(points, order)
    singular = np.zeros((len(points), freq.n))
    for p in range(len(points)):
        stack = matrices[p]
        if equilibrate:
            row_max = np.abs(stack).max(axis=1)
            exps = np.where(row_max > 0, -np.ceil(np.log2(np.where(row_max > 0, row_max, 1.0))), 0).astype(int)
            stack = np.ldexp(stack, exps[:, None])
        matrices[p] = stack
        singular[p] = np.linalg.svd(stack, compute_uv=False)[: freq.n]
    return DerivativeStack(points, alphas, matrices, singular)


def check_R(freq, grid, svd_tol: Optional[float] = None, order: Optional[int] = None,
            equilibrate: bool = False, primed: bool = False) -> ConditionReport:
    """Rank condition on the derivative stack of a polynomial frequency map."""
    if not isinstance(freq, FrequencyField):
        raise ConditionError("check_R needs a polynomial frequency field")
    stack = build_derivative_stack(freq, grid, order, equilibrate)
    margins, tols = [], []
    for sv in stack.singular_values:
        tol = svd_tol if svd_tol is not None else DEFAULT_RELATIVE_SVD_TOL * sv[0]
        tol = tol if tol > 0 else np.finfo(float).tiny
        tols.append(tol)
        margins.append(sv[-1] / tol)
    worst = int(np.argmin(margins))
    order_used = freq.n - 1 if order is None else int(order)
    report = ConditionReport(
        condition_id="R'" if primed else "R",
        passed=bool(min(margins) >= 1.0),
        margin=float(min(margins)),
        threshold=float(tols[worst]),
        witness={
            "point": stack.base_points[worst].tolist(),
            "index": worst,
            "rank": int(np.sum(stack.singular_values[worst] > tols[worst])),
        },
        details={
            "order": order_used,
            "columns": stack.column_count,
            "svd_tol": svd_tol,
            "relative_tol": svd_tol is None,
            "equilibrated": equilibrate,
            "smallest_singular_value": float(stack.singular_values[worst][-1]),
            "samples": len(stack.base_points),
        },
    )
    logger.info("condition_checked", condition=report.condition_id, passed=report.passed,
                margin=report.margin, samples=len(stack.base_points))
    return report


def _greedy_indices(M: np.ndarray, count: int, candidates: Sequence[int], axis: int) -> Tuple[int, ...]:
    # column-pivoted QR on the candidate columns (axis=1) or rows (axis=0)
    sub = M[:, candidates] if axis == 1 else M[candidates, :].T
    B, _, _ = graded.equilibrate(sub)
    _, _, piv = scipy.linalg.qr(B, pivoting=True, mode="economic")
    return tuple(sorted(candidates[i] for i in piv[:count]))


def best_submatrix(M: np.ndarray, size: int, border: Optional[int] = None):
    """Maximize sigma_min over size x size submatrices (plus the border index if given).

    Returns (sigma_min, rows, cols, exhaustive). Ties keep the lexicographically
    first (rows, cols).
    """
    n_rows, n_cols = M.shape
    free_rows = [i for i in range(n_rows) if i != border]
    free_cols = [j for j in range(n_cols) if j != border]
    extra = () if border is None else (border,)
    if max(len(free_rows), len(free_cols)) <= EXHAUSTIVE_LIMIT:
        best = (-1.0, None, None)
        for rows in itertools.combinations(free_rows, size):
            for cols in itertools.combinations(free_cols, size):
                r_idx, c_idx = rows + extra, cols + extra
                sigma = graded.smallest_singular_value(M[np.ix_(r_idx, c_idx)])
                if sigma > best[0]:
                    best = (sigma, r_idx, c_idx)
        return best[0], best[1], best[2], True
    cols = _greedy_indices(M, size, free_cols, axis=1)
    rows = _greedy_indices(M[:, list(cols)], size, free_rows, axis=0)
    r_idx, c_idx = rows + extra, cols + extra
    return graded.smallest_singular_value(M[np.ix_(r_idx, c_idx)]), r_idx, c_idx, False


def _submatrix_report(condition_id: str, M: np.ndarray, n1: int, c: float, eps_min: float,
                      border: Optional[int]) -> ConditionReport:
    n = M.shape[0] - (1 if border is not None else 0)
    if not 1 <= n1 <= n:
        raise ConditionError(f"n1 must lie in [1, {n}], got {n1}")
    if not c > 0:
        raise ConditionError(f"condition constant c must be > 0, got {c!r}")
    sigma, rows, cols, exhaustive = best_submatrix(M, n1, border)
    threshold = c * eps_min ** 2
    margin = sigma / np.sqrt(threshold)
    return ConditionReport(
        condition_id=condition_id,
        passed=bool(margin >= 1.0),
        margin=float(margin),
        threshold=float(threshold),
        witness={"rows": [int(i) for i in rows], "cols": [int(j) for j in cols]},
        details={"sigma_min": float(sigma), "n1": n1, "c": c, "exhaustive": exhaustive},
    )


def _hessian_and_eps(nf_or_matrix: Union[NormalForm, np.ndarray], eps_min: Optional[float]):
    if isinstance(nf_or_matrix, NormalForm):
        return nf_or_matrix.A, nf_or_matrix.scales.eps_min
    if eps_min is None:
        raise ConditionError("eps_min is required when a bare matrix is checked")
    return np.asarray(nf_or_matrix, dtype=float), eps_min


def bordered_matrix(A: np.ndarray, omega: np.ndarray) -> np.ndarray:
    n = A.shape[0]
    M = np.zeros((n + 1, n + 1))
    M[:n, :n] = A
    M[:n, n] = omega
    M[n, :n] = omega
    return M


def check_K(nf: Union[NormalForm, np.ndarray], n1: int, c: float, eps_min: Optional[float] = None) -> ConditionReport:
    A, eps_min = _hessian_and_eps(nf, eps_min)
    report = _submatrix_report("K", A, n1, c, eps_min, border=None)
    logger.info("condition_checked", condition="K", passed=report.passed, margin=report.margin, n1=n1)
    return report


def check_I(nf: Union[NormalForm, np.ndarray], n1: int, c: float, eps_min: Optional[float] = None,
            omega: Optional[np.ndarray] = None) -> ConditionReport:
    if isinstance(nf, NormalForm):
        A, eps_min, omega = nf.A, nf.scales.eps_min, nf.omega
    else:
        A, eps_min = _hessian_and_eps(nf, eps_min)
        if omega is None:
            raise ConditionError("omega is required when a bare matrix is checked")
    M = bordered_matrix(A, np.asarray(omega, dtype=float))
    report = _submatrix_report("I", M, n1, c, eps_min, border=A.shape[0])
    logger.info("condition_checked", condition="I", passed=report.passed, margin=report.margin, n1=n1)
    return report


def check_K_grid(freq: FrequencyField, grid, n1: int, c: float, eps_min: float) -> ConditionReport:
    points = _as_grid(grid, freq.n)
    reports = []
    for xi in points:
        rep = _submatrix_report("K'", freq.jacobian(xi), n1, c, eps_min, border=None)
        rep.witness["point"] = xi.tolist()
        reports.append(rep)
    return merge_reports(reports, "K'")


def check_I_grid(freq: FrequencyField, grid, n1: int, c: float, eps_min: float) -> ConditionReport:
    points = _as_grid(grid, freq.n)
    reports = []
    for xi in points:
        M = bordered_matrix(freq.jacobian(xi), freq(xi))
        rep = _submatrix_report("I'", M, n1, c, eps_min, border=freq.n)
        rep.witness["point"] = xi.tolist()
        reports.append(rep)
    return merge_reports(reports, "I'")


def hessian_determinant(nf: NormalForm) -> float:
    return graded.determinant(nf.A)


def bordered_determinant(nf: NormalForm, I0=None) -> float:
    """det((A, omega^T), (omega, 0)) with omega and A taken at the absolute action I0."""
    offset = np.zeros(nf.n) if I0 is None else np.asarray(I0, dtype=float) - nf.base_point
    if not offset.any():
        return graded.determinant(bordered_matrix(nf.A, nf.omega))
    A = hessian_from_series(translate(nf.as_series(), offset))
    return graded.determinant(bordered_matrix(A, nf.frequency_at(offset)))


def box_grid(center, radius: float, points_per_axis: int) -> np.ndarray:
    """Tensor grid of points_per_axis^n samples in the box |xi - center|_inf <= radius."""
    center = np.asarray(center, dtype=float)
    if points_per_axis == 1:
        return center[None, :]
    axes = [np.linspace(x - radius, x + radius, points_per_axis) for x in center]
    return np.array(list(itertools.product(*axes)))
