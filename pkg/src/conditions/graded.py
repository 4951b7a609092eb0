"""
Linear algebra for matrices whose entries span many orders of magnitude.

Multi-scale Hessians look like diag(2, 2e-6, 2e-12, ...); a plain SVD loses
the small singular values to rounding of the large ones. Every routine here
first applies a two-sided power-of-two equilibration B = D_r M D_c, which is
exact in floating point, works on the well-scaled B and maps results back.
"""

from typing import Tuple

import numpy as np
import scipy.linalg

_EPS = np.finfo(float).eps


def equilibrate(M: np.ndarray, sweeps: int = 12) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Ruiz scaling with powers of two.

    Returns (B, r, c) with B = diag(2**r) @ M @ diag(2**c) exactly.
    """
    B = np.array(M, dtype=float, copy=True)
    r = np.zeros(B.shape[0], dtype=int)
    c = np.zeros(B.shape[1], dtype=int)
    for _ in range(sweeps):
        row_max = np.abs(B).max(axis=1)
        er = np.where(row_max > 0, -np.round(0.5 * np.log2(np.where(row_max > 0, row_max, 1.0))), 0).astype(int)
        B = np.ldexp(B, er[:, None])
        col_max = np.abs(B).max(axis=0)
        ec = np.where(col_max > 0, -np.round(0.5 * np.log2(np.where(col_max > 0, col_max, 1.0))), 0).astype(int)
        B = np.ldexp(B, ec[None, :])
        r += er
        c += ec
        if not er.any() and not ec.any():
            break
    return B, r, c


def _well_conditioned(B: np.ndarray) -> bool:
    sv = np.linalg.svd(B, compute_uv=False)
    return sv.size > 0 and sv[-1] > max(B.shape) * _EPS * sv[0]


def smallest_singular_value(M: np.ndarray) -> float:
    """sigma_min(M) to relative accuracy for graded square M (0 for singular M)."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    if not (np.abs(M).max(axis=1) > 0).all() or not (np.abs(M).max(axis=0) > 0).all():
        return 0.0
    B, r, c = equilibrate(M)
    if not _well_conditioned(B):
        return float(np.linalg.svd(M, compute_uv=False)[-1])
    inverse = np.ldexp(np.ldexp(scipy.linalg.inv(B), c[:, None]), r[None, :])
    return float(1.0 / np.linalg.norm(inverse, 2))


def determinant(M: np.ndarray) -> float:
    """det(M); diagonal matrices give the plain product of their diagonal."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 1.0
    if np.count_nonzero(M - np.diag(np.diag(M))) == 0:
        return float(np.prod(np.diag(M)))
    if not (np.abs(M).max(axis=1) > 0).all() or not (np.abs(M).max(axis=0) > 0).all():
        return 0.0
    B, r, c = equilibrate(M)
    return float(np.ldexp(scipy.linalg.det(B), -int(r.sum()) - int(c.sum())))


def solve(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve M x = b through the equilibrated system."""
    M = np.asarray(M, dtype=float)
    B, r, c = equilibrate(M)
    y = scipy.linalg.solve(B, np.ldexp(np.asarray(b, dtype=float), r))
    return np.ldexp(y, c)
