"""
Lower bound for the smallest eigenvalue of A A^* with A = sum_k eps_k A_k.
"""

from dataclasses import dataclass
from typing import Any, Dict, Sequence

import numpy as np
import structlog

from ..errors import ConditionError
from ..model import ScaleSet

logger = structlog.get_logger(__name__)

SINGULAR_RTOL = 1e-12
BOUND_RTOL = 1e-12


@dataclass(frozen=True)
class EigenBound:
    lambda_min: float
    lambda_max: float
    bound: float
    bound_linear: float
    c: float
    perturbation_norm: float
    passed: bool

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda_min": self.lambda_min,
            "lambda_max": self.lambda_max,
            "bound": self.bound,
            "bound_linear": self.bound_linear,
            "c": self.c,
            "perturbation_norm": self.perturbation_norm,
            "pass": self.passed,
        }


def combine_parts(parts: Sequence[np.ndarray], scales: ScaleSet) -> np.ndarray:
    parts = [np.asarray(p, dtype=float) for p in parts]
    if len(parts) != scales.m:
        raise ConditionError(f"{len(parts)} matrices for {scales.m} scales")
    shape = parts[0].shape
    if len(shape) != 2 or shape[0] != shape[1] or any(p.shape != shape for p in parts):
        raise ConditionError("all parts must be square matrices of equal dimension")
    return sum(e * p for e, p in zip(scales.epsilons, parts))


def eigen_lower_bound(parts: Sequence[np.ndarray], scales: ScaleSet) -> EigenBound:
    """Compare lambda_min(A A^*) with c * eps_min^2.

    The constant comes from writing A A^* = eps_max^2 I + P and bounding the
    eigenvalue shift by the Frobenius norm of P:
        c * eps_min^2 = max(eps_max^2 - ||P||_F, 0).
    The same c times eps_min is reported as the linear form of the bound.
    """
    A = combine_parts(parts, scales)
    gram = A @ A.conj().T
    eigenvalues = np.linalg.eigvalsh(gram)
    lam_min, lam_max = float(eigenvalues[0]), float(eigenvalues[-1])
    shift = np.linalg.norm(gram - scales.eps_max ** 2 * np.eye(A.shape[0]), "fro")
    bound = max(scales.eps_max ** 2 - shift, 0.0)
    c = bound / scales.eps_min ** 2
    nonsingular = lam_min > SINGULAR_RTOL * max(lam_max, np.finfo(float).tiny)
    result = EigenBound(
        lambda_min=lam_min,
        lambda_max=lam_max,
        bound=bound,
        bound_linear=c * scales.eps_min,
        c=c,
        perturbation_norm=float(shift),
        passed=bool(nonsingular and lam_min >= bound * (1.0 - BOUND_RTOL)),
    )
    logger.info("eigen_bound_checked", lambda_min=lam_min, bound=bound, passed=result.passed)
    return result
