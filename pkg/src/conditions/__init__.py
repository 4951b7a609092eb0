# Non-degeneracy conditions module
from .checks import (
    ConditionReport,
    DerivativeStack,
    best_submatrix,
    bordered_determinant,
    bordered_matrix,
    box_grid,
    build_derivative_stack,
    check_I,
    check_I_grid,
    check_K,
    check_K_grid,
    check_R,
    hessian_determinant,
    merge_reports,
)
from .eigen import EigenBound, combine_parts, eigen_lower_bound
