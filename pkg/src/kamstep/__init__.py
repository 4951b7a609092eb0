# KAM step module
from .corrections import (
    FrequencyCorrection,
    IsoenergeticCorrection,
    dependent_rows,
    frequency_correction,
    isoenergetic_correction,
    select_block,
)
from .divisors import DivisorScreen, count_modes, half_space_modes, screen_divisors
from .gates import GATE_NAMES, GateReport, GateResult, gate_check, tail_integral_bound
from .homological import GeneratingFunction, homological_residual, solve_homological
from .params import StepParams
from .step import KamStepReport, apply_step, error_target, error_update, transform_bounds
