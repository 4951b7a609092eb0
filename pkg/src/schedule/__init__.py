# Iteration schedule module
from .convergence import ConvergenceSummary, ConvergenceTrace, convergence_report, step_deviation
from .iteration import (
    MODE_KINDS,
    HaltRecord,
    IterationResult,
    IterationSettings,
    RunMode,
    run_iteration,
)
from .sequences import (
    InitialParams,
    StepSchedule,
    closed_form_log_r,
    make_schedule,
    min_exponent,
    validate_schedule,
)
