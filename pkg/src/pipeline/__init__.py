# Run pipeline module
from .config import (
    RunConfig,
    build_spec,
    emit_config,
    example_config,
    load_config,
    parse_config,
    validate_data,
    with_overrides,
)
from .example import (
    N_COORBITAL,
    bordered_identity,
    coorbital_perturbation,
    coorbital_scales,
    example_coorbital,
    hessian_identity,
)
from .runner import STAGES, RunReport, check_conditions, run
