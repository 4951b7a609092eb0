# Multi-scale Hamiltonian model module
from .hamiltonian import (
    HamiltonianSpec,
    NormalForm,
    ScaleSet,
    expand_at,
    hessian_from_series,
    initial_perturbation,
    perturbation_gate,
    tail_constant,
)
from .frequency import FrequencyField, multi_indices
