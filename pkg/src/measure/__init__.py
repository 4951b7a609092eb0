# Resonance measure module
from .resonance import (
    MeasurePoint,
    PowerLawFit,
    ResonanceEstimate,
    ResonanceQuery,
    fit_measure_exponent,
    fit_power_law,
    resonance_curve,
    resonance_measure,
    scaled_divisors,
)
