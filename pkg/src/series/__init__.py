# Fourier-Taylor series module
from .fourier_taylor import (
    CANCEL_RTOL,
    DEFAULT_FLOOR,
    DomainWindow,
    FourierMode,
    FourierTaylorSeries,
    MultiIndex,
    add,
    average,
    degree_part,
    derivative,
    evaluate,
    gradient,
    linear_combination,
    majorant_norm,
    mul,
    poisson,
    restrict,
    scale,
    translate,
    translation_increment,
    truncate,
)
from .flow import LieSeries, TimeOneMap, lie_series, lie_transform, time_one_map
from .serialization import dumps_series, format_lines, loads_series
