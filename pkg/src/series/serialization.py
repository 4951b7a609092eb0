"""
Line-oriented text format for series: one coefficient per line,

    k_1 ... k_n | j_1 ... j_n | re im

with floats printed in shortest round-trip form. Blank lines and lines
starting with '#' are ignored.
"""

from typing import Iterable, List, Optional, Union

from ..errors import SeriesFormatError
from .fourier_taylor import DEFAULT_FLOOR, FourierTaylorSeries


def _sort_key(key):
    k, j = key
    return (sum(abs(x) for x in k), k, sum(j), j)


def format_lines(p: FourierTaylorSeries) -> List[str]:
    lines = []
    for key in sorted(p.keys(), key=_sort_key):
        k, j = key
        c = p.coefficient(k, j)
        lines.append(
            f"{' '.join(str(x) for x in k)} | {' '.join(str(x) for x in j)} | {c.real!r} {c.imag!r}"
        )
    return lines


def dumps_series(p: FourierTaylorSeries) -> str:
    lines = format_lines(p)
    return "\n".join(lines) + ("\n" if lines else "")


def loads_series(
    text: Union[str, Iterable[str]],
    dim: Optional[int] = None,
    real: bool = False,
    floor: float = DEFAULT_FLOOR,
) -> FourierTaylorSeries:
    """Parse the text format; `dim` is required when the text has no coefficients."""
    lines = text.splitlines() if isinstance(text, str) else list(text)
    coeffs = {}
    for number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        parts = stripped.split("|")
        if len(parts) != 3:
            raise SeriesFormatError(number, "expected 'k... | j... | re im'")
        try:
            k = tuple(int(x) for x in parts[0].split())
            j = tuple(int(x) for x in parts[1].split())
            values = [float(x) for x in parts[2].split()]
        except ValueError as e:
            raise SeriesFormatError(number, str(e)) from e
        if len(values) != 2:
            raise SeriesFormatError(number, "expected two floats 're im'")
        if len(k) != len(j):
            raise SeriesFormatError(number, f"mode has {len(k)} entries but multi-index has {len(j)}")
        if dim is None:
            dim = len(k)
        elif len(k) != dim:
            raise SeriesFormatError(number, f"expected {dim} entries, found {len(k)}")
        if any(x < 0 for x in j):
            raise SeriesFormatError(number, "multi-index entries must be >= 0")
        if (k, j) in coeffs:
            raise SeriesFormatError(number, f"duplicate key {k} | {j}")
        coeffs[(k, j)] = complex(values[0], values[1])
    if dim is None:
        raise SeriesFormatError(0, "cannot infer dimension from empty text")
    return FourierTaylorSeries(dim, coeffs, real=real, floor=floor)
