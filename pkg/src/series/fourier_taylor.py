"""
Sparse Fourier-Taylor series in n action and n angle variables.

A series is the finite sum  sum_{k,j} c_{kj} I^j exp(i<k, theta>)  stored as a
map from (k, j) integer tuples to complex coefficients. Values are immutable;
every operation returns a new series.

Each stored coefficient also carries a magnitude: the sum of the absolute
values of the contributions that produced it. A coefficient that is smaller
than CANCEL_RTOL times its magnitude is an exact cancellation up to rounding
and is dropped, which keeps identities such as {N, F} + R - [R] = 0 exactly
empty in floating point.
"""

import itertools
from dataclasses import dataclass
from math import comb
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Sequence, Tuple

import numpy as np

from ..errors import DimensionMismatchError, RealityError, SeriesError, SeriesOverflowError

Key = Tuple[Tuple[int, ...], Tuple[int, ...]]

DEFAULT_FLOOR = 1e-15
CANCEL_RTOL = 1e-13
REALITY_RTOL = 1e-9

_LOG_FLOAT_MAX = float(np.log(np.finfo(float).max))


@dataclass(frozen=True)
class MultiIndex:
    """Taylor multi-index j with non-negative entries."""
    entries: Tuple[int, ...]

    def __post_init__(self):
        entries = tuple(int(e) for e in self.entries)
        if any(e < 0 for e in entries):
            raise SeriesError(f"multi-index entries must be >= 0: {entries}")
        object.__setattr__(self, "entries", entries)

    @property
    def order(self) -> int:
        return sum(self.entries)


@dataclass(frozen=True)
class FourierMode:
    """Fourier mode k with l1 norm |k|."""
    entries: Tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(int(e) for e in self.entries))

    @property
    def norm(self) -> int:
        return sum(abs(e) for e in self.entries)

    def canonical(self) -> "FourierMode":
        """Representative of {k, -k} whose first nonzero entry is positive."""
        for e in self.entries:
            if e != 0:
                return self if e > 0 else FourierMode(tuple(-x for x in self.entries))
        return self


@dataclass(frozen=True)
class DomainWindow:
    """Complex domain D_{r,s} and parameter neighbourhood width h."""
    r: float
    s: float
    h: float

    def __post_init__(self):
        for name in ("r", "s", "h"):
            value = getattr(self, name)
            if not value > 0:
                raise ValueError(f"window {name} must be > 0, got {value!r}")


def _mode_norm(k: Tuple[int, ...]) -> int:
    return sum(abs(x) for x in k)


def _neg(k: Tuple[int, ...]) -> Tuple[int, ...]:
    return tuple(-x for x in k)


def _tighter(a: Optional[int], b: Optional[int]) -> Optional[int]:
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class FourierTaylorSeries:
    """Immutable sparse Fourier-Taylor series in canonical form."""

    __slots__ = ("dim", "taylor_cutoff", "fourier_cutoff", "real", "floor", "_coeffs", "_mags", "_arrays")

    def __init__(
        self,
        dim: int,
        coeffs: Optional[Dict] = None,
        *,
        taylor_cutoff: Optional[int] = None,
        fourier_cutoff: Optional[int] = None,
        real: bool = False,
        floor: float = DEFAULT_FLOOR,
        mags: Optional[Dict] = None,
    ):
        if dim < 1:
            raise SeriesError(f"dimension must be >= 1, got {dim}")
        raw: Dict[Key, complex] = {}
        raw_mags: Dict[Key, float] = {}
        for key, value in (coeffs or {}).items():
            norm_key = _normalize_key(key, dim)
            if norm_key in raw:
                raise SeriesError(f"duplicate coefficient key {norm_key}")
            raw[norm_key] = complex(value)
            if mags is not None and key in mags:
                raw_mags[norm_key] = float(mags[key])
        self._init(dim, raw, raw_mags, taylor_cutoff, fourier_cutoff, real, floor)

    def _init(self, dim, raw, raw_mags, taylor_cutoff, fourier_cutoff, real, floor):
        self.dim = dim
        self.taylor_cutoff = taylor_cutoff
        self.fourier_cutoff = fourier_cutoff
        self.real = bool(real)
        self.floor = float(floor)
        self._arrays = None
        self._coeffs, self._mags = _canonicalize(raw, raw_mags, taylor_cutoff, fourier_cutoff, self.real, self.floor)

    @classmethod
    def _from_raw(cls, dim, raw, raw_mags, taylor_cutoff=None, fourier_cutoff=None, real=False,
                  floor=DEFAULT_FLOOR) -> "FourierTaylorSeries":
        obj = cls.__new__(cls)
        obj._init(dim, raw, raw_mags, taylor_cutoff, fourier_cutoff, real, floor)
        return obj

    # Constructors

    @classmethod
    def zero(cls, dim: int, **kwargs) -> "FourierTaylorSeries":
        return cls(dim, {}, **kwargs)

    @classmethod
    def constant(cls, dim: int, value: complex, **kwargs) -> "FourierTaylorSeries":
        zeros = (0,) * dim
        kwargs.setdefault("real", complex(value).imag == 0)
        return cls(dim, {(zeros, zeros): value}, **kwargs)

    @classmethod
    def action(cls, dim: int, index: int, **kwargs) -> "FourierTaylorSeries":
        """The coordinate function I_index (0-based)."""
        j = [0] * dim
        j[index] = 1
        kwargs.setdefault("real", True)
        return cls(dim, {((0,) * dim, tuple(j)): 1.0}, **kwargs)

    @classmethod
    def monomial(cls, k: Sequence[int], j: Sequence[int], value: complex = 1.0, **kwargs) -> "FourierTaylorSeries":
        return cls(len(k), {(tuple(k), tuple(j)): value}, **kwargs)

    # Accessors

    def __len__(self) -> int:
        return len(self._coeffs)

    def __iter__(self) -> Iterator[Key]:
        return iter(self._coeffs)

    def __contains__(self, key) -> bool:
        return _normalize_key(key, self.dim) in self._coeffs

    def __getitem__(self, key) -> complex:
        return self._coeffs.get(_normalize_key(key, self.dim), 0j)

    def coefficient(self, k: Sequence[int], j: Sequence[int]) -> complex:
        return self._coeffs.get((tuple(k), tuple(j)), 0j)

    def magnitude(self, k: Sequence[int], j: Sequence[int]) -> float:
        return self._mags.get((tuple(k), tuple(j)), 0.0)

    def items(self) -> Iterable[Tuple[Key, complex]]:
        return self._coeffs.items()

    def keys(self) -> Iterable[Key]:
        return self._coeffs.keys()

    def as_dict(self) -> Dict[Key, complex]:
        return dict(self._coeffs)

    def is_empty(self) -> bool:
        return not self._coeffs

    def modes(self) -> List[Tuple[int, ...]]:
        return sorted({k for k, _ in self._coeffs})

    def max_order(self) -> int:
        """Largest |k| present (0 when empty)."""
        return max((_mode_norm(k) for k, _ in self._coeffs), default=0)

    def max_degree(self) -> int:
        return max((sum(j) for _, j in self._coeffs), default=0)

    def with_options(self, **changes) -> "FourierTaylorSeries":
        """Copy with different cutoffs, floor or reality flag."""
        opts = dict(taylor_cutoff=self.taylor_cutoff, fourier_cutoff=self.fourier_cutoff,
                    real=self.real, floor=self.floor)
        opts.update(changes)
        return FourierTaylorSeries._from_raw(self.dim, dict(self._coeffs), dict(self._mags), **opts)

    def arrays(self) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Stacked (K, J, C) arrays, one row per stored coefficient."""
        if self._arrays is None:
            keys = list(self._coeffs)
            if keys:
                K = np.array([k for k, _ in keys], dtype=np.int64)
                J = np.array([j for _, j in keys], dtype=np.int64)
                C = np.array([self._coeffs[key] for key in keys], dtype=complex)
            else:
                K = np.zeros((0, self.dim), dtype=np.int64)
                J = np.zeros((0, self.dim), dtype=np.int64)
                C = np.zeros(0, dtype=complex)
            self._arrays = (K, J, C)
        return self._arrays

    # Operators

    def __eq__(self, other) -> bool:
        if not isinstance(other, FourierTaylorSeries):
            return NotImplemented
        return self.dim == other.dim and self._coeffs == other._coeffs

    def __hash__(self):
        return hash((self.dim, frozenset(self._coeffs.items())))

    def __add__(self, other: "FourierTaylorSeries") -> "FourierTaylorSeries":
        return add(self, other)

    def __sub__(self, other: "FourierTaylorSeries") -> "FourierTaylorSeries":
        return linear_combination([(1.0, self), (-1.0, other)])

    def __neg__(self) -> "FourierTaylorSeries":
        return scale(self, -1.0)

    def __mul__(self, other):
        if isinstance(other, FourierTaylorSeries):
            return mul(self, other)
        return scale(self, other)

    def __rmul__(self, other):
        return scale(self, other)

    def __repr__(self) -> str:
        return f"FourierTaylorSeries(dim={self.dim}, terms={len(self)}, real={self.real})"


def _normalize_key(key, dim: int) -> Key:
    k, j = key
    k = tuple(int(x) for x in k)
    j = tuple(int(x) for x in j)
    if len(k) != dim or len(j) != dim:
        raise DimensionMismatchError(dim, max(len(k), len(j)))
    if any(x < 0 for x in j):
        raise SeriesError(f"negative Taylor exponent in {j}")
    return k, j


def _canonicalize(raw, raw_mags, taylor_cutoff, fourier_cutoff, real, floor):
    coeffs: Dict[Key, complex] = {}
    mags: Dict[Key, float] = {}
    for key, c in raw.items():
        k, j = key
        if taylor_cutoff is not None and sum(j) > taylor_cutoff:
            continue
        if fourier_cutoff is not None and _mode_norm(k) > fourier_cutoff:
            continue
        coeffs[key] = c
        mags[key] = max(raw_mags.get(key, 0.0), abs(c))

    if real:
        _symmetrize(coeffs, mags)

    kept = {key: c for key, c in coeffs.items() if c != 0 and abs(c) > CANCEL_RTOL * mags[key]}
    if floor > 0 and kept:
        cutoff = floor * max(abs(c) for c in kept.values())
        kept = {key: c for key, c in kept.items() if abs(c) >= cutoff}
    return kept, {key: mags[key] for key in kept}


def _symmetrize(coeffs: Dict[Key, complex], mags: Dict[Key, float]) -> None:
    """Enforce c(-k, j) = conj(c(k, j)) in place, validating within tolerance."""
    for key in list(coeffs):
        k, j = key
        partner = (_neg(k), j)
        c = coeffs[key]
        if partner == key:
            if abs(c.imag) > REALITY_RTOL * mags[key] + 0.0 and abs(c.imag) > CANCEL_RTOL * mags[key]:
                raise RealityError(f"k = 0 coefficient at j={j} is not real: {c!r}")
            coeffs[key] = complex(c.real, 0.0)
            continue
        if partner not in coeffs:
            if abs(c) <= CANCEL_RTOL * mags[key]:
                coeffs[key] = 0j
                continue
            raise RealityError(f"missing conjugate partner of mode {k} at j={j}")
        cp = coeffs[partner]
        scale_ = mags[key] + mags[partner]
        if abs(cp - c.conjugate()) > REALITY_RTOL * scale_:
            raise RealityError(f"coefficients at k={k}, j={j} are not conjugate symmetric")
        mean = 0.5 * (c + cp.conjugate())
        coeffs[key] = mean
        coeffs[partner] = mean.conjugate()
        mags[key] = mags[partner] = max(mags[key], mags[partner])


def _check_dims(a: FourierTaylorSeries, b: FourierTaylorSeries) -> None:
    if a.dim != b.dim:
        raise DimensionMismatchError(a.dim, b.dim)


def linear_combination(terms: Sequence[Tuple[complex, FourierTaylorSeries]]) -> FourierTaylorSeries:
    """Fused sum  sum_i w_i * p_i  with cancellation detection across all terms."""
    if not terms:
        raise ValueError("linear_combination needs at least one term")
    first = terms[0][1]
    acc: Dict[Key, complex] = {}
    mag: Dict[Key, float] = {}
    taylor_cutoff = first.taylor_cutoff
    fourier_cutoff = first.fourier_cutoff
    floor = first.floor
    real = True
    for weight, p in terms:
        _check_dims(first, p)
        taylor_cutoff = _tighter(taylor_cutoff, p.taylor_cutoff)
        fourier_cutoff = _tighter(fourier_cutoff, p.fourier_cutoff)
        floor = max(floor, p.floor)
        w = complex(weight)
        real = real and p.real and w.imag == 0
        if w == 0:
            continue
        aw = abs(w)
        for key, c in p._coeffs.items():
            acc[key] = acc.get(key, 0j) + w * c
            mag[key] = mag.get(key, 0.0) + aw * p._mags[key]
    return FourierTaylorSeries._from_raw(first.dim, acc, mag, taylor_cutoff, fourier_cutoff, real, floor)


def add(a: FourierTaylorSeries, b: FourierTaylorSeries) -> FourierTaylorSeries:
    """Coefficientwise sum in canonical sparse form."""
    return linear_combination([(1.0, a), (1.0, b)])


def scale(p: FourierTaylorSeries, factor: complex) -> FourierTaylorSeries:
    return linear_combination([(factor, p)])


def mul(a: FourierTaylorSeries, b: FourierTaylorSeries) -> FourierTaylorSeries:
    """Product: convolution in k, addition of multi-indices in j."""
    _check_dims(a, b)
    taylor_cutoff = _tighter(a.taylor_cutoff, b.taylor_cutoff)
    fourier_cutoff = _tighter(a.fourier_cutoff, b.fourier_cutoff)
    acc: Dict[Key, complex] = {}
    mag: Dict[Key, float] = {}
    for (k1, j1), c1 in a._coeffs.items():
        m1 = a._mags[(k1, j1)]
        for (k2, j2), c2 in b._coeffs.items():
            j = tuple(x + y for x, y in zip(j1, j2))
            if taylor_cutoff is not None and sum(j) > taylor_cutoff:
                continue
            k = tuple(x + y for x, y in zip(k1, k2))
            key = (k, j)
            acc[key] = acc.get(key, 0j) + c1 * c2
            mag[key] = mag.get(key, 0.0) + m1 * b._mags[(k2, j2)]
    return FourierTaylorSeries._from_raw(a.dim, acc, mag, taylor_cutoff, fourier_cutoff,
                                         a.real and b.real, max(a.floor, b.floor))


def poisson(f: FourierTaylorSeries, g: FourierTaylorSeries) -> FourierTaylorSeries:
    """Poisson bracket {f, g} = f_theta . g_I - f_I . g_theta."""
    _check_dims(f, g)
    n = f.dim
    taylor_cutoff = _tighter(f.taylor_cutoff, g.taylor_cutoff)
    fourier_cutoff = _tighter(f.fourier_cutoff, g.fourier_cutoff)
    acc: Dict[Key, complex] = {}
    mag: Dict[Key, float] = {}
    for (k1, j1), c1 in f._coeffs.items():
        m1 = f._mags[(k1, j1)]
        for (k2, j2), c2 in g._coeffs.items():
            k = None
            base = None
            prod = 1j * c1 * c2
            pm = m1 * g._mags[(k2, j2)]
            for i in range(n):
                w = k1[i] * j2[i] - j1[i] * k2[i]
                if w == 0:
                    continue
                if k is None:
                    k = tuple(x + y for x, y in zip(k1, k2))
                    base = [x + y for x, y in zip(j1, j2)]
                j = list(base)
                j[i] -= 1
                j = tuple(j)
                key = (k, j)
                acc[key] = acc.get(key, 0j) + w * prod
                mag[key] = mag.get(key, 0.0) + abs(w) * pm
    return FourierTaylorSeries._from_raw(n, acc, mag, taylor_cutoff, fourier_cutoff,
                                         f.real and g.real, max(f.floor, g.floor))


def restrict(p: FourierTaylorSeries, keep: Callable[[Tuple[int, ...], Tuple[int, ...]], bool]) -> FourierTaylorSeries:
    """Sub-series of the coefficients whose (k, j) satisfy `keep`."""
    raw = {key: c for key, c in p._coeffs.items() if keep(*key)}
    return FourierTaylorSeries._from_raw(p.dim, raw, {key: p._mags[key] for key in raw},
                                         p.taylor_cutoff, p.fourier_cutoff, p.real, p.floor)


def degree_part(p: FourierTaylorSeries, low: int, high: Optional[int] = None) -> FourierTaylorSeries:
    """Terms with low <= |j| <= high (high=None means unbounded)."""
    return restrict(p, lambda k, j: sum(j) >= low and (high is None or sum(j) <= high))


def truncate(p: FourierTaylorSeries, K: float, m: int) -> Tuple[FourierTaylorSeries, FourierTaylorSeries]:
    """Split off Q (|j| <= m-1) and R (|j| <= m-1, |k| <= K)."""
    if K < 1 or m < 3:
        raise ValueError(f"truncate needs K >= 1 and m >= 3, got K={K}, m={m}")
    order = int(np.floor(K))
    q = restrict(p, lambda k, j: sum(j) <= m - 1)
    r = restrict(q, lambda k, j: _mode_norm(k) <= order)
    return q, r


def average(p: FourierTaylorSeries) -> FourierTaylorSeries:
    """Angle average [p]: the k = 0 coefficients."""
    return restrict(p, lambda k, j: not any(k))


def majorant_norm(p: FourierTaylorSeries, r: float, s: float) -> float:
    """Weighted l1 norm  sum |c_kj| r^|j| e^{|k| s}, an upper bound for the sup on D_{r,s}."""
    if not (r > 0 and s > 0):
        raise ValueError(f"majorant_norm needs r > 0 and s > 0, got r={r}, s={s}")
    if p.is_empty():
        return 0.0
    K, J, C = p.arrays()
    with np.errstate(divide="ignore"):
        logs = np.log(np.abs(C)) + J.sum(axis=1) * np.log(r) + np.abs(K).sum(axis=1) * s
    if np.any(logs > _LOG_FLOAT_MAX):
        raise SeriesOverflowError(f"majorant term exceeds float range at r={r}, s={s}")
    total = float(np.sum(np.exp(logs)))
    if not np.isfinite(total):
        raise SeriesOverflowError(f"majorant sum exceeds float range at r={r}, s={s}")
    return total


def derivative(p: FourierTaylorSeries, variable: str, index: int) -> FourierTaylorSeries:
    """Partial derivative with respect to I_index ("I") or theta_index ("theta")."""
    raw: Dict[Key, complex] = {}
    mag: Dict[Key, float] = {}
    if variable == "I":
        for (k, j), c in p._coeffs.items():
            power = j[index]
            if power == 0:
                continue
            jj = list(j)
            jj[index] -= 1
            key = (k, tuple(jj))
            raw[key] = c * power
            mag[key] = p._mags[(k, j)] * power
    elif variable == "theta":
        for (k, j), c in p._coeffs.items():
            if k[index] == 0:
                continue
            raw[(k, j)] = 1j * k[index] * c
            mag[(k, j)] = abs(k[index]) * p._mags[(k, j)]
    else:
        raise ValueError(f"variable must be 'I' or 'theta', got {variable!r}")
    return FourierTaylorSeries._from_raw(p.dim, raw, mag, p.taylor_cutoff, p.fourier_cutoff, p.real, p.floor)


def gradient(p: FourierTaylorSeries, variable: str = "I") -> List[FourierTaylorSeries]:
    return [derivative(p, variable, i) for i in range(p.dim)]


def evaluate(p: FourierTaylorSeries, actions, angles=None) -> np.ndarray:
    """Value at one point (1-d inputs) or a batch of points (2-d inputs, one row per point)."""
    actions = np.asarray(actions, dtype=complex)
    single = actions.ndim == 1
    actions = np.atleast_2d(actions)
    if angles is None:
        angles = np.zeros_like(actions)
    angles = np.atleast_2d(np.asarray(angles, dtype=complex))
    if actions.shape[1] != p.dim or angles.shape[1] != p.dim:
        raise DimensionMismatchError(p.dim, actions.shape[1])
    if p.is_empty():
        out = np.zeros(actions.shape[0], dtype=complex)
        return out[0] if single else out
    K, J, C = p.arrays()
    with np.errstate(all="ignore"):
        raw = actions[:, None, :] ** J[None, :, :]
    powers = np.where(J[None, :, :] == 0, 1.0 + 0j, raw).prod(axis=2)
    phases = np.exp(1j * (angles @ K.T))
    out = (powers * phases) @ C
    return out[0] if single else out


def _sub_indices(j: Tuple[int, ...]) -> Iterator[Tuple[int, ...]]:
    return itertools.product(*(range(x + 1) for x in j))


def _recentered(p: FourierTaylorSeries, shift, include_identity: bool) -> FourierTaylorSeries:
    shift = [float(x) for x in np.asarray(shift, dtype=float).ravel()]
    if len(shift) != p.dim:
        raise DimensionMismatchError(p.dim, len(shift))
    acc: Dict[Key, complex] = {}
    mag: Dict[Key, float] = {}
    for (k, j), c in p._coeffs.items():
        m = p._mags[(k, j)]
        for sub in _sub_indices(j):
            if sub == j and not include_identity:
                continue
            factor = 1.0
            for jl, il, sl in zip(j, sub, shift):
                if jl != il:
                    factor *= comb(jl, il) * sl ** (jl - il)
            if factor == 0.0:
                continue
            key = (k, sub)
            acc[key] = acc.get(key, 0j) + c * factor
            mag[key] = mag.get(key, 0.0) + m * abs(factor)
    return FourierTaylorSeries._from_raw(p.dim, acc, mag, p.taylor_cutoff, p.fourier_cutoff, p.real, p.floor)


def translate(p: FourierTaylorSeries, shift) -> FourierTaylorSeries:
    """The series I -> p(I + shift), expanded exactly by the binomial theorem."""
    return _recentered(p, shift, include_identity=True)


def translation_increment(p: FourierTaylorSeries, shift) -> FourierTaylorSeries:
    """p(I + shift) - p(I), assembled without forming the difference."""
    return _recentered(p, shift, include_identity=False)
