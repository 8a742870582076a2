"""
Truncated periodic lattice hZ^n and functions on it.

The infinite lattice is replaced by N sites per axis with periodic
wrap-around.  Site multi-indices m run over [-N/2, N/2)^n in row-major
order; the physical site is k = hbar * m.  The dual frequency grid uses
the same index range with xi = m / (N * hbar), so every frequency lies in
the torus [-1/(2 hbar), 1/(2 hbar))^n.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from .errors import InvalidInputError, SpecMismatchError


@dataclass(frozen=True)
class LatticeSpec:
    """Geometry of a truncated lattice and of its dual grid.

    Parameters
    ----------
    n : int
        Spatial dimension.
    hbar : float
        Lattice spacing.
    N : int
        Points per axis, even and >= 2.
    """

    n: int
    hbar: float
    N: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise InvalidInputError(f"dimension must be a positive integer, got {self.n!r}")
        if not (np.isfinite(self.hbar) and self.hbar > 0):
            raise InvalidInputError(f"hbar must be positive and finite, got {self.hbar!r}")
        if int(self.N) != self.N or self.N < 2 or self.N % 2:
            raise InvalidInputError(f"points per axis must be even and >= 2, got {self.N!r}")
        object.__setattr__(self, "n", int(self.n))
        object.__setattr__(self, "N", int(self.N))
        object.__setattr__(self, "hbar", float(self.hbar))

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.N,) * self.n

    @property
    def size(self) -> int:
        return self.N**self.n

    @property
    def box_length(self) -> float:
        """Physical period N * hbar of the truncated lattice."""
        return self.N * self.hbar

    @property
    def cell_volume(self) -> float:
        """Volume (1/(N hbar))^n of one dual-grid cell."""
        return self.box_length ** (-self.n)

    def axis_indices(self) -> np.ndarray:
        return np.arange(-self.N // 2, self.N // 2)

    def axis_coordinates(self) -> np.ndarray:
        return self.hbar * self.axis_indices()

    def axis_frequencies(self) -> np.ndarray:
        return self.axis_indices() / self.box_length

    def coordinates(self) -> list[np.ndarray]:
        """Per-axis site coordinates broadcast to the full grid."""
        return np.meshgrid(*([self.axis_coordinates()] * self.n), indexing="ij")

    def frequencies(self) -> list[np.ndarray]:
        return np.meshgrid(*([self.axis_frequencies()] * self.n), indexing="ij")

    def site_norm(self) -> np.ndarray:
        """Euclidean norm |k| of every site, hbar factor included."""
        return _site_norm(self)

    def origin(self) -> tuple[int, ...]:
        """Array index of the site k = 0 (and of the frequency xi = 0)."""
        return (self.N // 2,) * self.n

    def index_of(self, m) -> tuple[int, ...]:
        """Array index of the lattice multi-index ``m`` (wrapped periodically)."""
        m = np.atleast_1d(np.asarray(m, dtype=int))
        if m.shape != (self.n,):
            raise InvalidInputError(f"multi-index must have {self.n} components")
        return tuple(int((mi + self.N // 2) % self.N) for mi in m)


def _site_norm(spec: LatticeSpec) -> np.ndarray:
    axes = spec.coordinates()
    return np.sqrt(sum(x * x for x in axes))


def _as_values(spec: LatticeSpec, values) -> np.ndarray:
    arr = np.array(values, dtype=complex)
    if arr.shape != spec.shape:
        if arr.size == spec.size:
            arr = arr.reshape(spec.shape)
        else:
            raise SpecMismatchError(f"expected {spec.size} values for shape {spec.shape}, got {arr.size}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError("values contain non-finite entries")
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class _LatticeArray:
    spec: LatticeSpec
    values: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "values", _as_values(self.spec, self.values))

    @classmethod
    def zeros(cls, spec: LatticeSpec):
        return cls(spec, np.zeros(spec.shape, dtype=complex))

    def _check(self, other):
        if type(other) is not type(self):
            raise SpecMismatchError(f"cannot combine {type(self).__name__} with {type(other).__name__}")
        if other.spec != self.spec:
            raise SpecMismatchError(f"lattice mismatch: {self.spec} vs {other.spec}")

    def __add__(self, other):
        self._check(other)
        return type(self)(self.spec, self.values + other.values)

    def __sub__(self, other):
        self._check(other)
        return type(self)(self.spec, self.values - other.values)

    def __mul__(self, c):
        if isinstance(c, _LatticeArray):
            return NotImplemented
        return type(self)(self.spec, self.values * c)

    __rmul__ = __mul__

    def __neg__(self):
        return type(self)(self.spec, -self.values)

    def allclose(self, other, atol=1e-12, rtol=0.0) -> bool:
        self._check(other)
        return bool(np.allclose(self.values, other.values, atol=atol, rtol=rtol))


class GridFunction(_LatticeArray):
    """Complex values on the sites of a truncated lattice (immutable)."""

    @classmethod
    def from_function(cls, spec: LatticeSpec, func):
        """Sample ``func(*coords)`` at the lattice sites."""
        return cls(spec, np.broadcast_to(func(*spec.coordinates()), spec.shape))

    @classmethod
    def delta(cls, spec: LatticeSpec, m=None):
        """Unit mass at lattice multi-index ``m`` (default the origin)."""
        vals = np.zeros(spec.shape, dtype=complex)
        vals[spec.origin() if m is None else spec.index_of(m)] = 1.0
        return cls(spec, vals)


class SpectralFunction(_LatticeArray):
    """Complex values on the dual frequency grid (immutable)."""


def weighted_norm(f: GridFunction, s: float = 0.0) -> float:
    """Weighted l^2_s norm ``(sum (1+|k|)^{2s} |f(k)|^2)^{1/2}``."""
    if not isinstance(f, GridFunction):
        raise InvalidInputError("weighted_norm expects a GridFunction")
    if not np.isfinite(s):
        raise InvalidInputError("weight order s must be finite")
    w = _weights(f.spec, s)
    return float(np.sqrt(np.sum(w * np.abs(f.values) ** 2)))


def weighted_inner_product(u: GridFunction, v: GridFunction, s: float = 0.0) -> complex:
    """Sesquilinear ``sum (1+|k|)^{2s} u(k) conj(v(k))``; linear in ``u``."""
    if not (isinstance(u, GridFunction) and isinstance(v, GridFunction)):
        raise SpecMismatchError("weighted_inner_product expects two GridFunctions")
    u._check(v)
    w = _weights(u.spec, s)
    return complex(np.sum(w * u.values * np.conj(v.values)))


def _weights(spec: LatticeSpec, s: float) -> np.ndarray:
    if s == 0:
        return np.ones(spec.shape)
    return (1.0 + spec.site_norm()) ** (2.0 * s)
