"""
Time-dependent coefficients with distributional parts and their
Friedrichs-mollifier regularisations a_eps = a * psi_{omega(eps)}.

A :class:`CoefficientModel` is a closed-form regular part plus finite sums
of delta atoms and Heaviside atoms supported in [0, T].  Regularisation is
exact per component: delta atoms become scaled bumps, Heaviside atoms use
the tabulated antiderivative of the bump, and the regular part is
convolved by composite Gauss-Legendre quadrature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import CubicHermiteSpline

from .errors import GridResolutionError, InvalidInputError, PositivityError

# -- regular parts ---------------------------------------------------------


@dataclass(frozen=True)
class Constant:
    c: float

    def value(self, t):
        return np.full_like(np.asarray(t, dtype=float), self.c)

    def derivative(self, t):
        return np.zeros_like(np.asarray(t, dtype=float))

    def lower_bound(self, t0, t1) -> float:
        return float(self.c)

    def lipschitz(self, t0, t1) -> float:
        return 0.0


@dataclass(frozen=True)
class Polynomial:
    """``sum_i coeffs[i] * t**i``."""

    coeffs: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(self, "coeffs", tuple(float(c) for c in self.coeffs))

    def value(self, t):
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), self.coeffs)

    def derivative(self, t):
        d = np.polynomial.polynomial.polyder(self.coeffs) if len(self.coeffs) > 1 else [0.0]
        return np.polynomial.polynomial.polyval(np.asarray(t, dtype=float), d)

    def lower_bound(self, t0, t1) -> float:
        ts = np.linspace(t0, t1, 4097)
        return float(self.value(ts).min())

    def lipschitz(self, t0, t1) -> float:
        ts = np.linspace(t0, t1, 4097)
        return float(np.abs(self.derivative(ts)).max())


@dataclass(frozen=True)
class Oscillation:
    """``c0 + c1 * sin(freq * t + phase)``."""

    c0: float
    c1: float
    freq: float = 1.0
    phase: float = 0.0

    def value(self, t):
        return self.c0 + self.c1 * np.sin(self.freq * np.asarray(t, dtype=float) + self.phase)

    def derivative(self, t):
        return self.c1 * self.freq * np.cos(self.freq * np.asarray(t, dtype=float) + self.phase)

    def lower_bound(self, t0, t1) -> float:
        ts = np.linspace(t0, t1, 4097)
        return float(self.value(ts).min())

    def lipschitz(self, t0, t1) -> float:
        return abs(self.c1 * self.freq)


@dataclass(frozen=True)
class CoefficientModel:
    """Regular part plus delta and Heaviside atoms on [0, T].

    Heaviside atoms are truncated at ``T`` (the distribution is supported in
    [0, T]); the regular part is taken on the whole line so that constant
    coefficients are reproduced exactly by the mollifier.
    """

    regular: Constant | Polynomial | Oscillation = Constant(0.0)
    delta_atoms: tuple[tuple[float, float], ...] = ()
    heaviside_atoms: tuple[tuple[float, float], ...] = ()
    T: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "delta_atoms", tuple((float(t), float(w)) for t, w in self.delta_atoms))
        object.__setattr__(self, "heaviside_atoms", tuple((float(t), float(w)) for t, w in self.heaviside_atoms))
        for t0, w in self.delta_atoms + self.heaviside_atoms:
            if not (0.0 <= t0 <= self.T) or not np.isfinite(w):
                raise InvalidInputError(f"atom ({t0}, {w}) outside [0, {self.T}] or non-finite")

    @property
    def has_atoms(self) -> bool:
        return bool(self.delta_atoms or self.heaviside_atoms)

    def check_diffusion(self, a0: float | None = None) -> float:
        """Strict positivity in the distributional sense; returns a lower bound."""
        low = self.regular.lower_bound(-1.0, self.T)
        if any(w < 0 for _, w in self.delta_atoms + self.heaviside_atoms):
            raise PositivityError("diffusion coefficient has a negative atom weight")
        if low <= 0 or (a0 is not None and low < a0):
            raise PositivityError(f"regular part of diffusion coefficient has minimum {low:.6g}")
        return low

    def perturbed(self, regular_shift: float) -> CoefficientModel:
        """Same atoms, regular part shifted by a constant."""
        return CoefficientModel(_shift(self.regular, regular_shift), self.delta_atoms, self.heaviside_atoms, self.T)


def _shift(reg, c):
    if isinstance(reg, Constant):
        return Constant(reg.c + c)
    if isinstance(reg, Polynomial):
        co = list(reg.coeffs) or [0.0]
        co[0] += c
        return Polynomial(tuple(co))
    return Oscillation(reg.c0 + c, reg.c1, reg.freq, reg.phase)


# -- mollifier ---------------------------------------------------------------


def _raw_bump(x):
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    m = (x > 0) & (x < 1)
    xm = x[m]
    out[m] = np.exp(-1.0 / (xm * (1.0 - xm)))
    return out


@lru_cache(maxsize=1)
def _bump_tables():
    mass, _ = quad(lambda x: math.exp(-1.0 / (x * (1.0 - x))), 0.0, 1.0, epsabs=1e-16, epsrel=1e-14, limit=200)
    c = 1.0 / mass
    K = 4096
    nodes = np.linspace(0.0, 1.0, K + 1)
    gx, gw = np.polynomial.legendre.leggauss(20)
    mid = 0.5 * (nodes[:-1] + nodes[1:])
    h = 1.0 / K
    cells = (c * _raw_bump(mid[:, None] + 0.5 * h * gx[None, :]) * gw).sum(axis=1) * 0.5 * h
    cum = np.concatenate([[0.0], np.cumsum(cells)])
    cum /= cum[-1]
    spline = CubicHermiteSpline(nodes, cum, c * _raw_bump(nodes))
    return c, spline


def _composite_gauss(panels=4, degree=32):
    gx, gw = np.polynomial.legendre.leggauss(degree)
    edges = np.linspace(0.0, 1.0, panels + 1)
    h = 1.0 / panels
    x = (edges[:-1, None] + 0.5 * (gx[None, :] + 1.0) * h).ravel()
    w = np.tile(0.5 * h * gw, panels)
    return x, w


@dataclass(frozen=True)
class LogSchedule:
    """omega(eps) = 1 / (1 + |log eps|)."""

    def __call__(self, eps: float) -> float:
        return 1.0 / (1.0 + abs(math.log(eps)))


@dataclass(frozen=True)
class PowerSchedule:
    """omega(eps) = eps**p."""

    p: float = 1.0

    def __call__(self, eps: float) -> float:
        return eps**self.p


@dataclass(frozen=True)
class Mollifier:
    """Right-sided bump psi(t) = c exp(-1/(t(1-t))) on (0, 1) with unit mass."""

    schedule: Callable[[float], float] = field(default_factory=LogSchedule)

    @property
    def normalization(self) -> float:
        return _bump_tables()[0]

    def omega(self, eps: float) -> float:
        return float(self.schedule(eps))

    def psi(self, x):
        return self.normalization * _raw_bump(x)

    def dpsi(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        m = (x > 0) & (x < 1)
        xm = x[m]
        out[m] = self.normalization * np.exp(-1.0 / (xm * (1.0 - xm))) * (1.0 - 2.0 * xm) / (xm * (1.0 - xm)) ** 2
        return out

    def antiderivative(self, x):
        """Psi(x) = int_0^x psi, equal to 0 for x <= 0 and 1 for x >= 1."""
        x = np.asarray(x, dtype=float)
        spline = _bump_tables()[1]
        return np.where(x <= 0.0, 0.0, np.where(x >= 1.0, 1.0, np.clip(spline(np.clip(x, 0.0, 1.0)), 0.0, 1.0)))

    @property
    def sup(self) -> float:
        return self.normalization * math.exp(-4.0)


# -- sampled coefficients ------------------------------------------------------


@dataclass(frozen=True, eq=False)
class SampledCoefficient:
    t: np.ndarray = field(repr=False)
    values: np.ndarray = field(repr=False)
    derivative: np.ndarray = field(repr=False)

    def __post_init__(self):
        for name in ("t", "values", "derivative"):
            arr = np.array(getattr(self, name), dtype=float)
            if arr.shape != np.shape(self.t):
                raise InvalidInputError(f"{name} has shape {arr.shape}, expected {np.shape(self.t)}")
            if not np.all(np.isfinite(arr)):
                raise InvalidInputError(f"{name} contains non-finite entries")
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def sup(self) -> float:
        return float(np.abs(self.values).max())

    @property
    def sup_derivative(self) -> float:
        return float(np.abs(self.derivative).max())

    def __add__(self, other: SampledCoefficient) -> SampledCoefficient:
        if not np.array_equal(self.t, other.t):
            raise InvalidInputError("sampled coefficients live on different time grids")
        return SampledCoefficient(self.t, self.values + other.values, self.derivative + other.derivative)

    def shifted(self, c: float) -> SampledCoefficient:
        return SampledCoefficient(self.t, self.values + c, self.derivative)

    def to_csv(self) -> str:
        from .io import fmt

        rows = ["t,value,derivative"]
        rows += [f"{fmt(t)},{fmt(v)},{fmt(d)}" for t, v, d in zip(self.t, self.values, self.derivative)]
        return "\n".join(rows) + "\n"


def uniform_grid(T: float, n_t: int) -> np.ndarray:
    return np.linspace(0.0, T, n_t + 1)


def resolving_steps(T: float, omega: float, base: int = 512) -> int:
    """Smallest ``base * 2**k`` steps with dt <= min(omega/16, T/base)."""
    n = base
    while T / n > omega / 16.0:
        n *= 2
    return n


def sample(m: CoefficientModel, grid) -> SampledCoefficient:
    """Classical samples of an atom-free model."""
    if m.has_atoms:
        raise InvalidInputError("a model with atoms has no pointwise samples; regularize it")
    t = np.asarray(grid, dtype=float)
    return SampledCoefficient(t, m.regular.value(t), m.regular.derivative(t))


def regularize(m: CoefficientModel, eps: float, moll: Mollifier | None = None, grid=None) -> SampledCoefficient:
    """Sample a_eps = m * psi_{omega(eps)} and its derivative on ``grid``.

    ``grid`` must be uniform with spacing at most omega(eps)/16; when
    omitted a resolving grid on [0, m.T] is built.
    """
    moll = moll or Mollifier()
    if not (0.0 < eps <= 1.0):
        raise InvalidInputError(f"eps must lie in (0, 1], got {eps!r}")
    w = moll.omega(eps)
    if grid is None:
        grid = uniform_grid(m.T, resolving_steps(m.T, w))
    t = np.asarray(grid, dtype=float)
    if t.size >= 2:
        dt = np.max(np.diff(t))
        if dt > w / 16.0 * (1 + 1e-12):
            raise GridResolutionError(f"time step {dt:.4g} does not resolve omega={w:.4g} (need <= omega/16)")

    x, wq = _composite_gauss()
    kern = wq * moll.psi(x)
    shifted = t[:, None] - w * x[None, :]
    val = m.regular.value(shifted) @ kern
    der = m.regular.derivative(shifted) @ kern

    for t0, wt in m.delta_atoms:
        z = (t - t0) / w
        val = val + wt * moll.psi(z) / w
        der = der + wt * moll.dpsi(z) / w**2
    for t0, wt in m.heaviside_atoms:
        z0 = (t - t0) / w
        z1 = (t - m.T) / w
        # clip rounding-level undershoot of the interpolated antiderivative
        val = val + wt * np.maximum(moll.antiderivative(z0) - moll.antiderivative(z1), 0.0)
        der = der + wt * (moll.psi(z0) - moll.psi(z1)) / w
    return SampledCoefficient(t, val, der)


def strict_positivity_check(c: SampledCoefficient) -> float:
    """Grid minimum of a diffusion coefficient, which must be positive."""
    low = float(np.min(c.values))
    if not low > 0.0:
        raise PositivityError(f"coefficient minimum {low:.6g} is not positive")
    return low


@dataclass(frozen=True)
class ModeratenessFit:
    value_slope: float
    derivative_slope: float
    value_residual: float
    derivative_residual: float


def moderateness_bounds(eps_values, samples) -> ModeratenessFit:
    """Least-squares growth exponents of sup|a_eps| and sup|a_eps'| in 1/eps.

    Residuals are root-mean-square deviations in log space.
    """
    eps = np.asarray(eps_values, dtype=float)
    if eps.size < 4 or len(samples) != eps.size:
        raise InvalidInputError("need at least 4 eps values, one sample each")
    if np.log10(eps.max() / eps.min()) < 2.0 - 1e-12:
        raise InvalidInputError("eps grid must span at least two decades")
    x = np.log(1.0 / eps)
    fits = []
    for key in ("sup", "sup_derivative"):
        y = np.log(np.maximum([getattr(s, key) for s in samples], np.finfo(float).tiny))
        slope, icpt = np.polyfit(x, y, 1)
        resid = float(np.sqrt(np.mean((y - (slope * x + icpt)) ** 2)))
        fits.append((float(slope), resid))
    return ModeratenessFit(fits[0][0], fits[1][0], fits[0][1], fits[1][1])
