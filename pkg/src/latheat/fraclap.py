"""
Discrete fractional Laplacian (-L_hbar)^alpha on the truncated lattice.

Two independent routes are provided:

* stencil form: coefficients a_j from the periodic trapezoidal rule applied
  to ``[sum_l 4 sin^2(pi xi_l)]^alpha exp(-2 pi i j.xi)`` over the unit cube,
  applied as a wrap-around convolution;
* spectral form: the Fourier multiplier ``[sum_l 4 sin^2(pi hbar xi_l)]^alpha``
  on the dual grid.

Stencil kernels are cached on disk keyed by (alpha, n, R, M).
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy import fft as sfft

from . import io
from .errors import AliasingError, InvalidInputError, SpecMismatchError, SymmetryError
from .fourier import forward_array, inverse_array
from .lattice import GridFunction, LatticeSpec

IMAG_TOL = 1e-13
CACHE_ENV = "LATTICE_HEAT_CACHE"


@dataclass(frozen=True, eq=False)
class StencilKernel:
    """Coefficients a_j for ``|j|_inf <= R``, stored in natural index order.

    ``periodic`` kernels carry the full quadrature kernel folded onto the
    period 2R (coefficients on the shell ``|j_l| = R`` split evenly between
    the two representatives), so on a lattice with N = 2R they reproduce the
    untruncated operator.  ``tail_mass`` is ``sum_{|j| > R} |a_j|`` over the
    M-sample kernel and is zero for folded kernels.
    """

    alpha: float
    n: int
    R: int
    M: int
    coeffs: np.ndarray = field(repr=False)
    tail_mass: float = 0.0
    periodic: bool = False

    def __post_init__(self):
        arr = np.array(self.coeffs, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "coeffs", arr)

    def __getitem__(self, j) -> float:
        j = np.atleast_1d(np.asarray(j, dtype=int))
        if j.shape != (self.n,) or np.any(np.abs(j) > self.R):
            raise IndexError(f"index {tuple(j)} outside |j| <= {self.R}")
        return float(self.coeffs[tuple(j + self.R)])

    def offsets(self) -> np.ndarray:
        return np.arange(-self.R, self.R + 1)

    @property
    def row_sum(self) -> float:
        return float(self.coeffs.sum())


@dataclass(frozen=True, eq=False)
class SymbolField:
    """Multiplier values on the dual grid.

    ``values`` holds the scaled symbol: nu^2 = hbar^{-2 alpha}[sum 4 sin^2]^alpha
    for ``kind == "lattice"`` and |2 pi xi|^{2 alpha} for ``kind == "continuous"``.
    """

    spec: LatticeSpec
    alpha: float
    values: np.ndarray = field(repr=False)
    kind: str = "lattice"

    def __post_init__(self):
        arr = np.array(self.values, dtype=float)
        arr.flags.writeable = False
        object.__setattr__(self, "values", arr)

    def at(self, m) -> float:
        """Value at dual-grid multi-index ``m``."""
        return float(self.values[self.spec.index_of(m)])


def default_quadrature_points(R: int) -> int:
    return 8 * max(R, 64)


def _check_alpha(alpha):
    if not (np.isfinite(alpha) and alpha > 0):
        raise InvalidInputError(f"alpha must be positive, got {alpha!r}")


def quadrature_kernel(alpha: float, n: int, M: int) -> np.ndarray:
    """All M^n trapezoidal-rule coefficients, FFT order (index 0 is j = 0).

    Entry j equals the M-periodisation sum_r a_{j + rM} of the exact
    coefficients.
    """
    q = (np.arange(M) - M // 2) / M
    s1 = 4.0 * np.sin(np.pi * q) ** 2
    total = np.zeros((M,) * n)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = M
        total = total + s1.reshape(shape)
    sym = total**alpha
    raw = sfft.fftn(sfft.ifftshift(sym)) / M**n
    scale = max(1.0, float(np.abs(raw.real).max()))
    if np.abs(raw.imag).max() > IMAG_TOL * scale:
        raise SymmetryError(f"imaginary quadrature residue {np.abs(raw.imag).max():.3e}")
    return raw.real


def stencil_coefficients(alpha: float, n: int, R: int, M: int | None = None, *, periodic: bool = False) -> StencilKernel:
    """Quadrature coefficients of the discrete fractional Laplacian.

    Parameters
    ----------
    alpha : float
        Order of the operator.
    n : int
        Dimension.
    R : int
        Kernel radius; coefficients kept for ``|j|_inf <= R``.
    M : int, optional
        Quadrature points per axis, default ``8 * max(R, 64)``.
    periodic : bool
        Fold the whole M-sample kernel onto the period 2R.  Requires M to be
        a multiple of 2R.

    Raises
    ------
    AliasingError
        If ``M < 2R + 2`` (or M is not a multiple of 2R when ``periodic``).
    """
    _check_alpha(alpha)
    if int(n) != n or n < 1:
        raise InvalidInputError(f"dimension must be a positive integer, got {n!r}")
    if int(R) != R or R < 1:
        raise InvalidInputError(f"radius must be a positive integer, got {R!r}")
    M = default_quadrature_points(R) if M is None else int(M)
    if M < 2 * R + 2:
        raise AliasingError(f"M={M} too small for radius R={R}: need M >= {2 * R + 2}")
    if periodic and M % (2 * R):
        raise AliasingError(f"periodic folding needs M a multiple of 2R={2 * R}, got M={M}")
    full = quadrature_kernel(alpha, n, M)

    if periodic:
        P = 2 * R
        folded = full.reshape(sum(((M // P, P) for _ in range(n)), ())).sum(axis=tuple(range(0, 2 * n, 2)))
        idx = np.arange(-R, R + 1)
        coeffs = folded[np.ix_(*([idx % P] * n))]
        shell = sum(np.meshgrid(*([(np.abs(idx) == R).astype(int)] * n), indexing="ij"))
        coeffs = coeffs / 2.0**shell
        return StencilKernel(alpha, n, R, M, coeffs, 0.0, True)

    nat = sfft.fftshift(full)
    c = M // 2
    window = tuple(slice(c - R, c + R + 1) for _ in range(n))
    coeffs = nat[window]
    tail = float(np.abs(nat).sum() - np.abs(coeffs).sum())
    return StencilKernel(alpha, n, R, M, coeffs, max(tail, 0.0), False)


def apply_stencil(f: GridFunction, kernel: StencilKernel) -> GridFunction:
    """Wrap-around convolution ``sum_j a_j f(k + j hbar)`` (no hbar^{-2alpha})."""
    spec = f.spec
    if kernel.n != spec.n:
        raise SpecMismatchError(f"kernel dimension {kernel.n} != lattice dimension {spec.n}")
    if kernel.periodic and 2 * kernel.R != spec.N:
        raise SpecMismatchError(f"periodic kernel has period {2 * kernel.R}, lattice has N={spec.N}")
    N = spec.N
    # Fold onto residues mod N first so each lattice shift is done once.
    weights: dict[tuple[int, ...], float] = {}
    offs = kernel.offsets()
    for j in itertools.product(range(2 * kernel.R + 1), repeat=spec.n):
        a = kernel.coeffs[j]
        if a == 0.0:
            continue
        key = tuple(int(offs[i]) % N for i in j)
        weights[key] = weights.get(key, 0.0) + a
    out = np.zeros(spec.shape, dtype=complex)
    axes = tuple(range(spec.n))
    for shift in sorted(weights):
        out += weights[shift] * np.roll(f.values, tuple(-s for s in shift), axis=axes)
    return GridFunction(spec, out)


def _sin_sum(spec: LatticeSpec) -> np.ndarray:
    """``sum_l 4 sin^2(pi hbar xi_l)`` on the dual grid."""
    s1 = 4.0 * np.sin(np.pi * spec.hbar * spec.axis_frequencies()) ** 2
    total = np.zeros(spec.shape)
    for axis in range(spec.n):
        shape = [1] * spec.n
        shape[axis] = spec.N
        total = total + s1.reshape(shape)
    return total


def symbol(spec: LatticeSpec, alpha: float) -> SymbolField:
    """Scaled lattice symbol nu^2(xi) = hbar^{-2 alpha}[sum 4 sin^2(pi hbar xi_l)]^alpha."""
    _check_alpha(alpha)
    vals = spec.hbar ** (-2.0 * alpha) * _sin_sum(spec) ** alpha
    return SymbolField(spec, float(alpha), vals, "lattice")


def continuous_symbol(spec: LatticeSpec, alpha: float) -> SymbolField:
    """Euclidean symbol |2 pi xi|^{2 alpha} sampled on the dual grid."""
    _check_alpha(alpha)
    r2 = sum(x * x for x in spec.frequencies())
    vals = (4.0 * np.pi**2 * r2) ** alpha
    return SymbolField(spec, float(alpha), vals, "continuous")


def apply_spectral(f: GridFunction, sym: SymbolField, scaled: bool = False) -> GridFunction:
    """Apply the multiplier: ``inverse(sym * forward(f))``.

    With ``scaled=False`` the factor hbar^{2 alpha} is put back so the lattice
    symbol gives (-L_hbar)^alpha itself, directly comparable to
    :func:`apply_stencil`.
    """
    if f.spec != sym.spec:
        raise SpecMismatchError(f"lattice mismatch: {f.spec} vs {sym.spec}")
    mult = sym.values if scaled else sym.values * f.spec.hbar ** (2.0 * sym.alpha)
    return GridFunction(f.spec, inverse_array(f.spec, mult * forward_array(f.spec, f.values)))


# -- kernel cache ----------------------------------------------------------


def cache_dir(path: str | os.PathLike | None = None) -> Path:
    if path is not None:
        return Path(path)
    env = os.environ.get(CACHE_ENV)
    if env:
        return Path(env)
    return Path.home() / ".cache" / "latheat"


def cache_path(alpha: float, n: int, R: int, M: int, directory=None) -> Path:
    key = f"kernel_a{float(alpha).hex()}_n{n}_R{R}_M{M}.lhkc"
    return cache_dir(directory) / key


def cached_stencil_coefficients(alpha: float, n: int, R: int, M: int | None = None, directory=None) -> tuple[StencilKernel, bool]:
    """Load the kernel from the cache, computing and storing it when absent.

    Returns the kernel and whether it was served from the cache.
    """
    M = default_quadrature_points(R) if M is None else int(M)
    path = cache_path(alpha, n, R, M, directory)
    if path.exists():
        return io.read_kernel(path), True
    kernel = stencil_coefficients(alpha, n, R, M)
    path.parent.mkdir(parents=True, exist_ok=True)
    io.write_kernel(path, kernel)
    return kernel, False
