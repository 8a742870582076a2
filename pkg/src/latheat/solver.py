"""
Integrating-factor solver for the transformed Cauchy problem.

After the lattice Fourier transform every frequency decouples into

    d/dt u_hat + (a(t) nu^2(xi) + b(t)) u_hat = f_hat(t, xi),

which is solved in closed form:

    u_hat(t) = exp(-Phi(t)) u0_hat + int_0^t exp(-(Phi(t) - Phi(tau))) f_hat(tau) dtau,
    Phi(t, xi) = nu^2(xi) A(t) + B(t),  A = int a,  B = int b.

A and B come from composite Simpson on the sampled coefficients.  The
Duhamel integral uses the same Simpson panels with the panel's mean decay
rate integrated exactly (exponentially fitted Simpson), so stiff modes
with nu^2 dt >> 1 stay accurate.  Only differences of Phi are
exponentiated: high frequencies underflow to zero instead of overflowing,
and there is no stability constraint on the time step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
from scipy.integrate import simpson

from .coefficients import SampledCoefficient, strict_positivity_check
from .errors import InvalidInputError, NumericalError, SpecMismatchError
from .fourier import forward_array, inverse_array
from .fraclap import continuous_symbol, symbol
from .lattice import GridFunction, LatticeSpec, SpectralFunction, weighted_inner_product, weighted_norm

_EXP_LIMIT = 700.0


@dataclass(frozen=True)
class SolveConfig:
    """Time discretisation and problem constants for one solve.

    ``output_times`` must be nodes of the uniform grid with an even index
    (Simpson panel boundaries).  The default is nine equispaced times when
    ``n_t`` is a multiple of 16, otherwise every even node.
    """

    T: float
    n_t: int
    alpha: float
    s: float = 0.0
    symbol_choice: str = "lattice"
    output_times: tuple[float, ...] | None = None

    def __post_init__(self):
        if not (np.isfinite(self.T) and self.T >= 0):
            raise InvalidInputError(f"final time must be nonnegative, got {self.T!r}")
        if int(self.n_t) != self.n_t or self.n_t < 2 or self.n_t % 2:
            raise InvalidInputError(f"n_t must be an even integer >= 2, got {self.n_t!r}")
        if self.symbol_choice not in ("lattice", "continuous"):
            raise InvalidInputError(f"symbol_choice must be 'lattice' or 'continuous', got {self.symbol_choice!r}")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise InvalidInputError(f"alpha must be positive, got {self.alpha!r}")
        object.__setattr__(self, "n_t", int(self.n_t))
        self.output_indices()

    @property
    def dt(self) -> float:
        return self.T / self.n_t

    def grid(self) -> np.ndarray:
        return np.linspace(0.0, self.T, self.n_t + 1)

    def output_indices(self) -> np.ndarray:
        if self.output_times is None:
            if self.n_t % 16 == 0:
                return np.arange(0, self.n_t + 1, self.n_t // 8)
            return np.arange(0, self.n_t + 1, 2)
        idx = []
        for t in self.output_times:
            i = int(round(t / self.dt)) if self.T > 0 else 0
            if not (0 <= i <= self.n_t) or abs(i * self.dt - t) > 1e-9 * max(self.T, 1.0):
                raise InvalidInputError(f"output time {t} is not a grid node")
            if i % 2:
                raise InvalidInputError(f"output time {t} falls on an odd node; use an even node")
            idx.append(i)
        return np.array(sorted(set(idx)), dtype=int)


@dataclass(frozen=True, eq=False)
class Trajectory:
    times: np.ndarray
    states: list[GridFunction] = field(repr=False)
    spectral_states: list[SpectralFunction] | None = field(default=None, repr=False)
    config: SolveConfig | None = None
    indices: np.ndarray | None = field(default=None, repr=False)

    def state_at(self, t: float) -> GridFunction:
        return self.states[self._index(t)]

    def _index(self, t: float) -> int:
        hits = np.flatnonzero(np.isclose(self.times, t, rtol=0, atol=1e-12 * max(1.0, float(np.max(self.times)))))
        if hits.size == 0:
            raise InvalidInputError(f"t={t} is not an output time")
        return int(hits[0])

    def norms(self, s: float = 0.0) -> np.ndarray:
        return np.array([weighted_norm(u, s) for u in self.states])


@dataclass(frozen=True, eq=False)
class SeparableSource:
    """f(t, k) = g(t) F(k); ``time_factor`` is sampled on the solve grid or a callable."""

    profile: GridFunction
    time_factor: SampledCoefficient | Callable[[np.ndarray], np.ndarray]

    def factor(self, t: np.ndarray) -> np.ndarray:
        if isinstance(self.time_factor, SampledCoefficient):
            if self.time_factor.t.shape != t.shape or not np.allclose(self.time_factor.t, t, rtol=0, atol=1e-12):
                raise InvalidInputError("source time factor is sampled on a different grid")
            return self.time_factor.values
        return np.broadcast_to(np.asarray(self.time_factor(t), dtype=float), t.shape)


def _source_terms(source):
    """Normalise a source argument to a tuple of separable terms, or None."""
    if source is None:
        return ()
    if isinstance(source, SeparableSource):
        return (source,)
    if isinstance(source, (tuple, list)) and all(isinstance(x, SeparableSource) for x in source):
        return tuple(source)
    return None


def _source_hats(source, spec: LatticeSpec, t: np.ndarray):
    """Callable i -> f_hat at node i, or None for a zero source.

    ``source`` is None, a :class:`SeparableSource`, a sequence of them
    (summed), or a callable ``t -> GridFunction``.
    """
    terms = _source_terms(source)
    if terms == ():
        return None
    if terms is not None:
        if any(term.profile.spec != spec for term in terms):
            raise SpecMismatchError("source profile lives on a different lattice")
        parts = [(term.factor(t), forward_array(spec, term.profile.values)) for term in terms]
        return lambda i: sum(g[i] * base for g, base in parts)
    if callable(source):
        def at(i):
            f = source(float(t[i]))
            if not isinstance(f, GridFunction) or f.spec != spec:
                raise SpecMismatchError("source callable must return GridFunctions on the solve lattice")
            return forward_array(spec, f.values)
        return at
    raise InvalidInputError(f"unsupported source {type(source).__name__}")


def cumulative_simpson_nodes(y: np.ndarray, h: float) -> np.ndarray:
    """Running integral at every node.

    Even nodes get composite Simpson; an odd node adds the integral of the
    panel's interpolating parabola over its first half.
    """
    n = y.size - 1
    out = np.zeros(n + 1)
    if h == 0:
        return out
    y0, y1, y2 = y[0:-2:2], y[1:-1:2], y[2::2]
    panel = h / 3.0 * (y0 + 4.0 * y1 + y2)
    out[2::2] = np.cumsum(panel)
    out[1::2] = out[0:-2:2] + h / 12.0 * (5.0 * y0 + 8.0 * y1 - y2)
    return out


def _exp_moments(z: np.ndarray):
    """m_p(z) = int_0^2 y^p exp(-z y) dy for p = 0, 1, 2."""
    z = np.asarray(z, dtype=float)
    m = np.empty((3,) + z.shape)
    small = np.abs(z) < 1.0
    zs = z[small]
    # Taylor series; 40 terms reach rounding for |z| < 1.
    term = np.ones_like(zs)
    acc = np.zeros((3,) + zs.shape)
    for k in range(40):
        for p in range(3):
            acc[p] += term * 2.0 ** (p + k + 1) / (p + k + 1)
        term = term * (-zs) / (k + 1)
    m[:, small] = acc
    zb = z[~small]
    e = np.exp(-2.0 * zb)
    m[0, ~small] = (1.0 - e) / zb
    m[1, ~small] = (1.0 - e * (1.0 + 2.0 * zb)) / zb**2
    m[2, ~small] = (2.0 - e * (2.0 + 4.0 * zb + 4.0 * zb**2)) / zb**3
    return m


def exponential_simpson_weights(z, h: float):
    """Weights of the exponentially fitted Simpson rule on one panel.

    Integrates ``exp(-lam (t_2 - tau)) q(tau)`` over [t_0, t_2] exactly for
    the quadratic ``q`` through the three panel nodes, with ``z = lam * h``.
    Returns weights for the nodes t_0, t_1, t_2; z -> 0 recovers Simpson's
    (h/3, 4h/3, h/3).
    """
    m0, m1, m2 = _exp_moments(z)
    w2 = h * (m2 - 3.0 * m1 + 2.0 * m0) / 2.0
    w1 = h * (2.0 * m1 - m2)
    w0 = h * (m2 - m1) / 2.0
    return w0, w1, w2


def _check_grid(c: SampledCoefficient, grid: np.ndarray, name: str):
    if c.t.shape != grid.shape or not np.allclose(c.t, grid, rtol=0, atol=1e-12 * max(1.0, grid[-1])):
        raise InvalidInputError(f"coefficient {name} is not sampled on the solve grid")


def solve(u0: GridFunction, source, a: SampledCoefficient, b: SampledCoefficient, cfg: SolveConfig, *, keep_spectral: bool = False) -> Trajectory:
    """Solve the lattice (or continuous-symbol) heat problem on ``cfg``'s grid."""
    spec = u0.spec
    grid = cfg.grid()
    _check_grid(a, grid, "a")
    _check_grid(b, grid, "b")
    strict_positivity_check(a)

    nu2 = (symbol if cfg.symbol_choice == "lattice" else continuous_symbol)(spec, cfg.alpha).values
    h = cfg.dt
    A = cumulative_simpson_nodes(a.values, h)
    B = cumulative_simpson_nodes(b.values, h)
    if np.any(-B > _EXP_LIMIT):
        raise NumericalError("potential b drives exp(-int b) beyond the representable range")

    u0_hat = forward_array(spec, u0.values)
    f_at = _source_hats(source, spec, grid)
    out_idx = cfg.output_indices()
    wanted = set(int(i) for i in out_idx)

    def decay(j, k):
        # exp(-(Phi_j - Phi_k)) evaluated from the scalar increments.
        return np.exp(-(nu2 * (A[j] - A[k]) + (B[j] - B[k])))

    hats: dict[int, np.ndarray] = {}
    duh = np.zeros(spec.shape, dtype=complex)
    f_prev = f_at(0) if f_at is not None else None
    for i in range(0, cfg.n_t + 1, 2):
        if i > 0 and f_at is not None:
            f_mid, f_next = f_at(i - 1), f_at(i)
            dphi = nu2 * (A[i] - A[i - 2]) + (B[i] - B[i - 2])
            dphi_mid = nu2 * (A[i] - A[i - 1]) + (B[i] - B[i - 1])
            w0, w1, w2 = exponential_simpson_weights(0.5 * dphi, h)
            # midpoint integrand with the panel's mean exponential rate divided out
            g_mid = np.exp(0.5 * dphi - dphi_mid) * f_mid
            duh = np.exp(-dphi) * duh + w0 * f_prev + w1 * g_mid + w2 * f_next
            f_prev = f_next
        if i in wanted:
            hats[i] = decay(i, 0) * u0_hat + duh

    states, spectral = [], []
    for i in out_idx:
        vals = hats[int(i)]
        if not np.all(np.isfinite(vals)):
            raise NumericalError(f"non-finite solution at t={grid[i]}")
        states.append(GridFunction(spec, inverse_array(spec, vals)))
        if keep_spectral:
            spectral.append(SpectralFunction(spec, vals))
    return Trajectory(grid[out_idx], states, spectral if keep_spectral else None, cfg, out_idx)


# -- energy and the well-posedness estimate -----------------------------------


def _node_value(c: SampledCoefficient, t: float) -> float:
    hits = np.flatnonzero(np.isclose(c.t, t, rtol=0, atol=1e-12 * max(1.0, float(c.t[-1]))))
    if hits.size == 0:
        raise InvalidInputError(f"t={t} is not a node of the coefficient grid")
    return float(c.values[hits[0]])


def energy(traj: Trajectory, a: SampledCoefficient, s: float, t: float) -> float:
    """E(t) = a(t) ||u_hat(t)||_{H^s}^2, evaluated through Plancherel."""
    u = traj.state_at(t)
    return _node_value(a, t) * weighted_norm(u, s) ** 2


def wellposedness_constant(a: SampledCoefficient, b: SampledCoefficient, T: float) -> float:
    """C = a0^{-1} ||a|| exp(a0^{-1} (||a_t|| + 2 ||a|| ||b|| + ||a||) T) with grid sup-norms."""
    a0 = strict_positivity_check(a)
    a_sup, at_sup, b_sup = a.sup, a.sup_derivative, b.sup
    return a_sup / a0 * float(np.exp((at_sup + 2.0 * a_sup * b_sup + a_sup) * T / a0))


def source_l2_norm_sq(source, spec: LatticeSpec, grid: np.ndarray, s: float) -> float:
    """||f||^2 in L^2([0,T]; l^2_s) by Simpson on the grid nodes."""
    terms = _source_terms(source)
    if terms == ():
        return 0.0
    if terms is not None:
        gs = [term.factor(grid) for term in terms]
        node = np.zeros(grid.shape)
        for i, ti in enumerate(terms):
            for j, tj in enumerate(terms):
                gram = weighted_inner_product(ti.profile, tj.profile, s).real
                node = node + gs[i] * gs[j] * gram
    else:
        node = np.array([weighted_norm(source(float(t)), s) ** 2 for t in grid])
    if grid[-1] == grid[0]:
        return 0.0
    return float(simpson(node, x=grid))


@dataclass(frozen=True)
class EstimateReport:
    times: np.ndarray
    ratios: np.ndarray
    constant: float
    max_ratio: float
    passed: bool


def verify_estimate(traj: Trajectory, u0: GridFunction, source, a: SampledCoefficient, b: SampledCoefficient, s: float, tol: float = 1e-8) -> EstimateReport:
    """Ratio ||u(t)||_s^2 / (C (||u0||_s^2 + ||f||^2)) at every output time."""
    cfg = traj.config
    grid = cfg.grid()
    C = wellposedness_constant(a, b, cfg.T)
    rhs = C * (weighted_norm(u0, s) ** 2 + source_l2_norm_sq(source, u0.spec, grid, s))
    lhs = traj.norms(s) ** 2
    ratios = lhs / rhs if rhs > 0 else np.where(lhs > 0, np.inf, 0.0)
    mx = float(np.max(ratios))
    return EstimateReport(traj.times, ratios, C, mx, mx <= 1.0 + tol)


def l2_time_norm(times, norms) -> float:
    """sqrt(int ||u(t)||^2 dt) by Simpson over the output times."""
    times = np.asarray(times, dtype=float)
    vals = np.asarray(norms, dtype=float) ** 2
    if times.size < 2 or times[-1] == times[0]:
        return 0.0
    return float(np.sqrt(simpson(vals, x=times)))
