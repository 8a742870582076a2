"""
Net experiments: very weak solutions, uniqueness under negligible
perturbations, consistency with classical solutions, and the
semi-classical limit hbar -> 0.

Every experiment returns a :class:`NetReport` holding the parameter grid
(eps or hbar, strictly decreasing), the measured norms per report time,
and a log-log rate fitted by ordinary least squares on the last half of
the grid.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np

from .coefficients import (
    CoefficientModel,
    Constant,
    Mollifier,
    SampledCoefficient,
    regularize,
    resolving_steps,
    sample,
    uniform_grid,
)
from .errors import InvalidInputError, LatticeHeatError
from .fourier import inverse_array
from .io import fmt
from .lattice import GridFunction, LatticeSpec, SpectralFunction, weighted_norm
from .solver import SeparableSource, SolveConfig, Trajectory, l2_time_norm, solve


def default_eps_grid() -> np.ndarray:
    return 2.0 ** -np.arange(2, 13)


def default_hbar_grid() -> np.ndarray:
    return 2.0 ** -np.arange(1, 7)


@dataclass(frozen=True)
class RateFit:
    slope: float
    stderr: float
    intercept: float
    residual: float
    points: int


def fit_rate(x, y, tail: bool = True) -> RateFit:
    """OLS slope of ``log y`` against ``log x``.

    With ``tail`` only the last ceil(len/2) points are used.  ``stderr`` is
    the usual standard error of the slope (nan with two points); ``residual``
    is the RMS deviation in log space.
    """
    x = np.log(np.asarray(x, dtype=float))
    y = np.log(np.asarray(y, dtype=float))
    if tail:
        k = math.ceil(x.size / 2)
        x, y = x[-k:], y[-k:]
    if x.size < 2:
        raise InvalidInputError("need at least two points to fit a rate")
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, icpt), *_ = np.linalg.lstsq(A, y, rcond=None)
    r = y - (slope * x + icpt)
    dof = x.size - 2
    if dof > 0:
        stderr = float(np.sqrt(np.sum(r**2) / dof / np.sum((x - x.mean()) ** 2)))
    else:
        stderr = float("nan")
    return RateFit(float(slope), stderr, float(icpt), float(np.sqrt(np.mean(r**2))), int(x.size))


def _json_float(x: float):
    """Finite floats pass through; nan becomes null and infinities strings."""
    x = float(x)
    if math.isnan(x):
        return None
    return x if math.isfinite(x) else ("inf" if x > 0 else "-inf")


@dataclass(eq=False)
class NetReport:
    """Outcome of one parameter sweep.

    ``norms`` has one row per parameter value and one column per report
    time; ``values`` is the scalar fitted per parameter value (an L^2-in-time
    norm, or a max over time for the semi-classical limit).
    """

    kind: str
    parameter: str
    parameter_grid: np.ndarray
    times: np.ndarray
    norms: np.ndarray
    values: np.ndarray
    fit_variable: str
    fit_x: np.ndarray
    fitted_slope: float
    slope_stderr: float
    fit_residual: float
    passed: dict[str, bool] = field(default_factory=dict)
    failures: dict[float, str] = field(default_factory=dict)
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        g = np.asarray(self.parameter_grid, dtype=float)
        if g.size >= 2 and not np.all(np.diff(g) < 0):
            raise InvalidInputError("parameter grid must be strictly decreasing")

    @property
    def ok(self) -> bool:
        return all(self.passed.values())

    def report_csv(self) -> str:
        head = [self.parameter, "value"] + [f"t={fmt(t)}" for t in self.times]
        rows = [",".join(head)]
        for p, v, row in zip(self.parameter_grid, self.values, self.norms):
            rows.append(",".join([fmt(p), fmt(v)] + [fmt(x) for x in row]))
        return "\n".join(rows) + "\n"

    def fit_dict(self) -> dict:
        return {
            "kind": self.kind,
            "parameter": self.parameter,
            "fit_variable": self.fit_variable,
            "slope": _json_float(self.fitted_slope),
            "stderr": _json_float(self.slope_stderr),
            "residual": _json_float(self.fit_residual),
            "pass": dict(self.passed),
            "failures": {fmt(k): v for k, v in self.failures.items()},
            "extra": {k: (float(v) if isinstance(v, (float, np.floating)) else v) for k, v in self.extra.items()},
        }

    def gnuplot_script(self, csv_name: str = "report.csv") -> str:
        return "\n".join(
            [
                "set datafile separator ','",
                "set logscale xy",
                f"set xlabel '{self.parameter}'",
                f"set ylabel '{self.kind} norm'",
                f"set title 'fitted slope {self.fitted_slope:.4f} vs {self.fit_variable}'",
                f"plot '{csv_name}' using 1:2 skip 1 with linespoints title '{self.kind}'",
                "",
            ]
        )


# -- problem description --------------------------------------------------------


@dataclass(frozen=True, eq=False)
class HeatProblem:
    """Data of the lattice Cauchy problem on a fixed lattice.

    The source is ``source_time(t) * source_profile(k)``; a missing
    ``source_time`` means a time-constant source.
    """

    spec: LatticeSpec
    alpha: float
    T: float
    u0: GridFunction
    a: CoefficientModel = CoefficientModel(Constant(1.0))
    b: CoefficientModel = CoefficientModel(Constant(0.0))
    s: float = 0.0
    source_profile: GridFunction | None = None
    source_time: CoefficientModel | None = None
    report_points: int = 32

    def __post_init__(self):
        if self.u0.spec != self.spec:
            raise InvalidInputError("u0 does not live on the problem lattice")
        if self.source_profile is not None and self.source_profile.spec != self.spec:
            raise InvalidInputError("source profile does not live on the problem lattice")
        if 256 % self.report_points:
            raise InvalidInputError("report_points must divide 256")

    def report_times(self) -> tuple[float, ...]:
        return tuple(self.T * i / self.report_points for i in range(self.report_points + 1))


@dataclass(frozen=True, eq=False)
class Inputs:
    a: SampledCoefficient
    b: SampledCoefficient
    source: tuple
    cfg: SolveConfig


def _config(problem: HeatProblem, n_t: int, symbol_choice="lattice", output_times=None) -> SolveConfig:
    out = problem.report_times() if output_times is None else output_times
    return SolveConfig(problem.T, n_t, problem.alpha, problem.s, symbol_choice, out)


def regularized_inputs(problem: HeatProblem, eps: float, moll: Mollifier, symbol_choice="lattice", output_times=None) -> Inputs:
    """Sample a_eps, b_eps, f_eps on a grid resolving omega(eps)."""
    n_t = resolving_steps(problem.T, moll.omega(eps))
    grid = uniform_grid(problem.T, n_t)
    a = regularize(problem.a, eps, moll, grid)
    b = regularize(problem.b, eps, moll, grid)
    return Inputs(a, b, _source(problem, grid, lambda m: regularize(m, eps, moll, grid)), _config(problem, n_t, symbol_choice, output_times))


def classical_inputs(problem: HeatProblem, n_t: int = 512, symbol_choice="lattice", output_times=None) -> Inputs:
    """Pointwise samples of atom-free coefficients."""
    grid = uniform_grid(problem.T, n_t)
    return Inputs(sample(problem.a, grid), sample(problem.b, grid), _source(problem, grid, lambda m: sample(m, grid)), _config(problem, n_t, symbol_choice, output_times))


def _source(problem, grid, sampler) -> tuple:
    if problem.source_profile is None:
        return ()
    if problem.source_time is None:
        g = SampledCoefficient(grid, np.ones_like(grid), np.zeros_like(grid))
    else:
        g = sampler(problem.source_time)
    return (SeparableSource(problem.source_profile, g),)


def _run(problem: HeatProblem, inp: Inputs) -> Trajectory:
    return solve(problem.u0, inp.source, inp.a, inp.b, inp.cfg)


def _l2(traj: Trajectory, s: float) -> tuple[np.ndarray, float]:
    norms = traj.norms(s)
    return norms, l2_time_norm(traj.times, norms)


def _diff_l2(t1: Trajectory, t2: Trajectory, s: float) -> tuple[np.ndarray, float]:
    norms = np.array([weighted_norm(u - v, s) for u, v in zip(t1.states, t2.states)])
    return norms, l2_time_norm(t1.times, norms)


def _check_eps(eps_grid) -> np.ndarray:
    g = np.asarray(eps_grid, dtype=float)
    if g.size < 4:
        raise InvalidInputError("eps grid needs at least 4 points")
    if np.any(g <= 0) or np.any(g > 1) or not np.all(np.diff(g) < 0):
        raise InvalidInputError("eps grid must be strictly decreasing within (0, 1]")
    return g


# -- very weak solutions -------------------------------------------------------------


def very_weak_solve(problem: HeatProblem, eps_grid=None, moll: Mollifier | None = None, residual_tol: float = 0.1):
    """Solve the regularised problem for each eps.

    Returns ``(trajectories, report)``; ``trajectories`` maps eps to its
    :class:`Trajectory`.  Positivity failures are recorded per eps and the
    sweep continues.  The moderateness verdict asks for a finite fitted
    growth exponent of ||u_eps||_{L^2([0,T]; l^2_s)} in 1/eps with small
    log-log residual.
    """
    moll = moll or Mollifier()
    eps_grid = _check_eps(default_eps_grid() if eps_grid is None else eps_grid)
    trajs, rows, vals, done, failures = {}, [], [], [], {}
    for eps in eps_grid:
        try:
            traj = _run(problem, regularized_inputs(problem, eps, moll))
        except LatticeHeatError as exc:
            failures[float(eps)] = f"{type(exc).__name__}: {exc}"
            continue
        norms, l2 = _l2(traj, problem.s)
        trajs[float(eps)] = traj
        rows.append(norms)
        vals.append(l2)
        done.append(eps)
    done = np.array(done)
    vals = np.array(vals)
    # fewer than four surviving points cannot support a rate verdict
    fit = fit_rate(1.0 / done, vals) if done.size >= 4 else RateFit(float("nan"), float("nan"), float("nan"), float("nan"), int(done.size))
    passed = {
        "all_solved": not failures,
        "moderate": bool(np.isfinite(fit.slope) and fit.residual < residual_tol),
    }
    report = NetReport(
        "veryweak", "eps", done, np.asarray(problem.report_times()), np.array(rows), vals,
        "1/eps", 1.0 / done, fit.slope, fit.stderr, fit.residual, passed, failures,
        {"omega": [moll.omega(e) for e in done]},
    )
    return trajs, report


def _perturb(problem: HeatProblem, inp: Inputs, target: str, size: float, profile: GridFunction | None) -> Inputs:
    if target == "a":
        return replace(inp, a=inp.a.shifted(size))
    if target == "b":
        return replace(inp, b=inp.b.shifted(size))
    if target == "f":
        grid = inp.cfg.grid()
        prof = profile if profile is not None else (problem.source_profile if problem.source_profile is not None else problem.u0)
        extra = SeparableSource(prof, SampledCoefficient(grid, np.full_like(grid, size), np.zeros_like(grid)))
        return replace(inp, source=tuple(inp.source) + (extra,))
    raise InvalidInputError(f"perturbation target must be 'a', 'b' or 'f', got {target!r}")


def uniqueness_experiment(problem: HeatProblem, eps_grid=None, q: float = 1.0, target: str = "b", moll: Mollifier | None = None, scale: float = 1.0, profile: GridFunction | None = None, slack: float = 0.5) -> NetReport:
    """Compare the eps-net with one whose input ``target`` is shifted by ``scale * eps**q``.

    Passes when the fitted slope of ||u_eps - u~_eps|| against 1/eps is at
    most ``-q + slack``.  With ``scale = 0`` the difference is identically
    zero and the slope is reported as -inf.
    """
    moll = moll or Mollifier()
    eps_grid = _check_eps(default_eps_grid() if eps_grid is None else eps_grid)
    rows, vals = [], []
    for eps in eps_grid:
        inp = regularized_inputs(problem, eps, moll)
        pert = _perturb(problem, inp, target, scale * eps**q, profile)
        norms, l2 = _diff_l2(_run(problem, inp), _run(problem, pert), problem.s)
        rows.append(norms)
        vals.append(l2)
    vals = np.array(vals)
    if np.all(vals == 0):
        fit = RateFit(-math.inf, 0.0, float("nan"), 0.0, len(vals))
    else:
        fit = fit_rate(1.0 / eps_grid, vals)
    passed = {"negligible": bool(fit.slope <= -q + slack)}
    return NetReport(
        "uniqueness", "eps", eps_grid, np.asarray(problem.report_times()), np.array(rows), vals,
        "1/eps", 1.0 / eps_grid, fit.slope, fit.stderr, fit.residual, passed, {},
        {"q": q, "target": target, "scale": scale},
    )


def consistency_experiment(problem: HeatProblem, eps_grid=None, moll: Mollifier | None = None, rel_tol: float = 1e-3, monotone_slack: float = 0.05) -> NetReport:
    """Distance of the eps-net to the classical solution for regular coefficients.

    The classical solution is recomputed on each eps grid so only the
    mollification error is measured.  Pass flags: ``monotone`` (each
    distance at most (1 + slack) times the previous one) and ``small``
    (final distance <= rel_tol * ||u_classical||).  The rate is fitted
    against omega(eps).
    """
    moll = moll or Mollifier()
    eps_grid = _check_eps(default_eps_grid() if eps_grid is None else eps_grid)
    if problem.a.has_atoms or problem.b.has_atoms or (problem.source_time is not None and problem.source_time.has_atoms):
        raise InvalidInputError("consistency needs regular coefficients")
    rows, vals, ref = [], [], []
    for eps in eps_grid:
        inp = regularized_inputs(problem, eps, moll)
        classical = classical_inputs(problem, inp.cfg.n_t)
        u_cl = _run(problem, classical)
        norms, l2 = _diff_l2(_run(problem, inp), u_cl, problem.s)
        rows.append(norms)
        vals.append(l2)
        ref.append(_l2(u_cl, problem.s)[1])
    vals = np.array(vals)
    omegas = np.array([moll.omega(e) for e in eps_grid])
    fit = fit_rate(omegas, vals)
    passed = {
        "monotone": bool(np.all(vals[1:] <= (1.0 + monotone_slack) * vals[:-1])),
        "small": bool(vals[-1] <= rel_tol * ref[-1]),
    }
    return NetReport(
        "consistency", "eps", eps_grid, np.asarray(problem.report_times()), np.array(rows), vals,
        "omega", omegas, fit.slope, fit.stderr, fit.residual, passed, {},
        {"classical_norm": ref[-1], "relative_final": vals[-1] / ref[-1]},
    )


# -- semi-classical limit ----------------------------------------------------------


@dataclass(frozen=True, eq=False)
class BandLimited:
    """Fixed lattice-Fourier data on the modes xi_p = p / box_length.

    Every lattice with period ``box_length`` receives the same spectral
    values, so the l^2 norm (by Plancherel) is independent of hbar.
    """

    n: int
    box_length: float
    modes: tuple[tuple[int, ...], ...]
    coeffs: np.ndarray = field(repr=False)

    @classmethod
    def gaussian(cls, n: int, box_length: float, max_mode: int, width: float, center=None):
        """Gaussian spectral profile exp(-|xi - center|^2 / (2 width^2)) on |p|_inf <= max_mode."""
        center = np.zeros(n) if center is None else np.asarray(center, dtype=float)
        modes = tuple(tuple(int(i) - max_mode for i in m) for m in np.ndindex(*([2 * max_mode + 1] * n)))
        xi = np.array(modes, dtype=float) / box_length
        c = np.exp(-np.sum((xi - center) ** 2, axis=1) / (2.0 * width**2))
        return cls(n, box_length, modes, c)

    @classmethod
    def single(cls, n: int, box_length: float, mode, amplitude: complex = 1.0):
        return cls(n, box_length, (tuple(int(x) for x in np.atleast_1d(mode)),), np.array([amplitude], dtype=complex))

    def lattice(self, hbar: float) -> LatticeSpec:
        N = self.box_length / hbar
        if abs(N - round(N)) > 1e-9 or round(N) % 2:
            raise InvalidInputError(f"box length {self.box_length} is not an even multiple of hbar={hbar}")
        return LatticeSpec(self.n, hbar, int(round(N)))

    def spectral(self, spec: LatticeSpec) -> SpectralFunction:
        vals = np.zeros(spec.shape, dtype=complex)
        for m, c in zip(self.modes, self.coeffs):
            if any(not (-spec.N // 2 < x < spec.N // 2) for x in m):
                raise InvalidInputError(f"mode {m} is not representable on a lattice with N={spec.N}")
            vals[spec.index_of(m)] += c
        return SpectralFunction(spec, vals)

    def grid_function(self, spec: LatticeSpec) -> GridFunction:
        return GridFunction(spec, inverse_array(spec, self.spectral(spec).values))


@dataclass(frozen=True, eq=False)
class LimitProblem:
    """Problem data shared by every hbar in a semi-classical sweep."""

    u0: BandLimited
    alpha: float
    T: float = 1.0
    a: CoefficientModel = CoefficientModel(Constant(1.0))
    b: CoefficientModel = CoefficientModel(Constant(0.0))
    source: BandLimited | None = None
    source_time: CoefficientModel | None = None
    report_points: int = 8

    def on_lattice(self, hbar: float) -> HeatProblem:
        spec = self.u0.lattice(hbar)
        prof = self.source.grid_function(spec) if self.source is not None else None
        return HeatProblem(spec, self.alpha, self.T, self.u0.grid_function(spec), self.a, self.b, 0.0, prof, self.source_time, self.report_points)


def semiclassical_experiment(problem: LimitProblem, hbar_grid=None, alpha: float | None = None, m: float | None = None, eps: float | None = None, moll: Mollifier | None = None, slack: float = 0.3, n_t: int = 512) -> NetReport:
    """Lattice solution u versus continuous-symbol solution v as hbar -> 0.

    For each hbar both problems are solved on the same lattice with the same
    (possibly eps-regularised) coefficients, and the error
    max_t ||v(t) - u(t)||_{l^2} is recorded.  Passes when the slope of the
    error against hbar is at least ``2 alpha - slack``.
    """
    alpha = problem.alpha if alpha is None else float(alpha)
    if not (0.0 < alpha <= 1.0):
        raise InvalidInputError(f"semi-classical limit needs alpha in (0, 1], got {alpha}")
    m = 4.0 * alpha if m is None else float(m)
    if m < 4.0 * alpha:
        raise InvalidInputError(f"Sobolev order m={m} below 4 alpha={4 * alpha}")
    hbar_grid = np.asarray(default_hbar_grid() if hbar_grid is None else hbar_grid, dtype=float)
    if hbar_grid.size < 4 or not np.all(np.diff(hbar_grid) < 0):
        raise InvalidInputError("hbar grid needs at least 4 strictly decreasing points")
    if alpha != problem.alpha:
        problem = replace(problem, alpha=alpha)
    moll = moll or Mollifier()

    rows, vals = [], []
    for hbar in hbar_grid:
        hp = problem.on_lattice(hbar)
        if eps is None:
            lat = classical_inputs(hp, n_t)
            cont = classical_inputs(hp, n_t, "continuous")
        else:
            lat = regularized_inputs(hp, eps, moll)
            cont = regularized_inputs(hp, eps, moll, "continuous")
        norms, _ = _diff_l2(_run(hp, lat), _run(hp, cont), 0.0)
        rows.append(norms)
        vals.append(float(np.max(norms)))
    vals = np.array(vals)
    if np.all(vals == 0):
        fit = RateFit(math.inf, 0.0, float("nan"), 0.0, len(vals))
    else:
        fit = fit_rate(hbar_grid, vals)
    passed = {"rate": bool(fit.slope >= 2.0 * alpha - slack)}
    return NetReport(
        "limit", "hbar", hbar_grid, np.asarray(problem.on_lattice(hbar_grid[0]).report_times()), np.array(rows), vals,
        "hbar", hbar_grid, fit.slope, fit.stderr, fit.residual, passed, {},
        {"alpha": alpha, "eps": eps, "proof_rate": 2.0 * alpha},
    )


def single_mode_error(problem: LimitProblem, hbar: float, t: float) -> float:
    """Closed-form l^2 error for single-mode data with a = 1, b = 0, f = 0."""
    if len(problem.u0.modes) != 1:
        raise InvalidInputError("closed form needs single-mode data")
    spec = problem.u0.lattice(hbar)
    xi = np.asarray(problem.u0.modes[0], dtype=float) / spec.box_length
    s2 = np.sum(4.0 * np.sin(np.pi * hbar * xi) ** 2)
    nu2 = hbar ** (-2 * problem.alpha) * s2**problem.alpha
    c2 = (4.0 * np.pi**2 * np.sum(xi**2)) ** problem.alpha
    norm0 = weighted_norm(problem.u0.grid_function(spec), 0.0)
    return abs(math.exp(-nu2 * t) - math.exp(-c2 * t)) * norm0
