"""
Scenario configuration: TOML files mapped onto library objects.

A scenario has the sections ``[experiment]``, ``[lattice]``, ``[problem]``,
``[initial]``, optional ``[source]``, ``[a]``, ``[b]``, ``[mollifier]`` and
``[output]``.  Unknown keys are rejected so typos fail loudly.

Example::

    [experiment]
    kind = "consistency"
    eps = [0.25, 0.125, 0.0625, 0.03125]

    [lattice]
    n = 1
    hbar = 0.25
    N = 16

    [problem]
    alpha = 0.75
    T = 1.0

    [initial]
    kind = "gaussian"
    width = 1.0

    [a]
    kind = "polynomial"
    coeffs = [1.0, 0.5]

    [b]
    kind = "oscillation"
    c0 = 0.0
    c1 = 1.0
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .coefficients import (
    CoefficientModel,
    Constant,
    LogSchedule,
    Mollifier,
    Oscillation,
    Polynomial,
    PowerSchedule,
)
from .errors import InvalidInputError
from .experiments import BandLimited, HeatProblem, LimitProblem, default_eps_grid, default_hbar_grid
from .lattice import GridFunction, LatticeSpec

KINDS = ("solve", "verify", "veryweak", "uniqueness", "consistency", "limit")

_ALLOWED = {
    "experiment": {"kind", "eps", "hbar", "q", "target", "scale", "eps_fixed", "rel_tol", "residual_tol", "slack", "m", "n_t"},
    "lattice": {"n", "hbar", "N", "box"},
    "problem": {"alpha", "T", "s", "n_t", "output_times", "report_points"},
    "initial": {"kind", "width", "center", "mode", "amplitude", "seed", "max_mode", "site"},
    "source": {"kind", "width", "center", "mode", "amplitude", "seed", "max_mode", "site", "time"},
    "a": {"kind", "value", "coeffs", "c0", "c1", "freq", "phase", "delta", "heaviside"},
    "b": {"kind", "value", "coeffs", "c0", "c1", "freq", "phase", "delta", "heaviside"},
    "mollifier": {"schedule", "p"},
    "output": {"directory"},
}


class ConfigError(InvalidInputError):
    """Raised for malformed or inconsistent scenario files."""


@dataclass(frozen=True, eq=False)
class ScenarioConfig:
    kind: str
    raw: dict = field(repr=False)
    experiment: dict
    problem: dict
    mollifier: Mollifier
    output_dir: Path | None

    @property
    def alpha(self) -> float:
        return float(self.problem["alpha"])

    @property
    def T(self) -> float:
        return float(self.problem.get("T", 1.0))

    @property
    def s(self) -> float:
        return float(self.problem.get("s", 0.0))

    def eps_grid(self) -> np.ndarray:
        return np.asarray(self.experiment.get("eps", default_eps_grid()), dtype=float)

    def hbar_grid(self) -> np.ndarray:
        return np.asarray(self.experiment.get("hbar", default_hbar_grid()), dtype=float)

    def a(self) -> CoefficientModel:
        return coefficient_model(self.raw.get("a", {"kind": "constant", "value": 1.0}), self.T)

    def b(self) -> CoefficientModel:
        return coefficient_model(self.raw.get("b", {"kind": "constant", "value": 0.0}), self.T)

    def lattice(self) -> LatticeSpec:
        lat = self.raw.get("lattice")
        if lat is None or not {"n", "hbar", "N"} <= lat.keys():
            raise ConfigError("[lattice] needs n, hbar and N")
        return LatticeSpec(int(lat["n"]), float(lat["hbar"]), int(lat["N"]))

    def heat_problem(self) -> HeatProblem:
        spec = self.lattice()
        u0 = grid_descriptor(self.raw.get("initial", {"kind": "zero"}), spec, "initial")
        src = self.raw.get("source")
        prof = time = None
        if src is not None:
            prof = grid_descriptor(src, spec, "source")
            if "time" in src:
                time = coefficient_model(src["time"], self.T)
        kw = {}
        if "report_points" in self.problem:
            kw["report_points"] = int(self.problem["report_points"])
        return HeatProblem(spec, self.alpha, self.T, u0, self.a(), self.b(), self.s, prof, time, **kw)

    def limit_problem(self) -> LimitProblem:
        lat = self.raw.get("lattice", {})
        if "box" not in lat or "n" not in lat:
            raise ConfigError("limit experiments need [lattice] n and box")
        n, box = int(lat["n"]), float(lat["box"])
        u0 = spectral_descriptor(self.raw.get("initial", {}), n, box, "initial")
        src = self.raw.get("source")
        prof = time = None
        if src is not None:
            prof = spectral_descriptor(src, n, box, "source")
            if "time" in src:
                time = coefficient_model(src["time"], self.T)
        kw = {}
        if "report_points" in self.problem:
            kw["report_points"] = int(self.problem["report_points"])
        return LimitProblem(u0, self.alpha, self.T, self.a(), self.b(), prof, time, **kw)


def _pairs(value, name):
    try:
        out = tuple((float(t0), float(w)) for t0, w in value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must be a list of [t0, weight] pairs") from exc
    return out


def coefficient_model(d: dict, T: float) -> CoefficientModel:
    """Build a :class:`CoefficientModel` from a descriptor table."""
    if not isinstance(d, dict):
        raise ConfigError("coefficient descriptor must be a table")
    kind = d.get("kind", "constant")
    try:
        if kind == "constant":
            reg = Constant(float(d.get("value", 0.0)))
        elif kind == "polynomial":
            reg = Polynomial(tuple(float(c) for c in d["coeffs"]))
        elif kind == "oscillation":
            reg = Oscillation(float(d.get("c0", 0.0)), float(d.get("c1", 1.0)), float(d.get("freq", 1.0)), float(d.get("phase", 0.0)))
        else:
            raise ConfigError(f"unknown coefficient kind {kind!r}")
    except KeyError as exc:
        raise ConfigError(f"coefficient kind {kind!r} needs key {exc.args[0]!r}") from exc
    return CoefficientModel(reg, _pairs(d.get("delta", ()), "delta"), _pairs(d.get("heaviside", ()), "heaviside"), T)


def grid_descriptor(d: dict, spec: LatticeSpec, section: str) -> GridFunction:
    """Physical-space data: zero, gaussian, delta, plane_wave or random."""
    kind = d.get("kind", "zero")
    if kind == "zero":
        return GridFunction.zeros(spec)
    if kind == "gaussian":
        w = float(d.get("width", 1.0))
        c = np.broadcast_to(np.asarray(d.get("center", 0.0), dtype=float), (spec.n,))
        r2 = sum((x - c[i]) ** 2 for i, x in enumerate(spec.coordinates()))
        return GridFunction(spec, float(d.get("amplitude", 1.0)) * np.exp(-r2 / (2 * w * w)))
    if kind == "delta":
        g = GridFunction.delta(spec, d.get("site"))
        return GridFunction(spec, float(d.get("amplitude", 1.0)) * g.values)
    if kind == "plane_wave":
        from .fourier import plane_wave

        g = plane_wave(spec, d.get("mode", [0] * spec.n))
        return GridFunction(spec, float(d.get("amplitude", 1.0)) * g.values)
    if kind == "random":
        rng = np.random.default_rng(int(d.get("seed", 0)))
        vals = rng.standard_normal(spec.shape) + 1j * rng.standard_normal(spec.shape)
        return GridFunction(spec, float(d.get("amplitude", 1.0)) * vals)
    raise ConfigError(f"[{section}] unknown kind {kind!r}")


def spectral_descriptor(d: dict, n: int, box: float, section: str) -> BandLimited:
    """Band-limited data shared across an hbar sweep: gaussian or mode."""
    kind = d.get("kind", "gaussian")
    if kind == "gaussian":
        return BandLimited.gaussian(n, box, int(d.get("max_mode", 2)), float(d.get("width", 0.5)), d.get("center"))
    if kind == "mode":
        return BandLimited.single(n, box, d.get("mode", [1] * n), complex(d.get("amplitude", 1.0)))
    raise ConfigError(f"[{section}] kind {kind!r} is not band-limited; use 'gaussian' or 'mode'")


def mollifier(d: dict) -> Mollifier:
    sched = d.get("schedule", "log")
    if sched == "log":
        return Mollifier(LogSchedule())
    if sched == "power":
        return Mollifier(PowerSchedule(float(d.get("p", 0.5))))
    raise ConfigError(f"unknown mollifier schedule {sched!r}")


def parse_config(data: dict, kind: str | None = None) -> ScenarioConfig:
    """Validate a parsed TOML table."""
    for section, body in data.items():
        if section not in _ALLOWED:
            raise ConfigError(f"unknown section [{section}]")
        if not isinstance(body, dict):
            raise ConfigError(f"[{section}] must be a table")
        extra = set(body) - _ALLOWED[section]
        if extra:
            raise ConfigError(f"[{section}] unknown keys: {', '.join(sorted(extra))}")
    exp = dict(data.get("experiment", {}))
    kind = kind or exp.get("kind")
    if kind not in KINDS:
        raise ConfigError(f"experiment kind must be one of {', '.join(KINDS)}, got {kind!r}")
    problem = dict(data.get("problem", {}))
    if "alpha" not in problem:
        raise ConfigError("[problem] needs alpha")
    out = data.get("output", {}).get("directory")
    cfg = ScenarioConfig(kind, data, exp, problem, mollifier(data.get("mollifier", {})), Path(out) if out else None)
    # resolve everything now so errors surface before any work starts
    cfg.a(), cfg.b()
    if kind == "limit":
        cfg.limit_problem()
    else:
        cfg.heat_problem()
    return cfg


def load_config(path, kind: str | None = None) -> ScenarioConfig:
    try:
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OSError as exc:
        raise ConfigError(f"{path}: {exc.strerror}") from exc
    return parse_config(data, kind)
