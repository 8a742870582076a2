"""
Command-line front end.

Subcommands::

    lattice-heat stencil --alpha A --n N --R R [--M M] [--out FILE]
    lattice-heat solve|verify|veryweak|uniqueness|consistency|limit --config FILE --out DIR
    lattice-heat run FILE --out DIR

``run`` dispatches on ``[experiment] kind`` and also accepts a
``manifest.json`` written by an earlier run, which replays it exactly.

Exit codes: 0 success, 1 a pass flag is false, 2 invalid input or
configuration, 3 numerical failure.  Every nonzero exit prints one JSON
line ``{"status": ..., "exit": ..., "reason": ...}`` on stderr.  Artifacts
are written to a scratch directory and moved into place only after the
run has finished, so a failed run leaves no partial output.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import platform
import shutil
import sys
import tempfile
from pathlib import Path

import numpy as np
import scipy
from scipy import fft as sfft

from . import __version__
from .coefficients import regularize, resolving_steps, sample, uniform_grid
from .config import ConfigError, ScenarioConfig, load_config, parse_config
from .errors import AliasingError, InvalidInputError, LatticeHeatError
from .experiments import (
    consistency_experiment,
    semiclassical_experiment,
    uniqueness_experiment,
    very_weak_solve,
)
from .fraclap import cache_dir, cached_stencil_coefficients, stencil_coefficients
from .io import atomic_write_text, fmt, kernel_csv, write_function
from .solver import SeparableSource, SolveConfig, energy, solve, verify_estimate

EXIT_OK, EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC = 0, 1, 2, 3


class _Failure(Exception):
    def __init__(self, code: int, status: str, reason: str):
        super().__init__(reason)
        self.code, self.status, self.reason = code, status, reason


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _Failure(EXIT_INPUT, "parse_error", message)


# -- artifact staging --------------------------------------------------------------


class Staging:
    """Collects artifacts in a scratch directory and publishes them at once."""

    def __init__(self, out: Path):
        self.out = Path(out)
        self.out.parent.mkdir(parents=True, exist_ok=True)
        self.tmp = Path(tempfile.mkdtemp(prefix=f".{self.out.name}.", dir=self.out.parent))
        self.files: list[str] = []

    def path(self, name: str) -> Path:
        self.files.append(name)
        return self.tmp / name

    def text(self, name: str, text: str):
        self.path(name).write_text(text, encoding="utf-8")

    def digests(self) -> dict[str, str]:
        return {f: hashlib.sha256((self.tmp / f).read_bytes()).hexdigest() for f in sorted(self.files)}

    def publish(self):
        self.out.mkdir(parents=True, exist_ok=True)
        for name in self.files:
            os.replace(self.tmp / name, self.out / name)
        shutil.rmtree(self.tmp, ignore_errors=True)

    def discard(self):
        shutil.rmtree(self.tmp, ignore_errors=True)


def _manifest(cfg: ScenarioConfig, stage: Staging, extra: dict) -> str:
    body = {
        "tool": "latheat",
        "version": __version__,
        "kind": cfg.kind,
        "config": cfg.raw,
        "mollifier": {"schedule": type(cfg.mollifier.schedule).__name__, "sup_psi": cfg.mollifier.sup},
        "environment": {"python": platform.python_version(), "numpy": np.__version__, "scipy": scipy.__version__},
        "artifacts": stage.digests(),
        **extra,
    }
    return json.dumps(body, indent=2, sort_keys=True) + "\n"


# -- solve / verify ----------------------------------------------------------------


def _solve_inputs(cfg: ScenarioConfig):
    problem = cfg.heat_problem()
    eps = cfg.experiment.get("eps_fixed")
    models = [problem.a, problem.b] + ([problem.source_time] if problem.source_time is not None else [])
    if eps is None:
        if any(m.has_atoms for m in models):
            raise ConfigError("coefficients with atoms need [experiment] eps_fixed")
        n_t = int(cfg.problem.get("n_t", 512))
        grid = uniform_grid(problem.T, n_t)
        smp = lambda m: sample(m, grid)  # noqa: E731
    else:
        eps = float(eps)
        n_t = max(int(cfg.problem.get("n_t", 512)), resolving_steps(problem.T, cfg.mollifier.omega(eps)))
        grid = uniform_grid(problem.T, n_t)
        smp = lambda m: regularize(m, eps, cfg.mollifier, grid)  # noqa: E731
    a, b = smp(problem.a), smp(problem.b)
    source = ()
    if problem.source_profile is not None:
        g = smp(problem.source_time) if problem.source_time is not None else (lambda t: np.ones_like(t))
        source = (SeparableSource(problem.source_profile, g),)
    out_t = cfg.problem.get("output_times")
    sc = SolveConfig(problem.T, n_t, problem.alpha, problem.s, "lattice", tuple(out_t) if out_t is not None else problem.report_times())
    return problem, a, b, source, sc, {"n_t": n_t, "dt": sc.dt, "eps": eps}


def _do_solve(cfg: ScenarioConfig, stage: Staging) -> tuple[dict, bool]:
    problem, a, b, source, sc, info = _solve_inputs(cfg)
    traj = solve(problem.u0, source, a, b, sc)
    rep = verify_estimate(traj, problem.u0, source, a, b, problem.s)
    norms = traj.norms(problem.s)
    lines = ["t,norm,energy,estimate_ratio"]
    for i, t in enumerate(traj.times):
        lines.append(",".join(fmt(x) for x in (t, norms[i], energy(traj, a, problem.s, t), rep.ratios[i])))
    stage.text("norms.csv", "\n".join(lines) + "\n")
    for i, u in enumerate(traj.states):
        write_function(stage.path(f"state_{i:04d}.lhgf"), u)
    stage.text("a.csv", a.to_csv())
    stage.text("b.csv", b.to_csv())
    info.update(constant=rep.constant, max_ratio=rep.max_ratio, estimate_pass=rep.passed)
    return info, rep.passed


# -- sweeps ------------------------------------------------------------------------


def _do_sweep(cfg: ScenarioConfig, stage: Staging) -> tuple[dict, bool]:
    e = cfg.experiment
    if cfg.kind == "veryweak":
        kw = {"residual_tol": float(e["residual_tol"])} if "residual_tol" in e else {}
        _, report = very_weak_solve(cfg.heat_problem(), cfg.eps_grid(), cfg.mollifier, **kw)
    elif cfg.kind == "uniqueness":
        kw = {k: float(e[k]) for k in ("q", "scale", "slack") if k in e}
        report = uniqueness_experiment(cfg.heat_problem(), cfg.eps_grid(), target=e.get("target", "b"), moll=cfg.mollifier, **kw)
    elif cfg.kind == "consistency":
        kw = {"rel_tol": float(e["rel_tol"])} if "rel_tol" in e else {}
        report = consistency_experiment(cfg.heat_problem(), cfg.eps_grid(), cfg.mollifier, **kw)
    else:
        kw = {k: float(e[k]) for k in ("m", "slack") if k in e}
        if "n_t" in e:
            kw["n_t"] = int(e["n_t"])
        eps = e.get("eps_fixed")
        report = semiclassical_experiment(cfg.limit_problem(), cfg.hbar_grid(), eps=None if eps is None else float(eps), moll=cfg.mollifier, **kw)
    stage.text("report.csv", report.report_csv())
    stage.text("fit.json", json.dumps(report.fit_dict(), indent=2, sort_keys=True) + "\n")
    stage.text("plot.gp", report.gnuplot_script())
    fit = report.fit_dict()
    return {"slope": fit["slope"], "pass": fit["pass"]}, report.ok


def execute(cfg: ScenarioConfig, out: Path) -> int:
    """Run a parsed scenario, publish its artifacts and return the exit code."""
    stage = Staging(out)
    try:
        if cfg.kind in ("solve", "verify"):
            info, ok = _do_solve(cfg, stage)
            if cfg.kind == "solve":
                ok = True
        else:
            info, ok = _do_sweep(cfg, stage)
        stage.text("manifest.json", _manifest(cfg, stage, {"result": info}))
    except BaseException:
        stage.discard()
        raise
    stage.publish()
    if not ok:
        raise _Failure(EXIT_FAIL, "criterion_failed", f"{cfg.kind}: a pass flag is false, see {out / 'manifest.json'}")
    return EXIT_OK


# -- stencil -----------------------------------------------------------------------


def _do_stencil(args) -> int:
    if args.periodic:
        kernel, hit = stencil_coefficients(args.alpha, args.n, args.R, args.M, periodic=True), False
    else:
        kernel, hit = cached_stencil_coefficients(args.alpha, args.n, args.R, args.M, args.cache)
    text = kernel_csv(kernel)
    if args.out:
        atomic_write_text(args.out, text)
    else:
        sys.stdout.write(text)
    print(json.dumps({"cache": "hit" if hit else "miss", "dir": str(cache_dir(args.cache)), "tail_mass": kernel.tail_mass}), file=sys.stderr)
    return EXIT_OK


# -- entry point -------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="lattice-heat", description="Discrete fractional heat equation on truncated lattices.")
    p.add_argument("--workers", type=int, default=None, help="cap on FFT worker threads")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    st = sub.add_parser("stencil", help="stencil coefficients as CSV (cached)")
    st.add_argument("--alpha", type=float, required=True)
    st.add_argument("--n", type=int, required=True)
    st.add_argument("--R", type=int, required=True)
    st.add_argument("--M", type=int, default=None)
    st.add_argument("--periodic", action="store_true", help="fold onto period 2R (not cached)")
    st.add_argument("--cache", default=None, help="cache directory (default $LATTICE_HEAT_CACHE)")
    st.add_argument("--out", default=None, help="CSV path; stdout if omitted")

    for kind in ("solve", "verify", "veryweak", "uniqueness", "consistency", "limit"):
        sp = sub.add_parser(kind, help=f"{kind} scenario")
        sp.add_argument("--config", required=True)
        sp.add_argument("--out", default=None)

    rp = sub.add_parser("run", help="dispatch on the config's experiment kind, or replay a manifest")
    rp.add_argument("config")
    rp.add_argument("--out", default=None)
    return p


def _load(path: str, kind: str | None) -> ScenarioConfig:
    if path.endswith(".json"):
        try:
            body = json.loads(Path(path).read_text())
            return parse_config(body["config"], kind or body.get("kind"))
        except (OSError, ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"{path}: not a readable manifest ({exc})") from exc
    return load_config(path, kind)


def _dispatch(args) -> int:
    if args.command == "stencil":
        return _do_stencil(args)
    cfg = _load(args.config, None if args.command == "run" else args.command)
    out = args.out or (str(cfg.output_dir) if cfg.output_dir else None)
    if out is None:
        raise ConfigError("no output directory: pass --out or set [output] directory")
    return execute(cfg, Path(out))


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        if args.workers is not None and args.workers < 1:
            raise InvalidInputError("--workers must be >= 1")
        with sfft.set_workers(args.workers or 1):
            return _dispatch(args)
    except _Failure as f:
        return _report(f.code, f.status, f.reason)
    except (InvalidInputError, AliasingError) as exc:
        return _report(EXIT_INPUT, "invalid_input", f"{type(exc).__name__}: {exc}")
    except LatticeHeatError as exc:
        return _report(EXIT_NUMERIC, "numeric_failure", f"{type(exc).__name__}: {exc}")
    except (FloatingPointError, OverflowError, np.linalg.LinAlgError) as exc:
        return _report(EXIT_NUMERIC, "numeric_failure", f"{type(exc).__name__}: {exc}")


def _report(code: int, status: str, reason: str) -> int:
    print(json.dumps({"status": status, "exit": code, "reason": reason}), file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
