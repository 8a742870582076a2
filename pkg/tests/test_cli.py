import hashlib
import json
import textwrap

import pytest

from latheat import cli
from latheat.io import read_function
from latheat.lattice import weighted_norm

SOLVE = """
[experiment]
kind = "solve"
[lattice]
n = 1
hbar = 0.25
N = 16
[problem]
alpha = 0.5
T = 1.0
[initial]
kind = "gaussian"
width = 0.8
"""

LIMIT = """
[experiment]
kind = "limit"
[lattice]
n = 1
box = 4.0
[problem]
alpha = 1.0
[initial]
kind = "gaussian"
max_mode = 2
width = 0.5
"""

VERYWEAK = """
[experiment]
kind = "veryweak"
eps = [0.25, 0.125, 0.0625, 0.03125]
[lattice]
n = 1
hbar = 0.25
N = 16
[problem]
alpha = 0.75
report_points = 8
[initial]
kind = "random"
seed = 7
[b]
kind = "constant"
value = 0.0
delta = [[0.0, 1.0]]
heaviside = [[0.0, 1.0]]
"""


def _write(tmp_path, name, text):
    p = tmp_path / name
    p.write_text(textwrap.dedent(text))
    return str(p)


def _stderr_record(capsys):
    lines = capsys.readouterr().err.strip().splitlines()
    assert len(lines) == 1
    return json.loads(lines[0])


def test_stencil_integer_order(tmp_path):
    out = tmp_path / "k.csv"
    assert cli.main(["stencil", "--alpha", "1", "--n", "1", "--R", "3", "--out", str(out)]) == 0
    rows = [r.split(",") for r in out.read_text().splitlines()[1:]]
    big = [(int(j), float(a)) for j, a in rows if abs(float(a)) > 1e-12]
    assert [j for j, _ in big] == [-1, 0, 1]
    assert [a for _, a in big] == pytest.approx([-1, 2, -1], abs=1e-12)


def test_stencil_half_order_and_cache(tmp_path, capsys):
    args = ["stencil", "--alpha", "0.5", "--n", "1", "--R", "4"]
    assert cli.main(args + ["--out", str(tmp_path / "a.csv")]) == 0
    assert json.loads(capsys.readouterr().err)["cache"] == "miss"
    assert cli.main(args + ["--out", str(tmp_path / "b.csv")]) == 0
    assert json.loads(capsys.readouterr().err)["cache"] == "hit"
    a, b = (tmp_path / "a.csv").read_bytes(), (tmp_path / "b.csv").read_bytes()
    assert a == b
    centre = [r for r in a.decode().splitlines() if r.startswith("0,")][0]
    assert float(centre.split(",")[1]) == pytest.approx(1.27324, abs=1e-5)


def test_stencil_aliasing_is_input_error(tmp_path, capsys):
    assert cli.main(["stencil", "--alpha", "0.5", "--n", "1", "--R", "8", "--M", "10"]) == 2
    rec = _stderr_record(capsys)
    assert rec["exit"] == 2 and "AliasingError" in rec["reason"]


def test_solve_first_row_is_initial_norm(tmp_path):
    cfg = _write(tmp_path, "solve.toml", SOLVE)
    out = tmp_path / "out"
    assert cli.main(["run", cfg, "--out", str(out)]) == 0
    rows = (out / "norms.csv").read_text().splitlines()
    assert rows[0] == "t,norm,energy,estimate_ratio"
    u0 = read_function(out / "state_0000.lhgf")
    t, norm, energy, ratio = map(float, rows[1].split(","))
    assert t == 0 and norm == pytest.approx(weighted_norm(u0), rel=1e-15)
    assert energy == pytest.approx(norm**2) and ratio < 1
    man = json.loads((out / "manifest.json").read_text())
    assert man["kind"] == "solve" and man["result"]["n_t"] == 512
    for name, digest in man["artifacts"].items():
        assert hashlib.sha256((out / name).read_bytes()).hexdigest() == digest


def test_verify_subcommand(tmp_path):
    cfg = _write(tmp_path, "solve.toml", SOLVE)
    assert cli.main(["verify", "--config", cfg, "--out", str(tmp_path / "v")]) == 0
    assert json.loads((tmp_path / "v" / "manifest.json").read_text())["result"]["estimate_pass"] is True


def test_limit_slope(tmp_path):
    cfg = _write(tmp_path, "limit_alpha1.toml", LIMIT)
    assert cli.main(["run", cfg, "--out", str(tmp_path / "lim")]) == 0
    fit = json.loads((tmp_path / "lim" / "fit.json").read_text())
    assert fit["slope"] >= 1.7 and fit["pass"] == {"rate": True}
    assert (tmp_path / "lim" / "plot.gp").exists() and (tmp_path / "lim" / "report.csv").exists()


def test_manifest_replay_is_bit_identical(tmp_path):
    cfg = _write(tmp_path, "vw.toml", VERYWEAK)
    first, second = tmp_path / "one", tmp_path / "two"
    assert cli.main(["--workers", "2", "veryweak", "--config", cfg, "--out", str(first)]) == 0
    assert cli.main(["run", str(first / "manifest.json"), "--out", str(second)]) == 0
    m1 = json.loads((first / "manifest.json").read_text())
    m2 = json.loads((second / "manifest.json").read_text())
    assert m1["artifacts"] == m2["artifacts"]
    assert (first / "report.csv").read_bytes() == (second / "report.csv").read_bytes()


def test_malformed_config_leaves_nothing(tmp_path, capsys):
    cfg = _write(tmp_path, "bad.toml", "[lattice\nn = 1\n")
    out = tmp_path / "out"
    assert cli.main(["run", cfg, "--out", str(out)]) == 2
    assert _stderr_record(capsys)["status"] == "invalid_input"
    assert not out.exists()
    assert sorted(p.name for p in tmp_path.iterdir()) == ["bad.toml"]


@pytest.mark.parametrize("patch", [("alpha = 0.5", "alpha = 0.5\ncolour = 1"), ('kind = "solve"', 'kind = "dance"'), ("N = 16", "N = 15"), ('kind = "gaussian"', 'kind = "blob"')])
def test_invalid_configs_exit_2(tmp_path, capsys, patch):
    cfg = _write(tmp_path, "c.toml", SOLVE.replace(*patch))
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 2
    assert _stderr_record(capsys)["exit"] == 2
    assert not (tmp_path / "o").exists()


def test_bad_arguments_exit_2(capsys):
    assert cli.main(["stencil", "--alpha", "x"]) == 2
    assert _stderr_record(capsys)["status"] == "parse_error"
    assert cli.main([]) == 2


def test_numeric_failure_exit_3_keeps_previous_output(tmp_path, capsys):
    out = tmp_path / "out"
    out.mkdir()
    (out / "keep.txt").write_text("old")
    cfg = _write(tmp_path, "c.toml", SOLVE + '\n[b]\nkind = "constant"\nvalue = -800.0\n')
    assert cli.main(["run", cfg, "--out", str(out)]) == 3
    rec = _stderr_record(capsys)
    assert rec["status"] == "numeric_failure" and "NumericalError" in rec["reason"]
    assert [p.name for p in out.iterdir()] == ["keep.txt"]
    assert [p.name for p in tmp_path.iterdir() if p.name.startswith(".")] == []


def test_criterion_failure_exit_1_with_artifacts(tmp_path, capsys):
    cfg = _write(tmp_path, "c.toml", SOLVE.replace('kind = "solve"', 'kind = "consistency"\neps = [0.25, 0.125, 0.0625, 0.03125]') + '\n[b]\nkind = "oscillation"\nc1 = 1.0\n')
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 1
    assert _stderr_record(capsys)["status"] == "criterion_failed"
    fit = json.loads((tmp_path / "o" / "fit.json").read_text())
    assert fit["pass"]["monotone"] and not fit["pass"]["small"]


def test_atoms_need_fixed_eps_for_solve(tmp_path, capsys):
    cfg = _write(tmp_path, "c.toml", VERYWEAK.replace('kind = "veryweak"', 'kind = "solve"'))
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 2
    cfg = _write(tmp_path, "d.toml", VERYWEAK.replace('kind = "veryweak"', 'kind = "solve"\neps_fixed = 0.0625'))
    assert cli.main(["run", cfg, "--out", str(tmp_path / "o")]) == 0
