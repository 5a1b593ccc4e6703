import json
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from nonlocal_fronts import profile_kit as pk
from nonlocal_fronts.cli import EXIT_CONFIG, EXIT_FAIL, EXIT_OK, main
from nonlocal_fronts.config import ConfigError, load_config, parse_config

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

PROBLEM = """
[problem]
alpha = 0.3
nonlinearity = { kind = "cubic", lam = 1.0 }
measure = { atoms = [ { loc = 1.0, mass = 1.0 } ] }
"""
DISC = """
[grid]
min = -20.0
max = 20.0
step = 0.05

[time]
dt = 0.1
tau = 1.0
T = 10.0
"""


def write(tmp_path, text, name="run.toml"):
    p = tmp_path / name
    p.write_text(text)
    return p


def run(cmd, config, out, *extra):
    return main([cmd, "--config", str(config), "--out", str(out), *extra])


def load(path):
    return json.loads(Path(path).read_text())


# -- configuration --------------------------------------------------------------

@pytest.mark.parametrize("text,match", [
    ("[problem\nalpha = 0.3", "malformed"),
    ("seed = 0\n", "missing required table"),
    (PROBLEM.replace("alpha = 0.3", "alpha = 1.3"), "alpha"),
    (PROBLEM + "[grid]\nmin = 0\nmax = 1\nstep = 0.3\n", "divide"),
    (PROBLEM + DISC.replace("dt = 0.1", "dt = 0.6"), "stability budget"),
    (PROBLEM + DISC.replace("tau = 1.0", "tau = 0.25"), "dt must divide"),
    (PROBLEM + "[recursion]\nn_list = [20, 10]\n", "n_list"),
    (PROBLEM + "[recursion]\nlevel_lo = 0.1\n", "both"),
    (PROBLEM + "[bounds]\nsigma = 0.5\n", "below f'"),
    (PROBLEM + "[bounds]\nsgima = 0.1\n", "unknown key"),
    (PROBLEM.replace("loc = 1.0, mass", "loc = 1.0, mas"), "measure"),
])
def test_invalid_configs(tmp_path, text, match):
    with pytest.raises(ConfigError, match=match):
        load_config(write(tmp_path, text))


def test_malformed_config_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, "[problem\n")
    assert run("bounds", cfg, tmp_path / "o") == EXIT_CONFIG
    assert "malformed" in capsys.readouterr().err
    assert run("bounds", tmp_path / "missing.toml", tmp_path / "o") == EXIT_CONFIG


def test_discretisation_has_no_defaults(tmp_path):
    cfg = write(tmp_path, PROBLEM)
    assert run("simulate", cfg, tmp_path / "o") == EXIT_CONFIG
    assert run("bounds", cfg, tmp_path / "o") == EXIT_OK


def test_config_defaults():
    cfg = parse_config({"problem": {"measure": {"atoms": [{"loc": 1.0, "mass": 1.0}]}}})
    assert cfg.alpha == 0.3 and cfg.recursion["n_list"] == [10, 20, 40]
    assert cfg.sigma == pytest.approx(0.5 * 0.3 * 0.7)
    assert cfg.grid is None and cfg.time is None


@pytest.mark.parametrize("name", ["lattice", "symmetric", "two_point", "uniform", "corrupted"])
def test_shipped_configs_parse(name):
    load_config(CONFIGS / f"{name}.toml")


# -- commands -------------------------------------------------------------------

def test_bounds_and_determinism(tmp_path):
    cfg = CONFIGS / "two_point.toml"
    assert run("bounds", cfg, tmp_path / "a") == EXIT_OK
    assert run("bounds", cfg, tmp_path / "b") == EXIT_OK
    for f in ("bounds.json", "curve_minus.csv", "curve_plus.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    rep = load(tmp_path / "a" / "bounds.json")
    assert rep["report"]["positive"] is True and rep["report"]["gap"] > 0
    lam, val = np.loadtxt(tmp_path / "a" / "curve_minus.csv", delimiter=",", skiprows=1).T
    assert lam.size == 241 and val.min() >= rep["report"]["parts"]["minus"]["value"] - 1e-12


def test_bounds_delta_zero_reports_false_flag(tmp_path):
    cfg = write(tmp_path, PROBLEM.replace("loc = 1.0", "loc = 0.0"))
    assert run("bounds", cfg, tmp_path / "o") == EXIT_OK
    rep = load(tmp_path / "o" / "bounds.json")["report"]
    assert rep["gap"] == 0.0 and rep["positive"] is False
    assert run("bounds", cfg, tmp_path / "o", "--strict") == EXIT_FAIL


def test_mgf_check(tmp_path):
    cfg = write(tmp_path, PROBLEM.replace(
        "measure = { atoms = [ { loc = 1.0, mass = 1.0 } ] }",
        'measure = { density = { generator = "uniform", a = 0.0, b = 1.0, step = 0.001 } }')
        + "[grid]\nmin = -10.0\nmax = 10.0\nstep = 0.001\n")
    assert run("mgf-check", cfg, tmp_path / "o", "--strict") == EXIT_OK
    rep = load(tmp_path / "o" / "mgf.json")
    assert rep["relative_error"] < 1e-6 and rep["linear_evolution_sup_error"] < 1e-6


def test_mgf_check_atoms_is_exact(tmp_path):
    cfg = write(tmp_path, PROBLEM)
    assert run("mgf-check", cfg, tmp_path / "o") == EXIT_OK
    assert load(tmp_path / "o" / "mgf.json")["relative_error"] < 1e-9


def test_hypotheses_and_negative_control(tmp_path):
    cfg = write(tmp_path, PROBLEM + DISC + "[hypotheses]\ntrials = 10\n")
    assert run("hypotheses", cfg, tmp_path / "o", "--strict") == EXIT_OK
    assert load(tmp_path / "o" / "hypotheses.json")["report"]["passed"] is True
    bad = CONFIGS / "corrupted.toml"
    assert run("hypotheses", bad, tmp_path / "b") == EXIT_OK
    assert load(tmp_path / "b" / "hypotheses.json")["report"]["passed"] is False
    assert run("hypotheses", bad, tmp_path / "b", "--strict") == EXIT_FAIL


def test_simulate_constant_alpha_stays_put(tmp_path):
    cfg = write(tmp_path, PROBLEM + DISC + "[initial]\nkind = \"constant\"\nvalue = 0.3\n")
    assert run("simulate", cfg, tmp_path / "o") == EXIT_OK
    rep = load(tmp_path / "o" / "simulate.json")
    last = pk.read_profile(tmp_path / "o" / rep["snapshots"][-1]["file"])
    assert np.abs(last.values - 0.3).max() <= 1e-9


def test_simulate_lattice_track(tmp_path):
    assert run("simulate", CONFIGS / "lattice.toml", tmp_path / "o", "--svg") == EXIT_OK
    rep = load(tmp_path / "o" / "simulate.json")
    assert len(rep["snapshots"]) == 6
    t, x = np.loadtxt(tmp_path / "o" / "track.csv", delimiter=",", skiprows=1).T
    assert t[-1] == pytest.approx(50.0)
    assert rep["speed_estimate"] == pytest.approx(-0.774, abs=1e-2)
    assert (tmp_path / "o" / "track.svg").exists()


def test_subsuper_check(tmp_path):
    cfg = write(tmp_path, PROBLEM + DISC)
    assert run("subsuper-check", cfg, tmp_path / "o") == EXIT_OK
    rep = load(tmp_path / "o" / "subsuper.json")
    assert rep["passed"] and rep["residual_lower"] >= 0 and rep["residual_upper"] >= 0
    psi = pk.read_profile(tmp_path / "o" / "psi_lower.csv")
    assert psi.left_tail == 0.0


def test_epsilon_too_large_exit_code(tmp_path, capsys):
    cfg = write(tmp_path, PROBLEM + DISC + "[recursion]\neps = 0.5\nauto_eps = false\n")
    assert run("subsuper-check", cfg, tmp_path / "o") == EXIT_FAIL
    assert "epsilon too large" in capsys.readouterr().err


def test_front_command(tmp_path):
    cfg = CONFIGS / "two_point.toml"
    assert run("front", cfg, tmp_path / "a", "--strict") == EXIT_OK
    assert run("front", cfg, tmp_path / "b", "--jobs", "2") == EXIT_OK
    for f in ("front.json", "trace.json", "phi_front.csv", "track.csv"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    rep = load(tmp_path / "a" / "front.json")
    assert rep["c"] > 0.01 and rep["c_in_bracket"] and rep["speed_ordering_ok"]
    assert rep["cross_check"]["abs_difference"] < 1e-2
    phi = pk.read_profile(tmp_path / "a" / "phi_front.csv")
    assert (phi.left_tail, phi.right_tail) == pytest.approx((0.0, 1.0), abs=1e-12)
    assert len(load(tmp_path / "a" / "trace.json")["rows"]) == 3


def test_module_entry_point(tmp_path):
    out = subprocess.run([sys.executable, "-m", "nonlocal_fronts", "bounds", "--config",
                          str(CONFIGS / "symmetric.toml"), "--out", str(tmp_path)],
                         capture_output=True, text=True)
    assert out.returncode == 0, out.stderr
    assert (tmp_path / "bounds.json").exists()


def test_bad_jobs_value(tmp_path):
    assert run("bounds", CONFIGS / "two_point.toml", tmp_path, "--jobs", "0") == EXIT_CONFIG
