"""Run configuration for the command-line front end.

A run is described by a TOML file::

    seed = 0

    [problem]
    alpha = 0.3
    nonlinearity = { kind = "cubic", lam = 1.0 }
    measure = { atoms = [ { loc = -1.0, mass = 0.5 }, { loc = 1.0, mass = 0.5 } ] }

    [grid]            # required by simulate, front, hypotheses, subsuper-check
    min = -40.0
    max = 40.0
    step = 0.05

    [time]            # same
    dt = 0.1
    tau = 1.0
    T = 60.0

Everything is validated before any solve starts; problems raise
:class:`ConfigError`, which the CLI maps to exit code 2.
"""
from __future__ import annotations

import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

from . import measure_kit as mk
from .semiflow import Nonlinearity, SemiflowConfig

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

__all__ = ["ConfigError", "RunConfig", "load_config", "parse_config"]

DEFAULT_ALPHA = 0.3
DEFAULT_EPS = 0.05


class ConfigError(ValueError):
    pass


def _req(table: dict, key: str, where: str):
    if key not in table:
        raise ConfigError(f"missing required key '{where}.{key}'")
    return table[key]


def _num(value, name: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{name} must be a number, got {value!r}")
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError(f"{name} must be finite")
    if positive and v <= 0:
        raise ConfigError(f"{name} must be positive")
    return v


def _check_keys(table: dict, allowed: set, where: str):
    extra = set(table) - allowed
    if extra:
        raise ConfigError(f"unknown key(s) in [{where}]: {', '.join(sorted(extra))}")


@dataclass
class GridSpec:
    min: float
    max: float
    step: float

    @property
    def n(self) -> int:
        return int(round((self.max - self.min) / self.step)) + 1


@dataclass
class TimeSpec:
    dt: float
    tau: float
    T: float
    snapshot_every: float | None = None


@dataclass
class RunConfig:
    raw: dict
    alpha: float
    nonlinearity: Nonlinearity
    measure: mk.Measure
    grid: GridSpec | None
    time: TimeSpec | None
    recursion: dict = field(default_factory=dict)
    bounds: dict = field(default_factory=dict)
    hypotheses: dict = field(default_factory=dict)
    mgf: dict = field(default_factory=dict)
    initial: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    seed: int = 0

    def require_discretisation(self, command: str):
        if self.grid is None or self.time is None:
            raise ConfigError(f"'{command}' needs both [grid] and [time] tables "
                              "(no defaults for discretisation)")

    def flow(self) -> SemiflowConfig:
        if self.time is None:
            raise ConfigError("missing [time] table")
        mass = mk.total_mass(self.measure)
        if abs(mass - 1.0) > 1e-10:
            raise ConfigError(f"the evolution needs a measure of total mass 1 (got {mass:.12g})")
        return SemiflowConfig(self.measure, self.nonlinearity, dt=self.time.dt)

    @property
    def sigma(self) -> float:
        return self.bounds["sigma"]


def _nonlinearity(spec: dict, alpha: float) -> Nonlinearity:
    kind = spec.get("kind", "cubic")
    try:
        if kind == "cubic":
            _check_keys(spec, {"kind", "lam"}, "problem.nonlinearity")
            return Nonlinearity.cubic(alpha, _num(spec.get("lam", 1.0), "lam", True))
        if kind == "tabulated":
            _check_keys(spec, {"kind", "u", "f", "check"}, "problem.nonlinearity")
            return Nonlinearity.tabulated(alpha, _req(spec, "u", "problem.nonlinearity"),
                                          _req(spec, "f", "problem.nonlinearity"),
                                          check=bool(spec.get("check", True)))
    except ConfigError:
        raise
    except (ValueError, TypeError) as err:
        raise ConfigError(f"invalid nonlinearity: {err}") from None
    raise ConfigError(f"unknown nonlinearity kind {kind!r}")


def parse_config(raw: dict) -> RunConfig:
    """Validate a parsed TOML document and build a :class:`RunConfig`."""
    _check_keys(raw, {"seed", "problem", "grid", "time", "recursion", "bounds", "hypotheses",
                      "mgf", "initial", "outputs"}, "top level")
    problem = raw.get("problem")
    if not isinstance(problem, dict):
        raise ConfigError("missing required table [problem]")
    _check_keys(problem, {"alpha", "nonlinearity", "measure"}, "problem")
    alpha = _num(problem.get("alpha", DEFAULT_ALPHA), "problem.alpha")
    if not 0 < alpha < 1:
        raise ConfigError(f"problem.alpha must lie in (0, 1), got {alpha}")
    f = _nonlinearity(problem.get("nonlinearity", {}), alpha)
    mspec = _req(problem, "measure", "problem")
    try:
        m = mk.measure_from_spec(mspec)
    except (ValueError, TypeError, KeyError) as err:
        raise ConfigError(f"invalid measure: {err}") from None

    grid = None
    if "grid" in raw:
        g = raw["grid"]
        _check_keys(g, {"min", "max", "step"}, "grid")
        grid = GridSpec(_num(_req(g, "min", "grid"), "grid.min"),
                        _num(_req(g, "max", "grid"), "grid.max"),
                        _num(_req(g, "step", "grid"), "grid.step", True))
        if grid.max <= grid.min:
            raise ConfigError("grid.max must exceed grid.min")
        if abs((grid.max - grid.min) / grid.step - round((grid.max - grid.min) / grid.step)) > 1e-9:
            raise ConfigError("grid.step must divide grid.max - grid.min")
        for loc in m.atom_locs:
            r = loc / grid.step
            if abs(r - round(r)) > 1e-9:
                raise ConfigError(f"grid.step {grid.step:g} does not divide atom offset {loc:g}")

    time = None
    if "time" in raw:
        t = raw["time"]
        _check_keys(t, {"dt", "tau", "T", "snapshot_every"}, "time")
        time = TimeSpec(_num(_req(t, "dt", "time"), "time.dt", True),
                        _num(_req(t, "tau", "time"), "time.tau", True),
                        _num(_req(t, "T", "time"), "time.T", True),
                        None if "snapshot_every" not in t
                        else _num(t["snapshot_every"], "time.snapshot_every", True))
        budget = time.dt * (1.0 + f.lipschitz)
        if budget >= 1.0:
            raise ConfigError(f"time.dt={time.dt:g} breaks the stability budget "
                              f"dt*(1+L)={budget:.3g} >= 1")
        if (time.tau / time.dt) % 1 > 1e-9 and abs((time.tau / time.dt) % 1 - 1) > 1e-9:
            raise ConfigError("time.dt must divide time.tau")

    rec = dict(raw.get("recursion", {}))
    _check_keys(rec, {"n_list", "fixpoint_tol", "max_iters", "eps", "auto_eps", "slope_out",
                      "level_lo", "level_hi", "N0", "front_tol", "cauchy_tol", "sandwich_tol"},
                "recursion")
    rec.setdefault("eps", DEFAULT_EPS)
    n_list = rec.setdefault("n_list", [10, 20, 40])
    if (not isinstance(n_list, list) or len(n_list) < 2
            or any(not isinstance(n, int) or n < 1 for n in n_list)
            or n_list != sorted(set(n_list))):
        raise ConfigError("recursion.n_list must be >= 2 increasing positive integers")
    _num(rec["eps"], "recursion.eps", True)
    lo, hi = rec.get("level_lo"), rec.get("level_hi")
    if (lo is None) != (hi is None):
        raise ConfigError("give both recursion.level_lo and recursion.level_hi, or neither")
    if lo is not None and not 0 < _num(lo, "level_lo") < alpha < _num(hi, "level_hi") < 1:
        raise ConfigError("levels must satisfy 0 < level_lo < alpha < level_hi < 1")

    bounds = dict(raw.get("bounds", {}))
    _check_keys(bounds, {"sigma", "lambda_min", "lambda_max", "lambda_num", "subfronts"}, "bounds")
    fa = f.derivative_at_alpha
    bounds.setdefault("sigma", 0.5 * fa if fa > 0 else 0.1)
    sigma = _num(bounds["sigma"], "bounds.sigma", True)
    if fa > 0 and not sigma < fa:
        raise ConfigError(f"bounds.sigma={sigma:g} must be below f'(alpha)={fa:g}")
    bounds.setdefault("lambda_min", 1e-3)
    bounds.setdefault("lambda_max", 1e3)
    bounds.setdefault("lambda_num", 241)
    if not 0 < bounds["lambda_min"] < bounds["lambda_max"] or int(bounds["lambda_num"]) < 3:
        raise ConfigError("bad lambda grid: need 0 < lambda_min < lambda_max and lambda_num >= 3")

    hyp = dict(raw.get("hypotheses", {}))
    _check_keys(hyp, {"trials", "t_const"}, "hypotheses")
    mgf = dict(raw.get("mgf", {}))
    _check_keys(mgf, {"lams", "K", "tol"}, "mgf")
    init = dict(raw.get("initial", {}))
    _check_keys(init, {"kind", "a", "b", "value", "at"}, "initial")
    outputs = dict(raw.get("outputs", {}))
    _check_keys(outputs, {"directory", "formats"}, "outputs")
    seed = raw.get("seed", 0)
    if not isinstance(seed, int):
        raise ConfigError("seed must be an integer")
    return RunConfig(raw, alpha, f, m, grid, time, rec, bounds, hyp, mgf, init, outputs, seed)


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        with open(path, "rb") as fh:
            raw = tomllib.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except tomllib.TOMLDecodeError as err:
        raise ConfigError(f"malformed config {path}: {err}") from None
    return parse_config(raw)
