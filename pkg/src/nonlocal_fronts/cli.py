"""Batch front end: ``nonlocal-fronts <command> --config run.toml --out DIR``.

Commands: simulate, front, bounds, hypotheses, mgf-check, subsuper-check.
Exit codes: 0 success, 1 solver or check failure, 2 invalid configuration.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import front_finder as ff
from . import measure_kit as mk
from . import profile_kit as pk
from . import semiflow as sf
from . import speed_bounds as sb
from .config import ConfigError, RunConfig, load_config

log = logging.getLogger("nonlocal_fronts")

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


class CheckFailed(RuntimeError):
    pass


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def write_json(obj, path: Path):
    path.write_text(json.dumps(obj, sort_keys=True, indent=2, default=_jsonable) + "\n")


def write_csv(path: Path, header: str, rows):
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in rows:
            fh.write(",".join(repr(float(v)) for v in row) + "\n")


def _grid_profile(cfg: RunConfig) -> pk.Profile:
    g = cfg.grid
    init = cfg.initial
    kind = init.get("kind", "ramp")
    if kind == "ramp":
        return pk.ramp_profile(float(init.get("a", -0.5)), float(init.get("b", 0.5)),
                               g.min, g.max, g.step)
    if kind == "constant":
        v = float(init.get("value", cfg.alpha))
        if not 0 <= v <= 1:
            raise ConfigError("initial.value must lie in [0, 1]")
        return pk.constant_profile(v, g.min, g.max, g.step)
    if kind == "step":
        return pk.step_profile(float(init.get("at", 0.0)), g.min, g.max, g.step)
    raise ConfigError(f"unknown initial kind {kind!r}")


def _problem_summary(cfg: RunConfig) -> dict:
    return {"alpha": cfg.alpha, "nonlinearity": cfg.nonlinearity.name,
            "measure": cfg.raw["problem"]["measure"],
            "total_mass": mk.total_mass(cfg.measure)}


# -- commands ----------------------------------------------------------------

def cmd_simulate(cfg: RunConfig, out: Path, args) -> int:
    cfg.require_discretisation("simulate")
    flow = cfg.flow()
    u = _grid_profile(cfg)
    T = cfg.time.T
    every = cfg.time.snapshot_every or T / 10
    n_snap = max(1, int(round(T / every)))
    track_dt = min(0.5, every)
    per_snap = max(1, int(round(every / track_dt)))
    track = []
    snaps = []

    def record(t, v):
        try:
            track.append((t, pk.level_crossing(v, cfg.alpha)))
        except pk.ProfileError:
            pass

    def snapshot(i, t, v):
        name = f"snapshot_{i:04d}.csv"
        pk.write_profile(v, out / name)
        snaps.append({"index": i, "t": t, "file": name})

    snapshot(0, 0.0, u)
    record(0.0, u)
    sub_dt = every / per_snap
    for i in range(1, n_snap + 1):
        for j in range(1, per_snap + 1):
            u = sf.evolve(u, sub_dt, flow)
            record((i - 1) * every + j * sub_dt, u)
        snapshot(i, i * every, u)
    write_csv(out / "track.csv", "t,x", track)
    speed = None
    if len(track) >= 4:
        tt, xx = np.array(track).T
        sel = tt >= 0.5 * tt[-1]
        if sel.sum() >= 2:
            speed = float(-np.polyfit(tt[sel], xx[sel], 1)[0])
    report = {"command": "simulate", "problem": _problem_summary(cfg), "T": T,
              "snapshots": snaps, "track_points": len(track), "speed_estimate": speed,
              "projection": {"steps": flow.stats.steps,
                             "max_correction": flow.stats.max_correction}}
    write_json(report, out / "simulate.json")
    if args.svg:
        from .plots import plot_profiles, plot_track
        plot_profiles([(pk.read_profile(out / s["file"]), f"t={s['t']:g}") for s in snaps],
                      out / "snapshots.svg")
        if track:
            plot_track(track, out / "track.svg")
    return EXIT_OK


def cmd_front(cfg: RunConfig, out: Path, args) -> int:
    cfg.require_discretisation("front")
    flow = cfg.flow()
    rec = dict(cfg.recursion)
    eps = float(rec.pop("eps"))
    auto = bool(rec.pop("auto_eps", True))
    slope_out = float(rec.pop("slope_out", 1.0))
    n_list = tuple(rec.pop("n_list"))
    u0 = _grid_profile(cfg)

    sol = ff.solve_front(flow, n_list=n_list, tau=cfg.time.tau, eps=eps, step=cfg.grid.step,
                         slope_out=slope_out, auto_eps=auto, jobs=args.jobs, **rec)
    track = ff.measure_speed(u0, cfg.time.T, flow, return_track=True)
    pair, tight = sol.pair, sol.tight_pair
    c = sol.c
    ordering = (tight.c_lower - 1e-9 <= sol.plus.c <= sol.minus.c + 1e-3
                and sol.minus.c <= tight.c_upper + 1e-9)
    agree = abs(c - track.c) if sol.front is not None else float("nan")
    report = {
        "command": "front", "problem": _problem_summary(cfg),
        "c": c, "accepted_branch": None if sol.front is None else sol.front.branch,
        "branches": {"minus": sol.minus.to_dict(), "plus": sol.plus.to_dict()},
        "trace": sol.trace.to_dict(),
        "sub_super": {"eps": pair.eps, "c_lower_ramp": pair.c_lower, "c_upper_ramp": pair.c_upper,
                      "c_lower": tight.c_lower, "c_upper": tight.c_upper,
                      "residual_lower": pair.residual_lower, "residual_upper": pair.residual_upper,
                      "delta": pair.delta, "C_const": pair.C_const},
        "fixed_points": [{"n": p.n, "iterations": p.iterations, "residual": p.residual,
                          "sandwich_violation": p.sandwich_violation,
                          "monotone_violation": p.monotone_violation} for p in sol.points],
        "cross_check": {"measure_speed": track.c, "abs_difference": agree},
        "speed_ordering_ok": bool(ordering),
        "c_in_bracket": bool(tight.c_lower <= c <= tight.c_upper) if sol.front else False,
    }
    write_json(report, out / "front.json")
    write_json(sol.trace.to_dict(), out / "trace.json")
    pk.write_profile(sol.minus.phi, out / "phi_minus.csv")
    pk.write_profile(sol.plus.phi, out / "phi_plus.csv")
    if sol.front is not None:
        pk.write_profile(sol.front.phi, out / "phi_front.csv")
    write_csv(out / "track.csv", "t,x", zip(track.times, track.positions))
    if args.svg:
        from .plots import plot_profiles, plot_track
        plot_profiles([(sol.minus.phi, f"minus, c={sol.minus.c:.5g}"),
                       (sol.plus.phi, f"plus, c={sol.plus.c:.5g}")], out / "front.svg")
        plot_track(list(zip(track.times, track.positions)), out / "track.svg")
    if sol.front is None:
        raise CheckFailed("no branch produced an accepted front (limits (0,1) and small residual)")
    if args.strict and not (ordering and agree < 1e-2):
        raise CheckFailed(f"strict: ordering ok={ordering}, |c - measured|={agree:.3g}")
    return EXIT_OK


def _lambda_grid(cfg: RunConfig):
    b = cfg.bounds
    return sb.default_lambda_grid(float(b["lambda_min"]), float(b["lambda_max"]),
                                  int(b["lambda_num"]))


def cmd_bounds(cfg: RunConfig, out: Path, args) -> int:
    sigma = cfg.sigma
    grid = _lambda_grid(cfg)
    f = cfg.nonlinearity if cfg.nonlinearity.derivative_at_alpha > 0 else None
    gap = sb.hypothesis7_gap(cfg.measure, sigma, lambda_grid=grid, nonlinearity=f)
    report = {"command": "bounds", "problem": _problem_summary(cfg), "sigma": sigma,
              "report": gap.to_dict()}
    for d in ("minus", "plus"):
        q = sb.SpeedBoundQuery(cfg.measure, sigma, d, grid)
        write_csv(out / f"curve_{d}.csv", "lambda,value", zip(grid, sb.curve_values(q)))
    if cfg.bounds.get("subfronts", False):
        cfg.require_discretisation("bounds with subfronts")
        flow = cfg.flow()
        g = cfg.grid
        sub = {}
        for side in ("minus", "plus"):
            fr = ff.simulate_subfront(flow, side, (g.min, g.max, g.step), cfg.time.T)
            ok = sb.check_subfront_speed_bound(fr, cfg.measure, sigma)
            sub[side] = {"c": fr.c, "limits": list(fr.limits), "bound": gap.parts[side].value,
                         "holds": ok}
        sub["separated"] = bool(sub["minus"]["c"] < sub["plus"]["c"])
        report["subfronts"] = sub
    write_json(report, out / "bounds.json")
    if args.svg:
        from .plots import plot_curves
        plot_curves(out)
    if args.strict and not gap.positive:
        raise CheckFailed(f"strict: gap {gap.gap:.3g} is not positive")
    if args.strict and "subfronts" in report and not all(
            report["subfronts"][s]["holds"] for s in ("minus", "plus")):
        raise CheckFailed("strict: a sub-front speed violates its bound")
    return EXIT_OK


def cmd_hypotheses(cfg: RunConfig, out: Path, args) -> int:
    cfg.require_discretisation("hypotheses")
    flow = cfg.flow()
    g = cfg.grid
    h = cfg.hypotheses
    rep = sf.certify_hypotheses(flow, trials=int(h.get("trials", 100)), seed=cfg.seed,
                                tau=cfg.time.tau, grid=(g.min, g.max, g.step),
                                t_const=float(h.get("t_const", 10.0)))
    write_json({"command": "hypotheses", "problem": _problem_summary(cfg), "seed": cfg.seed,
                "report": rep.to_dict()}, out / "hypotheses.json")
    if not rep.passed:
        failed = [c.name for c in rep.checks if not c.passed]
        msg = f"hypothesis checks failed: {', '.join(failed)}"
        if args.strict:
            raise CheckFailed(msg)
        log.warning(msg)
    return EXIT_OK


def cmd_mgfcheck(cfg: RunConfig, out: Path, args) -> int:
    lams = [float(v) for v in cfg.mgf.get("lams", [-1.0, -0.5, 0.0, 0.5, 1.0])]
    K = int(cfg.mgf.get("K", 40))
    tol = float(cfg.mgf.get("tol", 1e-6))
    err = mk.verify_mgf_identity(cfg.measure, lams, K)
    report = {"command": "mgf-check", "problem": _problem_summary(cfg), "lams": lams, "K": K,
              "relative_error": err, "tol": tol}
    ok = err < tol
    if cfg.grid is not None:
        g = cfg.grid
        v = pk.ramp_profile(-1.0, 1.0, g.min, g.max, g.step)
        a = sf.evolve_linear(v, cfg.measure, 1.0)
        b = mk.convolve(mk.exp_series(cfg.measure), v)
        lin = float(max(np.max(np.abs(a.values - b.values)), abs(a.left_tail - b.left_tail),
                        abs(a.right_tail - b.right_tail)))
        report["linear_evolution_sup_error"] = lin
        ok = ok and lin < tol
    report["passed"] = bool(ok)
    write_json(report, out / "mgf.json")
    if args.strict and not ok:
        raise CheckFailed(f"strict: MGF identity error {err:.3g} (tol {tol:g})")
    return EXIT_OK


def cmd_subsuper(cfg: RunConfig, out: Path, args) -> int:
    cfg.require_discretisation("subsuper-check")
    flow = cfg.flow()
    rec = cfg.recursion
    fhat = ff.extend_nonlinearity(cfg.nonlinearity, float(rec.get("slope_out", 1.0)))
    build = ff.build_sub_super_auto if rec.get("auto_eps", True) else ff.build_sub_super
    pair = build(fhat, cfg.measure, float(rec["eps"]), step=cfg.grid.step)
    tight = ff.tighten_speeds(pair, flow, cfg.time.tau)
    v_ramp = ff.check_subsuper_evolution(pair, flow)
    v_tight = ff.check_subsuper_evolution(tight, flow)
    ok = pair.residual_lower >= 0 and pair.residual_upper >= 0 and max(v_ramp, v_tight) <= 1e-8
    report = {"command": "subsuper-check", "problem": _problem_summary(cfg), "eps": pair.eps,
              "residual_lower": pair.residual_lower, "residual_upper": pair.residual_upper,
              "delta": pair.delta, "C_const": pair.C_const,
              "c_lower_ramp": pair.c_lower, "c_upper_ramp": pair.c_upper,
              "c_lower": tight.c_lower, "c_upper": tight.c_upper,
              "evolution_violation_ramp": v_ramp, "evolution_violation_tight": v_tight,
              "passed": bool(ok)}
    write_json(report, out / "subsuper.json")
    pk.write_profile(pair.psi_lower, out / "psi_lower.csv")
    pk.write_profile(pair.psi_upper, out / "psi_upper.csv")
    if args.svg:
        from .plots import plot_profiles
        plot_profiles([(pair.psi_lower, "lower"), (pair.psi_upper, "upper")], out / "subsuper.svg")
    if not ok:
        raise CheckFailed("sub/super-solution check failed")
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "front": cmd_front,
    "bounds": cmd_bounds,
    "hypotheses": cmd_hypotheses,
    "mgf-check": cmd_mgfcheck,
    "subsuper-check": cmd_subsuper,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="nonlocal-fronts",
                                description="Traveling fronts of u_t = mu*u - u + f(u).")
    sub = p.add_subparsers(dest="command", required=True)
    for name, fn in COMMANDS.items():
        s = sub.add_parser(name, help=(fn.__doc__ or "").strip() or None)
        s.add_argument("--config", required=True, type=Path, help="TOML run configuration")
        s.add_argument("--out", type=Path, default=None,
                       help="output directory (default: outputs.directory or ./out)")
        s.add_argument("--jobs", type=int, default=1, help="worker processes for independent solves")
        s.add_argument("--strict", action="store_true", help="turn failed checks into exit 1")
        s.add_argument("--svg", action="store_true", help="also write SVG plots")
        s.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.jobs < 1:
            raise ConfigError("--jobs must be >= 1")
        cfg = load_config(args.config)
        out = args.out or Path(cfg.outputs.get("directory", "out"))
        out.mkdir(parents=True, exist_ok=True)
        return COMMANDS[args.command](cfg, out, args)
    except ConfigError as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_CONFIG
    except (CheckFailed, ff.EpsilonTooLarge, ff.RecursionError_, sf.ComparisonError,
            mk.MeasureError, pk.ProfileError, ValueError, ArithmeticError) as err:
        print(f"error: {err}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
