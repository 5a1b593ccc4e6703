"""Acceptance criteria, one test each, at the stated tolerances.

The front solves are shared through ``_support`` (cached per process), so
criteria 5 to 10 reuse the same runs.
"""
import time

import numpy as np

from nonlocal_fronts import front_finder as ff
from nonlocal_fronts import measure_kit as mk
from nonlocal_fronts import profile_kit as pk
from nonlocal_fronts import semiflow as sf
from nonlocal_fronts import speed_bounds as sb

import _support as S

# every front solve used below: (kernel, alpha)
RUNS = [("lattice", 0.3), ("two_point", 0.5), ("uniform", 0.5), ("two_point", 0.3),
        ("two_point", 0.7)]


def test_criterion_01_hypothesis_certification():
    t0 = time.perf_counter()
    cfg = S.flow("lattice", 0.3)
    rep = sf.certify_hypotheses(cfg, trials=100, seed=0, tau=1.0, t_const=10.0)
    elapsed = time.perf_counter() - t0
    assert rep["order_preserving"].margin <= 1e-8 + rep.projection_budget
    assert rep["translation_invariant"].margin <= 1e-8
    # gamma = alpha/2 = 0.15 decreases and gamma = (1 + alpha)/2 = 0.65 increases over t = 10
    assert "gamma=0.15" in rep["constant_dynamics_long"].detail
    assert "gamma=0.65" in rep["constant_dynamics_long"].detail
    assert rep["constant_dynamics_long"].passed
    assert rep.passed
    assert elapsed < 30.0


def test_criterion_02_equilibria_fixed():
    cfg = S.flow("lattice", 0.3)
    for e in (0.0, 0.3, 1.0):
        u = pk.constant_profile(e, -20.0, 20.0, 0.1)
        out = sf.evolve(u, 10.0, cfg)
        assert np.abs(out.values - e).max() <= 1e-9
        assert abs(out.left_tail - e) <= 1e-9 and abs(out.right_tail - e) <= 1e-9


def test_criterion_03_mgf_identity():
    # grid half-width L; the comparison window keeps 2L/3 away from the truncated ends
    cases = [(mk.delta(1.0), 0.05, 12.0), (S.kernel("two_point"), 0.05, 12.0),
             (mk.uniform(0.0, 1.0, 0.001), 0.001, 4.0)]
    for mhat, h, L in cases:
        assert mk.verify_mgf_identity(mhat, [-1.0, -0.5, 0.0, 0.5, 1.0], K=40) < 1e-6
        v = pk.ramp_profile(-1.0, 1.0, -L, L, h)
        lin = sf.evolve_linear(v, mhat, 1.0)
        ref = mk.convolve(mk.exp_series(mhat, 40), v)
        assert pk.sup_dist(lin, ref, window=(-L / 3, L / 3)) < 1e-6


def test_criterion_04_sub_super_residuals():
    fhat = ff.extend_nonlinearity(sf.Nonlinearity.cubic(0.3), 1.0)
    n_t, n_z = 41, 401
    assert n_t * n_z >= 10_000
    for name in ("lattice", "uniform"):
        pair = ff.build_sub_super_auto(fhat, S.kernel(name), 0.05, n_t=n_t, n_z=n_z)
        assert pair.residual_lower >= 0 and pair.residual_upper >= 0


def test_criterion_05_recursion_fixed_points():
    for run in RUNS:
        sol = S.front(*run)
        assert [p.n for p in sol.points] == [10, 20, 40]
        for p in sol.points:
            assert p.residual < 1e-6
            assert p.monotone_violation <= 1e-8
            assert p.sandwich_violation <= 1e-8


def test_criterion_06_zero_speed_symmetry():
    for kernel in ("two_point", "uniform"):
        sol = S.front(kernel, 0.5)
        assert sol.front is not None
        assert abs(sol.c) < 5e-3
        assert abs(sol.minus.c) < 5e-3 and abs(sol.plus.c) < 5e-3
        assert abs(S.simulated_speed(kernel, 0.5)) < 5e-3


def test_criterion_07_speed_sign_flip():
    lo, hi = S.front("two_point", 0.3), S.front("two_point", 0.7)
    assert lo.c > 0.01 and hi.c < -0.01
    assert abs(abs(lo.c) - abs(hi.c)) < 5e-3
    for alpha, sol in ((0.3, lo), (0.7, hi)):
        assert abs(sol.c - S.simulated_speed("two_point", alpha)) < 1e-2


def test_criterion_08_speed_bracket():
    for run in RUNS:
        sol = S.front(*run)
        assert sol.front is not None
        for pair in (sol.tight_pair, sol.pair):
            assert pair.c_lower <= sol.c <= pair.c_upper


def test_criterion_09_exponential_moment_gap():
    measures = [S.kernel("lattice"), S.kernel("two_point"), S.kernel("uniform"),
                mk.uniform(0.0, 1.0, 0.01), mk.triangle(-1.0, 1.0, 0.05),
                mk.gaussian_truncated(0.5, 2.0, 0.05),
                mk.add_measures(mk.delta(0.0, 0.5), mk.delta(1.0, 0.5))]
    for m in measures:
        assert m.mass_at(0.0) < 1
        for sigma in (0.05, 0.1):
            rep = sb.hypothesis7_gap(m, sigma)
            assert rep.positive and rep.gap > 0
    for sigma in (0.05, 0.1):
        rep = sb.hypothesis7_gap(mk.delta(0.0), sigma)
        assert rep.gap == 0.0 and rep.positive is False


def test_criterion_10_traveling_residual_and_refinement():
    for run in RUNS:
        f = S.front(*run).front
        assert f is not None and f.accepted
        assert f.residual < 1e-3 and f.residual_2tau < 1e-3
    for run in (("two_point", 0.3), ("lattice", 0.3)):
        coarse, fine = S.front(*run, step=0.05), S.front(*run, step=0.025)
        f = fine.front
        assert f is not None and f.residual < 1e-3 and f.residual_2tau < 1e-3
        assert abs(coarse.c - fine.c) < 2e-3
