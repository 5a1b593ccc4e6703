import numpy as np
import pytest
from hypothesis import given, strategies as st

from nonlocal_fronts import profile_kit as pk
from nonlocal_fronts.profile_kit import AffineMap, GridFunction, Profile, ProfileError

H = 0.05


def step_at(x0, lo=-10.0, hi=10.0, h=H):
    return pk.step_profile(x0, lo, hi, h)


@st.composite
def profiles(draw, n=81, h=0.25, grid_min=-10.0):
    inc = draw(st.lists(st.floats(0, 1), min_size=n, max_size=n))
    c = np.cumsum(inc)
    lo, hi = sorted(draw(st.tuples(st.floats(0, 1), st.floats(0, 1))))
    v = lo + (hi - lo) * (c / c[-1] if c[-1] > 0 else np.zeros(n))
    return Profile(grid_min, h, v)


# -- the type -------------------------------------------------------------------

def test_profile_rejects_invalid_values():
    with pytest.raises(ProfileError):
        Profile(0.0, 0.1, [0.2, 0.1, 0.3])
    with pytest.raises(ProfileError):
        Profile(0.0, 0.1, [0.0, 1.2])
    with pytest.raises(ProfileError):
        Profile(0.0, 0.1, [0.3, 0.5], left_tail=0.4)
    with pytest.raises(ProfileError):
        Profile(0.0, -0.1, [0.3, 0.5])


def test_profile_defaults_and_immutability():
    u = Profile(-1.0, 0.5, [0.1, 0.2, 0.7, 0.9, 0.9])
    assert (u.left_tail, u.right_tail) == (0.1, 0.9)
    assert u.grid_max == 1.0
    with pytest.raises(ValueError):
        u.values[0] = 0.0


def test_grid_function_is_unconstrained():
    g = GridFunction(0.0, 1.0, [3.0, -1.0, 2.0])
    assert g.left_tail == 3.0


def test_affine_map_needs_positive_slope():
    with pytest.raises(ValueError):
        AffineMap(0.0, 1.0)
    rho = AffineMap(2.0, 1.0)
    assert rho(3.0) == 4.0
    assert rho.inverse(4.0) == 3.0


# -- evaluate -------------------------------------------------------------------

def test_evaluate_examples():
    u = step_at(0.0)
    assert pk.evaluate(u, -5.0) == 0.0
    v = Profile(0.0, 0.5, [0.1, 0.3, 0.8])
    assert [pk.evaluate(v, x) for x in v.x] == [0.1, 0.3, 0.8]
    assert pk.evaluate(v, 0.25) == pytest.approx(0.2)
    assert pk.evaluate(v, -100.0) == 0.1 and pk.evaluate(v, 100.0) == 0.8


# -- translate ------------------------------------------------------------------

def test_translate_examples():
    u = pk.ramp_profile(-1.0, 1.0, -10.0, 10.0, H)
    assert pk.sup_dist(pk.translate(u, 0.0), u) == 0.0
    a, b = 0.35, -1.2
    lhs = pk.translate(pk.translate(u, a, True), b, True)
    rhs = pk.translate(u, a + b, True)
    assert np.array_equal(lhs.values, rhs.values)
    s = pk.translate(step_at(0.0), 2.0)
    assert pk.level_crossing(s, 0.5) == pytest.approx(2.0 + H / 2)


@given(profiles(), st.integers(-8, 8))
def test_translate_is_an_isometry(u, k):
    v = pk.step_profile(0.3, -10.0, 10.0, 0.25)
    h = k * 0.25
    d0 = pk.sup_dist(u, v, window=(-5.0, 5.0))
    d1 = pk.sup_dist(pk.translate(u, h), pk.translate(v, h), window=(-5.0 + h, 5.0 + h))
    assert d1 == pytest.approx(d0, abs=1e-15)


def test_translate_resample_non_aligned():
    u = pk.ramp_profile(-1.0, 1.0, -10.0, 10.0, H)
    v = pk.translate(u, 0.123, resample_to_grid=True)
    assert v.grid_min == u.grid_min
    np.testing.assert_allclose(v.values, u(u.x - 0.123), atol=1e-15)


# -- affine_precompose ----------------------------------------------------------

def test_affine_precompose_examples():
    u = pk.ramp_profile(-2.0, 3.0, -10.0, 10.0, H)
    assert np.array_equal(pk.affine_precompose(u, AffineMap(1.0, 0.0)).values, u.values)
    s = pk.affine_precompose(step_at(0.0), AffineMap(2.0, 1.0))
    assert pk.level_crossing(s, 0.5) == pytest.approx(1.0, abs=H)


@given(st.integers(-40, 40))
def test_affine_precompose_slope_one_is_translation(k):
    u = pk.ramp_profile(-2.0, 3.0, -10.0, 10.0, H)
    c = k * H
    a = pk.affine_precompose(u, AffineMap(1.0, c))
    b = pk.translate(u, c, resample_to_grid=True)
    np.testing.assert_allclose(a.values, b.values, atol=1e-15)


def test_affine_precompose_recentred_limit_is_translation():
    # rho_n(x) = ((n + d)/n)(x - m); with y_n = xi * n the recentred
    # x -> u(rho_n(x + y_n) - y_n) tends to u(x - c), c = m - d xi
    d, m, xi = 0.8, 0.3, 0.25     # c = 0.1 is grid aligned
    c = m - d * xi
    h = 0.1
    errs = []
    for n in (10, 100, 1000):
        y = xi * n
        L = y + 20.0
        base = pk.ramp_profile(-1.5, 1.5, -20.0, 20.0, h)
        big = pk.resample(base, -L, h, int(round(2 * L / h)) + 1)
        moved = pk.translate(big, y)                  # u(. - y_n)
        a = pk.affine_precompose(moved, AffineMap((n + d) / n, m), grid=big)
        rec = pk.translate(a, -y)                     # then evaluate at x + y_n
        errs.append(pk.sup_dist(rec, pk.translate(base, c), window=(-5.0, 5.0)))
    assert errs[0] > errs[1] > errs[2]
    assert errs[2] < 1e-3


# -- comparisons ----------------------------------------------------------------

def test_leq_examples():
    u = pk.ramp_profile(-1.0, 1.0, -5.0, 5.0, H)
    assert pk.leq(u, u, 0.0)
    assert pk.leq(pk.constant_profile(0.0, -1, 1, 0.5), u)
    assert pk.leq(step_at(0.0), step_at(-1.0))
    assert not pk.leq(step_at(-1.0), step_at(0.0))


def test_leq_on_different_grids_uses_union_points():
    a = Profile(0.0, 1.0, [0.0, 1.0])
    b = Profile(0.0, 0.3, [0.0, 0.2, 0.7, 0.95])
    assert pk.max_violation(a, b) == pytest.approx(max(0.3 - 0.2, 0.6 - 0.7, 0.9 - 0.95, 0))


def test_sup_dist_examples():
    u = pk.ramp_profile(-1.0, 1.0, -5.0, 5.0, H)
    assert pk.sup_dist(u, u) == 0.0
    assert pk.sup_dist(pk.constant_profile(0, -1, 1, H), pk.constant_profile(1, -1, 1, H)) == 1.0
    d = pk.sup_dist(step_at(0.0), pk.translate(step_at(0.0), 0.02), window=(-1.0, 1.0))
    assert 0 < d <= 1


# -- level_crossing -------------------------------------------------------------

def test_level_crossing_examples():
    assert pk.level_crossing(step_at(0.0), 0.5) == pytest.approx(0.0, abs=H)
    ramp = pk.ramp_profile(0.0, 1.0, -2.0, 3.0, 0.01)
    assert pk.level_crossing(ramp, 0.25) == pytest.approx(0.25, abs=1e-12)
    assert pk.level_crossing(pk.translate(ramp, 0.77), 0.25) == pytest.approx(1.02, abs=1e-12)
    with pytest.raises(ProfileError, match="level not crossed"):
        pk.level_crossing(ramp, 1.0)


@given(profiles(), st.floats(0.01, 0.99), st.floats(0.01, 0.99))
def test_level_crossing_monotone_in_level(u, a, b):
    lo, hi = sorted((a, b))
    if not (u.left_tail < lo and hi < u.right_tail):
        return
    assert pk.level_crossing(u, lo) <= pk.level_crossing(u, hi)


@given(profiles(), st.floats(0.05, 0.95))
def test_level_crossing_is_the_smallest_point_reaching_the_level(u, level):
    if not u.left_tail < level < u.right_tail:
        return
    x = pk.level_crossing(u, level)
    assert pk.evaluate(u, x) == pytest.approx(level, abs=1e-12)
    left = u.x[u.x < x - 1e-12]
    assert np.all(pk.evaluate(u, left) < level + 1e-12)


# -- sub-front transforms -------------------------------------------------------

def test_plus_transform_maps_endpoints():
    a = 0.3
    for v, expect in ((0.0, a), (1.0, 1.0)):
        out = pk.sub_front_transform(pk.constant_profile(v, -1, 1, 0.5), "plus", a)
        assert np.allclose(out.values, expect)


@pytest.mark.parametrize("side", ["minus", "plus"])
def test_transform_inverse_pair(side):
    a = 0.3
    u = pk.ramp_profile(-2.0, 3.0, -10.0, 10.0, H)
    back = pk.sub_front_transform(pk.sub_front_transform(u, side, a, "forward"), side, a, "inverse")
    assert pk.sup_dist(back, u, window=(-9.0, 9.0)) <= 1e-12


def test_minus_transform_swaps_limits():
    a = 0.3
    u = pk.ramp_profile(-1.0, 4.0, -10.0, 10.0, H)
    r = pk.sub_front_transform(u, "minus", a)
    assert (r.left_tail, r.right_tail) == (0.0, a)
    # R_-[u](x) = alpha (1 - u(-x))
    x = np.linspace(-9, 9, 37)
    np.testing.assert_allclose(pk.evaluate(r, x), a * (1 - pk.evaluate(u, -x)), atol=1e-15)


def test_transform_range_errors():
    u = pk.ramp_profile(-1.0, 1.0, -5.0, 5.0, H)
    with pytest.raises(ProfileError):
        pk.sub_front_transform(u, "minus", 0.3, "inverse")
    with pytest.raises(ProfileError):
        pk.sub_front_transform(u, "plus", 0.3, "inverse")
    with pytest.raises(ValueError):
        pk.sub_front_transform(u, "middle", 0.3)


# -- monotone_project -----------------------------------------------------------

def test_monotone_project_examples():
    v, c = pk.monotone_project([0.1, 0.2, 0.5], return_correction=True)
    assert list(v) == [0.1, 0.2, 0.5] and c == 0.0
    v, c = pk.monotone_project([0.5, 0.4], return_correction=True)
    assert list(v) == [0.5, 0.5] and c == pytest.approx(0.1)
    assert pk.monotone_project([0.2, 1.2])[-1] == 1.0


@given(st.lists(st.floats(-0.5, 1.5), min_size=2, max_size=50))
def test_monotone_project_output_is_a_profile(values):
    out = pk.monotone_project(values)
    assert np.all(np.diff(out) >= 0)
    assert out.min() >= 0 and out.max() <= 1
    Profile(0.0, 1.0, out)


# -- shift_cells and I/O --------------------------------------------------------

def test_shift_cells_fills_from_tails():
    u = Profile(0.0, 1.0, [0.2, 0.4, 0.6, 0.8], 0.1, 0.9)
    assert list(pk.shift_cells(u, 1).values) == [0.1, 0.2, 0.4, 0.6]
    assert list(pk.shift_cells(u, -2).values) == [0.6, 0.8, 0.9, 0.9]
    assert list(pk.shift_cells(u, 10).values) == [0.1] * 4


@given(profiles())
def test_profile_csv_round_trip_is_bit_exact(tmp_path_factory, u):
    path = tmp_path_factory.mktemp("io") / "u.csv"
    pk.write_profile(u, path)
    back = pk.read_profile(path)
    assert np.array_equal(back.values, u.values)
    assert (back.left_tail, back.right_tail, back.step) == (u.left_tail, u.right_tail, u.step)
    assert back.grid_min == u.grid_min


def test_read_profile_checks_header(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("a,b\n0,0\n")
    (tmp_path / "bad.json").write_text('{"left_tail": 0, "right_tail": 0, "step": 1}')
    with pytest.raises(ProfileError):
        pk.read_profile(p)
