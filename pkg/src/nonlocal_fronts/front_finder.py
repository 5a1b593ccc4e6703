"""Traveling fronts by monotone iteration of a symmetry-broken map.

Pipeline:

1. :func:`extend_nonlinearity` and :func:`build_sub_super` give a sub-solution
   ``psi_lower`` and a super-solution ``psi_upper`` with explicit speeds.
2. :func:`tighten_speeds` shrinks the speed bracket to the smallest one the
   time-``tau`` map admits for the same two profiles.
3. For each ``n`` the map ``Q_n = Q^tau o A_n`` with ``A_n u = u o rho_n``
   is iterated from the shifted sub-solution (:func:`perturbed_fixed_point`).
4. :func:`extract_front` reads the level crossings ``y_n, z_n`` of the fixed
   points, extrapolates ``y_n / n`` to ``n -> inf`` and turns the limit into a
   speed; the recentred profiles give the front.

:func:`measure_speed` is an independent check by direct simulation.
"""
from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from . import measure_kit as mk
from .profile_kit import (AffineMap, Profile, ProfileError, affine_precompose, evaluate,
                          level_crossing, max_violation, monotone_project, ramp_profile,
                          resample, shift_cells, sub_front_transform, sup_dist, translate)
from .semiflow import ExtendedNonlinearity, Nonlinearity, SemiflowConfig, evolve

__all__ = [
    "RampFn",
    "SubSuperPair",
    "RecursionConfig",
    "RecursionTrace",
    "FrontResult",
    "EpsilonTooLarge",
    "RecursionError_",
    "extend_nonlinearity",
    "build_sub_super",
    "build_sub_super_auto",
    "tighten_speeds",
    "check_subsuper_evolution",
    "perturbed_fixed_point",
    "run_recursion",
    "extract_front",
    "classify_limits",
    "traveling_residual",
    "measure_speed",
    "simulate_subfront",
    "solve_front",
]

log = logging.getLogger(__name__)


class EpsilonTooLarge(ValueError):
    def __init__(self, eps, margin, suggested):
        super().__init__(f"epsilon too large: eps={eps:g} gives residual margin {margin:.3g} < 0; "
                         f"try eps={suggested:g}")
        self.eps, self.margin, self.suggested = eps, margin, suggested


class RecursionError_(RuntimeError):
    """Failure of the fixed-point recursion (non-convergence or broken ordering)."""


# -- ramp and nonlinearity extension ----------------------------------------

@dataclass(frozen=True)
class RampFn:
    """C^1 ramp: 0 on (-inf, 0], 1 on [1, inf), strictly increasing in between.

    The default is the smoothstep ``z^2 (3 - 2 z)``; ``epsilon`` is the
    spatial scale used when the ramp builds sub- and super-solutions.
    """

    epsilon: float = 0.05
    kind: str = "smoothstep"

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.kind != "smoothstep":
            raise ValueError(f"unknown ramp kind {self.kind!r}")

    def __call__(self, z):
        z = np.clip(np.asarray(z, dtype=float), 0.0, 1.0)
        return z * z * (3.0 - 2.0 * z)

    def derivative(self, z):
        z = np.asarray(z, dtype=float)
        inside = (z > 0) & (z < 1)
        return np.where(inside, 6.0 * z * (1.0 - z), 0.0)

    def inverse(self, r: float) -> float:
        # bisection; the ramp is strictly increasing on (0, 1)
        lo, hi = 0.0, 1.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            if self(mid) < r:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)


def extend_nonlinearity(f: Nonlinearity, slope_out: float = 1.0) -> ExtendedNonlinearity:
    """Linear continuation of ``f`` outside [0, 1] with the signs needed for comparison."""
    return ExtendedNonlinearity(f, slope_out)


# -- sub- and super-solutions ------------------------------------------------

@dataclass
class SubSuperPair:
    psi_lower: Profile
    c_lower: float
    psi_upper: Profile
    c_upper: float
    delta: float
    C_const: float
    residual_lower: float
    residual_upper: float
    eps: float
    alpha: float
    lemma_speeds: tuple = ()

    @property
    def half_width(self) -> float:
        return 0.5 * (self.c_upper - self.c_lower)

    @property
    def center(self) -> float:
        return 0.5 * (self.c_upper + self.c_lower)


def _conv_points(m: mk.Measure, g, x):
    """``int g(x - y) dm(y)`` for a vectorised function ``g``."""
    out = np.zeros_like(x, dtype=float)
    for loc, w in m.atoms:
        out += w * g(x - loc)
    d = m.density
    if d is not None:
        wts = d.weights()
        for y, w in zip(d.x, wts):
            out += w * g(x - y)
    return out


def _lemma_constants(fhat, alpha, ramp: RampFn):
    a = alpha
    ys1 = np.concatenate([np.linspace(-(1 - a) / 4, -(1 - a) / 8, 201),
                          np.linspace(1 - (1 - a) / 2, 1 - (1 - a) / 4, 201)])
    ys2 = np.concatenate([np.linspace(a / 4, a / 2, 201), np.linspace(1 + a / 8, 1 + a / 4, 201)])
    delta = min(float(np.min(fhat(ys1))), float(np.min(-fhat(ys2))))
    lo_r = min((1 - a) / 8, a / 4)
    hi_r = 1 - min((1 - a) / 4, a / 8)
    z = np.linspace(ramp.inverse(lo_r), ramp.inverse(hi_r), 2001)
    C = float(np.min(ramp.derivative(z)))
    return delta, C


def build_sub_super(fhat: ExtendedNonlinearity, m: mk.Measure, eps: float | None = None,
                    ramp: RampFn = RampFn(), step: float = 0.05, t_check: float = 1.0,
                    n_t: int = 41, n_z: int = 401) -> SubSuperPair:
    """Ramp sub- and super-solutions and their speeds ``-1/eps^2``, ``+1/eps^2``.

    The residuals of both differential inequalities are evaluated on a
    space-time grid of ``n_t * n_z`` points that covers the whole ramp at
    every sampled time.  A negative residual raises :class:`EpsilonTooLarge`.
    """
    eps = ramp.epsilon if eps is None else eps
    if not eps > 0:
        raise ValueError("eps must be positive")
    a = fhat.alpha
    shift_lo, shift_hi = (1 - a) / 4, a / 4
    t = np.linspace(0.0, t_check, n_t)[:, None]
    z = np.linspace(-0.5, 1.5, n_z)[None, :]
    # lower: u(t, x) = rho(eps x - t / eps) - (1-a)/4 with eps x - t/eps = z
    x = (z + t / eps) / eps
    g_lo = lambda xx: ramp(eps * xx - t / eps) - shift_lo  # noqa: E731
    u = g_lo(x)
    ut = -ramp.derivative(eps * x - t / eps) / eps
    res_lo = _conv_points(m, g_lo, x) - u + fhat(u) - ut
    # upper: u(t, x) = rho(eps x + t/eps + 1) + a/4 with the ramp argument = z
    x = (z - 1 - t / eps) / eps
    g_hi = lambda xx: ramp(eps * xx + t / eps + 1) + shift_hi  # noqa: E731
    u = g_hi(x)
    ut = ramp.derivative(eps * x + t / eps + 1) / eps
    res_hi = ut - (_conv_points(m, g_hi, x) - u + fhat(u))
    r_lo, r_hi = float(res_lo.min()), float(res_hi.min())
    delta, C = _lemma_constants(fhat, a, ramp)
    if min(r_lo, r_hi) < 0:
        raise EpsilonTooLarge(eps, min(r_lo, r_hi), eps / 2)

    width = 1.0 / eps
    L = math.ceil((width + 2.0) / step) * step
    xs = -L + step * np.arange(int(round(2 * L / step)) + 1)
    lower = np.maximum(ramp(eps * xs) - shift_lo, 0.0)
    upper = np.minimum(ramp(eps * xs + 1) + shift_hi, 1.0)
    c = 1.0 / eps ** 2
    return SubSuperPair(Profile(-L, step, lower, 0.0, 1 - shift_lo), -c,
                        Profile(-L, step, upper, shift_hi, 1.0), c,
                        delta, C, r_lo, r_hi, eps, a, (-c, c))


def build_sub_super_auto(fhat, m, eps: float = 0.05, max_halvings: int = 6, **kw) -> SubSuperPair:
    """:func:`build_sub_super`, halving ``eps`` until the residual check passes."""
    last = None
    for _ in range(max_halvings + 1):
        try:
            return build_sub_super(fhat, m, eps, **kw)
        except EpsilonTooLarge as err:
            last = err
            eps /= 2
    raise last


def _apply_shift(P: Profile, c: float, x):
    """Values of ``x -> P(x - c)``."""
    return evaluate(P, np.asarray(x) - c)


def check_subsuper_evolution(pair: SubSuperPair, flow: SemiflowConfig, times=(1.0, 2.0, 4.0),
                             speeds: tuple | None = None) -> float:
    """Largest violation of ``Q^t psi_lower(x) >= psi_lower(x + c_lower t)`` and
    ``Q^t psi_upper(x) <= psi_upper(x + c_upper t)`` over the sampled times."""
    cl, cu = (pair.c_lower, pair.c_upper) if speeds is None else speeds
    worst = 0.0
    pad = math.ceil((flow.measure.support_radius * max(times) * 4 + 10) / pair.psi_lower.step)
    for psi, c, sign in ((pair.psi_lower, cl, 1.0), (pair.psi_upper, cu, -1.0)):
        big = _pad(psi, pad)
        prev = 0.0
        u = big
        for t in sorted(times):
            u = evolve(u, t - prev, flow)
            prev = t
            target = evaluate(psi, u.x + c * t)
            viol = sign * (target - u.values)
            worst = max(worst, float(viol.max()))
    return worst


def _pad(u: Profile, cells: int) -> Profile:
    v = np.concatenate([np.full(cells, u.left_tail), u.values, np.full(cells, u.right_tail)])
    return Profile(u.grid_min - cells * u.step, u.step, v, u.left_tail, u.right_tail)


def tighten_speeds(pair: SubSuperPair, flow: SemiflowConfig, tau: float = 1.0) -> SubSuperPair:
    """Smallest speed bracket for the time-``tau`` map and the same two profiles.

    Returns a copy of ``pair`` with ``c_lower`` the largest and ``c_upper`` the
    smallest whole-cell speed such that ``psi_lower(x) <= Q^tau[psi_lower](x - c_lower)``
    and ``Q^tau[psi_upper](x - c_upper) <= psi_upper(x)`` hold on the grid.  The
    bracket is widened by at most one cell so that its centre and half-width
    are whole cells.
    """
    h = pair.psi_lower.step
    pad = math.ceil((flow.measure.support_radius * tau * 8 + 20) / h)

    def best(psi, lower):
        big = _pad(psi, pad)
        P = evolve(big, tau, flow)

        def ok(k):
            S = shift_cells(P, k)
            if lower:
                return max_violation(big, S) <= 0.0
            return max_violation(S, big) <= 0.0

        lo, hi = -big.n, big.n
        if lower:
            # ok(lo) holds, ok(hi) fails; find the largest k that holds
            while hi - lo > 1:
                mid = (lo + hi) // 2
                lo, hi = (mid, hi) if ok(mid) else (lo, mid)
            return lo
        while hi - lo > 1:
            mid = (lo + hi) // 2
            lo, hi = (lo, mid) if ok(mid) else (mid, hi)
        return hi

    k1 = best(pair.psi_lower, True)
    k2 = best(pair.psi_upper, False)
    if k1 > k2:
        raise RecursionError_(f"sub-solution speed {k1 * h:g} exceeds super-solution speed {k2 * h:g}")
    if (k2 - k1) % 2:
        k1 -= 1
    return replace(pair, c_lower=k1 * h, c_upper=k2 * h)


# -- the recursion -----------------------------------------------------------

@dataclass
class RecursionConfig:
    n_list: tuple = (10, 20, 40)
    tau: float = 1.0
    fixpoint_tol: float = 1e-7
    max_iters: int = 20000
    N0: float = 0.0
    level_lo: float = 0.0
    level_hi: float = 0.0
    sandwich_tol: float = 1e-8
    pad: float = 12.0
    cauchy_tol: float = 5e-3
    front_tol: float = 1e-3

    def __post_init__(self):
        if list(self.n_list) != sorted(set(self.n_list)) or min(self.n_list) < 1:
            raise ValueError("n_list must be increasing positive integers")
        if self.level_lo and self.level_hi and not 0 < self.level_lo < self.level_hi < 1:
            raise ValueError("need 0 < level_lo < level_hi < 1")

    @classmethod
    def from_pair(cls, pair: SubSuperPair, **kw) -> RecursionConfig:
        """Crossing levels from the tail values of the pair at ``+-N0``."""
        a = pair.alpha
        N0 = kw.pop("N0", None)
        if N0 is None:
            N0 = float(math.ceil(1.0 / pair.eps) + 1)
        up_at = float(evaluate(pair.psi_upper, -N0))
        lo_at = float(evaluate(pair.psi_lower, N0))
        if not 0 <= up_at < a < lo_at <= 1:
            raise ValueError(f"N0={N0:g} does not separate the pair around alpha")
        lo = kw.pop("level_lo", None)
        hi = kw.pop("level_hi", None)
        lo = 0.5 * (up_at + a) if lo is None else lo
        hi = 0.5 * (a + lo_at) if hi is None else hi
        if not 0 < lo < a < hi < 1:
            raise ValueError("levels must satisfy 0 < level_lo < alpha < level_hi < 1")
        return cls(N0=N0, level_lo=lo, level_hi=hi, **kw)


@dataclass
class FixedPoint:
    n: int
    phi: Profile
    residual: float
    iterations: int
    sandwich_violation: float
    monotone_violation: float
    history: list = field(default_factory=list, repr=False)


def _recursion_grid(n, pair: SubSuperPair, cfg: RecursionConfig):
    h = pair.psi_lower.step
    span = n + pair.half_width + 1.0 / pair.eps + cfg.pad + abs(pair.center)
    L = math.ceil(span / h) * h
    return -L, h, int(round(2 * L / h)) + 1


def perturbed_fixed_point(n: int, pair: SubSuperPair, cfg: RecursionConfig,
                          flow: SemiflowConfig) -> FixedPoint:
    """Monotone iteration of ``Q_n`` from the shifted sub-solution.

    Every iterate is checked against the sandwich ``psi_lower_n <= u <= psi_upper_n``
    and for growth in the iteration index; either failure raises
    :class:`RecursionError_`.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    d, mid = pair.half_width, pair.center
    gmin, h, npts = _recursion_grid(n, pair, cfg)
    shift = n + d
    lower = resample(translate(pair.psi_lower, shift), gmin, h, npts)
    upper = resample(translate(pair.psi_upper, -shift), gmin, h, npts)
    rho = AffineMap((n + d) / n, mid)
    u = lower
    history = []
    sand = mono = 0.0
    for it in range(1, cfg.max_iters + 1):
        new = evolve(affine_precompose(u, rho), cfg.tau, flow)
        sand = max(sand, max_violation(lower, new), max_violation(new, upper))
        mono = max(mono, max_violation(u, new))
        if sand > cfg.sandwich_tol:
            raise RecursionError_(f"order preservation broken at n={n}, iteration {it}: "
                                  f"sandwich violated by {sand:.3g}")
        if mono > cfg.sandwich_tol:
            raise RecursionError_(f"order preservation broken at n={n}, iteration {it}: "
                                  f"iterates decreased by {mono:.3g}")
        diff = sup_dist(new, u)
        history.append(diff)
        if diff < cfg.fixpoint_tol:
            return FixedPoint(n, u, diff, it, sand, mono, history)
        u = new
    raise RecursionError_(f"no convergence for n={n} in {cfg.max_iters} iterations; "
                          f"last differences {history[-3:]}")


@dataclass
class RecursionTrace:
    n: list
    residual: list
    y: list
    z: list
    xi_minus: float = float("nan")
    xi_plus: float = float("nan")
    c_minus: float = float("nan")
    c_plus: float = float("nan")
    c_lower: float = float("nan")
    c_upper: float = float("nan")

    def rows(self) -> list:
        return [{"n": n, "residual": r, "y_n": y, "z_n": z, "y_n/n": y / n, "z_n/n": z / n}
                for n, r, y, z in zip(self.n, self.residual, self.y, self.z)]

    def to_dict(self) -> dict:
        return {"rows": self.rows(), "xi_minus": self.xi_minus, "xi_plus": self.xi_plus,
                "c_minus": self.c_minus, "c_plus": self.c_plus,
                "c_lower": self.c_lower, "c_upper": self.c_upper}


@dataclass
class FrontResult:
    c: float
    phi: Profile
    residual: float
    residual_2tau: float
    limits: tuple
    branch: str
    accepted: bool = False

    def to_dict(self) -> dict:
        return {"c": self.c, "residual": self.residual, "residual_2tau": self.residual_2tau,
                "limits": list(self.limits), "branch": self.branch, "accepted": self.accepted}


def run_recursion(pair, cfg: RecursionConfig, flow: SemiflowConfig, jobs: int = 1) -> list:
    """Fixed points for every ``n`` in ``cfg.n_list``; ``jobs > 1`` solves them in
    separate processes (results are identical and returned in ``n`` order)."""
    if jobs <= 1 or len(cfg.n_list) == 1:
        return [perturbed_fixed_point(n, pair, cfg, flow) for n in cfg.n_list]
    with ProcessPoolExecutor(max_workers=min(jobs, len(cfg.n_list))) as ex:
        futs = [ex.submit(perturbed_fixed_point, n, pair, cfg, flow) for n in cfg.n_list]
        return [f.result() for f in futs]


def _extrapolation_weights(ns) -> np.ndarray:
    """Weights ``w`` with ``sum w_i g(1/n_i) = g(0)`` for polynomials of degree < len(ns)."""
    h = 1.0 / np.asarray(ns, dtype=float)
    w = np.empty(h.size)
    for i in range(h.size):
        others = np.delete(h, i)
        w[i] = np.prod(others / (others - h[i]))
    return w


def _extrapolate(ns, vals) -> tuple[float, float]:
    """Limit estimate and its change when the smallest ``n`` is dropped."""
    ns = list(ns)
    vals = np.asarray(vals, dtype=float)
    full = float(_extrapolation_weights(ns) @ vals)
    if len(ns) > 2:
        sub = float(_extrapolation_weights(ns[1:]) @ vals[1:])
    else:
        sub = float(vals[-1])
    return full, abs(full - sub)


def classify_limits(phi: Profile, alpha: float, tol: float = 1e-3) -> tuple:
    """Snap both tail values to the nearest of 0, alpha, 1."""
    out = []
    for v in (phi.left_tail, phi.right_tail):
        cands = np.array([0.0, alpha, 1.0])
        j = int(np.argmin(np.abs(cands - v)))
        if abs(cands[j] - v) > tol:
            raise ValueError(f"profile not settled; enlarge domain or time (tail {v:.4g})")
        out.append(float(cands[j]))
    return tuple(out)


def traveling_residual(phi: Profile, c: float, tau: float, flow: SemiflowConfig,
                       window: tuple | None = None) -> float:
    """``sup |Q^tau[phi](x - c tau) - phi(x)|`` over ``window``."""
    pad = math.ceil((abs(c) * tau + flow.measure.support_radius * tau * 8 + 10) / phi.step)
    P = evolve(_pad(phi, pad), tau, flow)
    x = phi.x
    if window is not None:
        x = x[(x >= window[0]) & (x <= window[1])]
    return float(np.max(np.abs(evaluate(P, x - c * tau) - evaluate(phi, x))))


def extract_front(points: list, pair: SubSuperPair, cfg: RecursionConfig, flow: SemiflowConfig,
                  window: float = 25.0) -> tuple[FrontResult, FrontResult, RecursionTrace]:
    """Speeds and recentred profiles from the fixed points of several ``n``.

    ``y_n / n`` and ``z_n / n`` are extrapolated to ``n -> inf`` by polynomial
    extrapolation in ``1/n``; the recentred profiles ``phi_n(. + y_n)`` are
    extrapolated the same way, pointwise, and projected back to monotone.
    """
    if len(points) < 2:
        raise ValueError("need at least two values of n")
    ns = [p.n for p in points]
    d, mid = pair.half_width, pair.center
    ys = [level_crossing(p.phi, cfg.level_lo) for p in points]
    zs = [level_crossing(p.phi, cfg.level_hi) for p in points]
    xi_m, dm = _extrapolate(ns, [y / n for y, n in zip(ys, ns)])
    xi_p, dp = _extrapolate(ns, [z / n for z, n in zip(zs, ns)])
    if d * max(dm, dp) > cfg.cauchy_tol:
        raise RecursionError_(f"xi sequence not Cauchy within tolerance "
                              f"(speed change {d * max(dm, dp):.3g}); increase n_list")
    c_m = mid - d * xi_m
    c_p = mid - d * xi_p
    trace = RecursionTrace(ns, [p.residual for p in points], ys, zs, xi_m, xi_p, c_m, c_p,
                           pair.c_lower, pair.c_upper)

    h = points[0].phi.step
    W = math.ceil(window / h) * h
    npts = int(round(2 * W / h)) + 1
    w = _extrapolation_weights(ns)
    results = []
    for branch, c, cross in (("minus", c_m, ys), ("plus", c_p, zs)):
        vals = sum(wi * resample(translate(p.phi, -x0), -W, h, npts).values
                   for wi, p, x0 in zip(w, points, cross))
        lt = float(sum(wi * p.phi.left_tail for wi, p in zip(w, points)))
        rt = float(sum(wi * p.phi.right_tail for wi, p in zip(w, points)))
        full = monotone_project(np.concatenate([[lt], vals, [rt]]))
        phi = Profile(-W, h, full[1:-1], full[0], full[-1])
        res1 = traveling_residual(phi, c, cfg.tau, flow, window=(-W + 5, W - 5))
        res2 = traveling_residual(phi, c, 2 * cfg.tau, flow, window=(-W + 5, W - 5))
        try:
            limits = classify_limits(phi, pair.alpha)
        except ValueError:
            limits = (float("nan"), float("nan"))
        ok = limits == (0.0, 1.0) and max(res1, res2) < cfg.front_tol
        results.append(FrontResult(c, phi, res1, res2, limits, branch, ok))
    return results[0], results[1], trace


# -- direct simulation -------------------------------------------------------

@dataclass
class SpeedTrack:
    c: float
    times: np.ndarray
    positions: np.ndarray
    final: Profile


def measure_speed(u0: Profile, T: float, flow: SemiflowConfig, level: float | None = None,
                  sample_dt: float = 0.5, return_track: bool = False, edge_tol: float = 1e-8):
    """Speed ``c`` of ``u(t, x) = phi(x + c t)`` from direct simulation.

    The crossing of ``level`` (default ``alpha``) is tracked; the profile is
    recentred by whole cells whenever the crossing leaves the middle half of
    the grid, which is exact while the ends are flat.  ``c`` is minus the
    least-squares slope of the crossing position over the second half of
    ``[0, T]``.
    """
    level = flow.alpha if level is None else level
    u = u0
    offset = 0.0
    times, pos = [], []
    t = 0.0
    n_samples = int(round(T / sample_dt))
    quarter = 0.25 * (u.grid_max - u.grid_min)
    centre = 0.5 * (u.grid_min + u.grid_max)
    for _ in range(n_samples):
        u = evolve(u, sample_dt, flow)
        t += sample_dt
        try:
            x = level_crossing(u, level)
        except ProfileError as err:
            raise ValueError(f"front lost: {err}") from None
        if abs(x - centre) > quarter:
            k = int(round((centre - x) / u.step))
            # cells pushed off the grid must already sit at the tail value
            lost = (u.values[-k:] - u.right_tail) if k > 0 else (u.values[:-k] - u.left_tail)
            if np.abs(lost).max() > edge_tol:
                raise ValueError("domain too small: front interacts with the grid ends")
            u = shift_cells(u, k)
            offset -= k * u.step
            x = level_crossing(u, level)
        times.append(t)
        pos.append(x + offset)
    times, pos = np.array(times), np.array(pos)
    sel = times >= 0.5 * T
    slope = np.polyfit(times[sel], pos[sel], 1)[0]
    c = float(-slope)
    if return_track:
        return SpeedTrack(c, times, pos, u)
    return c


def simulate_subfront(flow: SemiflowConfig, side: str, grid=(-60.0, 60.0, 0.1), T: float = 60.0,
                      sample_dt: float = 0.5) -> FrontResult:
    """Sub-front ``0 -> alpha`` (``minus``) or ``alpha -> 1`` (``plus``) by simulation.

    A steep 0->1 ramp is pushed through the matching transform, so the
    initial data take values in [0, alpha] or [alpha, 1], and evolved with the
    bistable flow; the speed is that of the midpoint level crossing.
    """
    a = flow.alpha
    g0, g1, h = grid
    base = ramp_profile(-0.5, 0.5, g0, g1, h)
    u0 = sub_front_transform(base, side, a, "forward")
    level = a / 2 if side == "minus" else (a + 1) / 2
    tr = measure_speed(u0, T, flow, level=level, sample_dt=sample_dt, return_track=True)
    limits = classify_limits(tr.final, a, tol=1e-6)
    return FrontResult(tr.c, tr.final, float("nan"), float("nan"), limits, side, False)


# -- whole pipeline ----------------------------------------------------------

@dataclass
class FrontSolution:
    pair: SubSuperPair
    tight_pair: SubSuperPair
    points: list
    minus: FrontResult
    plus: FrontResult
    trace: RecursionTrace
    front: FrontResult | None

    @property
    def c(self) -> float:
        return float("nan") if self.front is None else self.front.c


def solve_front(flow: SemiflowConfig, n_list=(10, 20, 40), tau: float = 1.0, eps: float = 0.05,
                step: float = 0.05, slope_out: float = 1.0, auto_eps: bool = True,
                jobs: int = 1, **rcfg) -> FrontSolution:
    """Sub/super-solutions, recursion over ``n_list`` and front extraction."""
    base = flow.nonlinearity
    if not base.derivative_at_alpha > 0:
        raise ValueError("front construction needs f'(alpha) > 0")
    fhat = base if isinstance(base, ExtendedNonlinearity) else extend_nonlinearity(base, slope_out)
    builder = build_sub_super_auto if auto_eps else build_sub_super
    pair = builder(fhat, flow.measure, eps, step=step)
    tight = tighten_speeds(pair, flow, tau)
    log.info("eps=%g, speed bracket [%g, %g] tightened to [%g, %g]", pair.eps, pair.c_lower,
             pair.c_upper, tight.c_lower, tight.c_upper)
    cfg = RecursionConfig.from_pair(tight, n_list=tuple(n_list), tau=tau, **rcfg)
    points = run_recursion(tight, cfg, flow, jobs)
    log.info("fixed points: %s", ", ".join(f"n={p.n} ({p.iterations} it)" for p in points))
    minus, plus, trace = extract_front(points, tight, cfg, flow)
    accepted = [r for r in (minus, plus) if r.accepted]
    front = min(accepted, key=lambda r: r.residual) if accepted else None
    return FrontSolution(pair, tight, points, minus, plus, trace, front)
