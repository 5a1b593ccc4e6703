"""Time evolution of ``u_t = mu * u - u + f(u)`` on monotone profiles.

Space is discretised on the profile's grid (the convolution acts through a
nonnegative stencil, see :func:`measure_kit.stencil`), time by classical RK4.
For a linear system with nonnegative off-diagonal part, RK4 with
``dt * (1 + L) <= 1`` is a nonnegative matrix polynomial, so the scheme is
order preserving up to the nonlinear correction; what is left is removed by
a logged monotone projection.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from functools import partial
from typing import Callable

import numpy as np

from . import measure_kit as mk
from .profile_kit import (GridFunction, Profile, constant_profile, max_violation,
                          monotone_project, shift_cells, sup_dist)

__all__ = [
    "Nonlinearity",
    "ExtendedNonlinearity",
    "SemiflowConfig",
    "ComparisonError",
    "FlowStats",
    "rhs",
    "step",
    "evolve",
    "evolve_linear",
    "scalar_rk4",
    "certify_hypotheses",
    "HypothesisReport",
]

log = logging.getLogger(__name__)


def _cubic(u, alpha, lam):
    return -lam * u * (u - alpha) * (u - 1.0)


class ComparisonError(RuntimeError):
    """Raised when the monotone projection had to move values by more than allowed."""


@dataclass(frozen=True)
class Nonlinearity:
    """Bistable reaction term with zeros ``0 < alpha < 1``.

    Build with :meth:`cubic` or :meth:`tabulated`; a raw callable can be
    wrapped directly with ``check=False`` (used for negative controls).
    """

    alpha: float
    func: Callable = field(repr=False)
    lipschitz: float
    derivative_at_alpha: float
    name: str = "custom"
    check: bool = True

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.lipschitz <= 0:
            raise ValueError("lipschitz constant must be positive")
        if self.check:
            self.validate()

    def __call__(self, u):
        return self.func(np.asarray(u, dtype=float))

    def validate(self, samples: int = 200):
        a = self.alpha
        z = self(np.array([0.0, a, 1.0]))
        if np.max(np.abs(z)) > 1e-12:
            raise ValueError(f"f must vanish at 0, alpha, 1 (got {z})")
        lo = np.linspace(0, a, samples + 2)[1:-1]
        hi = np.linspace(a, 1, samples + 2)[1:-1]
        if np.any(self(lo) >= 0):
            raise ValueError("f must be negative on (0, alpha)")
        if np.any(self(hi) <= 0):
            raise ValueError("f must be positive on (alpha, 1)")

    @classmethod
    def cubic(cls, alpha: float, lam: float = 1.0) -> Nonlinearity:
        """``f(u) = -lam * u (u - alpha)(u - 1)``."""
        if lam <= 0:
            raise ValueError("lam must be positive")

        f = partial(_cubic, alpha=alpha, lam=lam)
        # |f'| on [0, 1] is largest at an endpoint or at the vertex of f'
        def fp(u):
            return -lam * (3 * u * u - 2 * (1 + alpha) * u + alpha)

        pts = np.array([0.0, 1.0, (1 + alpha) / 3])
        lip = float(np.max(np.abs(fp(pts))))
        return cls(alpha, f, lip, float(fp(alpha)), name=f"cubic(alpha={alpha:g}, lam={lam:g})")

    @classmethod
    def tabulated(cls, alpha: float, u_nodes, f_values, check: bool = True) -> Nonlinearity:
        u_nodes = np.asarray(u_nodes, dtype=float)
        f_values = np.asarray(f_values, dtype=float)
        slopes = np.diff(f_values) / np.diff(u_nodes)
        lip = float(np.max(np.abs(slopes)))
        j = int(np.clip(np.searchsorted(u_nodes, alpha) - 1, 0, slopes.size - 1))

        f = partial(np.interp, xp=u_nodes, fp=f_values)
        return cls(alpha, f, lip, float(slopes[j]), name="tabulated", check=check)


@dataclass(frozen=True)
class ExtendedNonlinearity:
    """``f`` on [0, 1], continued linearly with slope ``-slope_out`` outside."""

    base: Nonlinearity
    slope_out: float

    def __post_init__(self):
        if self.slope_out <= 0:
            raise ValueError("slope_out must be positive")

    @property
    def alpha(self) -> float:
        return self.base.alpha

    @property
    def lipschitz(self) -> float:
        return max(self.base.lipschitz, self.slope_out)

    @property
    def derivative_at_alpha(self) -> float:
        return self.base.derivative_at_alpha

    def __call__(self, u):
        u = np.asarray(u, dtype=float)
        inner = self.base(np.clip(u, 0.0, 1.0))
        return np.where(u < 0, -self.slope_out * u,
                        np.where(u > 1, -self.slope_out * (u - 1.0), inner))


@dataclass
class FlowStats:
    steps: int = 0
    max_correction: float = 0.0
    total_correction: float = 0.0


@dataclass
class SemiflowConfig:
    measure: mk.Measure
    nonlinearity: Nonlinearity | ExtendedNonlinearity
    dt: float = 0.1
    projection_tol: float = 1e-6
    stats: FlowStats = field(default_factory=FlowStats, repr=False, compare=False)

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        budget = self.dt * (1.0 + self.nonlinearity.lipschitz)
        if budget >= 1.0:
            raise ValueError(f"dt * (1 + lipschitz) = {budget:.3g} must be < 1; "
                             f"use dt < {1.0 / (1.0 + self.nonlinearity.lipschitz):.4g}")

    @property
    def alpha(self) -> float:
        return self.nonlinearity.alpha

    def with_(self, **changes) -> SemiflowConfig:
        kw = dict(measure=self.measure, nonlinearity=self.nonlinearity, dt=self.dt,
                  projection_tol=self.projection_tol)
        kw.update(changes)
        return SemiflowConfig(**kw)


def _field(values, left, right, st: mk.Stencil, f) -> tuple[np.ndarray, float, float]:
    conv = st.apply(values, left, right)
    m = st.mass
    g = conv - values + f(values)
    gl = (m - 1.0) * left + float(f(np.array(left)))
    gr = (m - 1.0) * right + float(f(np.array(right)))
    return g, gl, gr


def rhs(u: GridFunction, cfg: SemiflowConfig) -> GridFunction:
    """``G(u) = mu * u - u + f(u)`` sampled on ``u``'s grid (a tangent field, not a profile)."""
    st = mk.stencil(cfg.measure, u.step)
    g, gl, gr = _field(u.values, u.left_tail, u.right_tail, st, cfg.nonlinearity)
    return GridFunction(u.grid_min, u.step, g, gl, gr)


def _rk4(values, left, right, dt, F):
    k1 = F(values, left, right)
    k2 = F(values + 0.5 * dt * k1[0], left + 0.5 * dt * k1[1], right + 0.5 * dt * k1[2])
    k3 = F(values + 0.5 * dt * k2[0], left + 0.5 * dt * k2[1], right + 0.5 * dt * k2[2])
    k4 = F(values + dt * k3[0], left + dt * k3[1], right + dt * k3[2])
    return tuple(y + dt / 6.0 * (a + 2 * b + 2 * c + d)
                 for y, a, b, c, d in zip((values, left, right), k1, k2, k3, k4))


def scalar_rk4(f, y0: float, dt: float, nsteps: int) -> float:
    """Plain RK4 for ``y' = f(y)``; independent reference for constant states."""
    y = float(y0)
    for _ in range(nsteps):
        k1 = f(y)
        k2 = f(y + 0.5 * dt * k1)
        k3 = f(y + 0.5 * dt * k2)
        k4 = f(y + dt * k3)
        y = y + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    return y


def step(u: Profile, cfg: SemiflowConfig, dt: float | None = None) -> Profile:
    """One RK4 step followed by monotone projection.

    Raises :class:`ComparisonError` when the projection correction exceeds
    ``cfg.projection_tol``.
    """
    dt = cfg.dt if dt is None else dt
    st = mk.stencil(cfg.measure, u.step)
    f = cfg.nonlinearity

    def F(v, l, r):
        return _field(v, l, r, st, f)

    v, lt, rt = _rk4(u.values, u.left_tail, u.right_tail, dt, F)
    full = np.concatenate([[lt], v, [rt]])
    proj, corr = monotone_project(full, return_correction=True)
    cfg.stats.steps += 1
    cfg.stats.total_correction += corr
    cfg.stats.max_correction = max(cfg.stats.max_correction, corr)
    if corr > cfg.projection_tol:
        raise ComparisonError(f"comparison principle violated numerically: projection moved "
                              f"values by {corr:.3g} > {cfg.projection_tol:.3g}")
    return Profile(u.grid_min, u.step, proj[1:-1], proj[0], proj[-1])


def evolve(u: Profile, t: float, cfg: SemiflowConfig, callback=None) -> Profile:
    """Apply ``Q^t``: whole steps of ``cfg.dt`` and a final partial step.

    ``callback(time, profile)`` is called after every step when given.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    n = int(math.floor(t / cfg.dt + 1e-9))
    rest = t - n * cfg.dt
    time = 0.0
    for _ in range(n):
        u = step(u, cfg)
        time += cfg.dt
        if callback is not None:
            callback(time, u)
    if rest > 1e-12 * max(1.0, t):
        u = step(u, cfg, dt=rest)
        if callback is not None:
            callback(t, u)
    return u


def evolve_linear(v: GridFunction, mhat: mk.Measure, t: float, dt: float = 0.01) -> GridFunction:
    """RK4 for the linear equation ``v_t = mhat * v`` (no projection, any sign)."""
    if t < 0:
        raise ValueError("t must be nonnegative")
    st = mk.stencil(mhat, v.step)
    m = st.mass

    def F(vals, l, r):
        return st.apply(vals, l, r), m * l, m * r

    n = max(1, int(math.ceil(t / dt - 1e-9))) if t > 0 else 0
    h = t / n if n else 0.0
    vals, l, r = v.values, v.left_tail, v.right_tail
    for _ in range(n):
        vals, l, r = _rk4(vals, l, r, h, F)
    return GridFunction(v.grid_min, v.step, vals, l, r)


# -- hypothesis certification ----------------------------------------------

@dataclass
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""


@dataclass
class HypothesisReport:
    checks: list = field(default_factory=list)
    projection_budget: float = 0.0

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name) -> CheckResult:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {"passed": self.passed, "projection_budget": self.projection_budget,
                "checks": [vars(c) for c in self.checks]}


def _random_profile(rng, x, flat: float) -> np.ndarray:
    """Random nondecreasing samples in [0, 1], constant within ``flat`` of the ends."""
    n = x.size
    inner = (x > x[0] + flat) & (x < x[-1] - flat)
    inc = rng.exponential(size=n) * inner
    inc[rng.random(n) < 0.7] = 0.0
    c = np.cumsum(inc)
    if c[-1] == 0:
        c = inner.cumsum().astype(float)
    lo, hi = np.sort(rng.random(2))
    return lo + (hi - lo) * c / c[-1]


def certify_hypotheses(cfg: SemiflowConfig, trials: int = 100, seed: int = 0, tau: float = 1.0,
                       grid: tuple = (-20.0, 20.0, 0.1), t_const: float = 10.0,
                       order_tol: float = 1e-8, shift_tol: float = 1e-8) -> HypothesisReport:
    """Numerical check of order preservation, translation equivariance,
    bistable constant dynamics and continuity of ``Q^tau``."""
    rng = np.random.default_rng(seed)
    a, b, h = grid
    x = a + h * np.arange(int(round((b - a) / h)) + 1)
    radius = cfg.measure.support_radius
    flat = radius * (1 + tau) + 1.0
    rep = HypothesisReport()
    start = cfg.stats.total_correction

    def Q(u, t=tau):
        return evolve(u, t, cfg)

    # (ii) order preservation on random ordered pairs
    worst = 0.0
    for _ in range(trials):
        v1 = _random_profile(rng, x, flat)
        v2 = np.maximum(v1, _random_profile(rng, x, flat))
        worst = max(worst, max_violation(Q(Profile(a, h, v1)), Q(Profile(a, h, v2))))
    budget = cfg.stats.total_correction - start
    rep.checks.append(CheckResult("order_preserving", worst <= order_tol + budget, worst,
                                  f"{trials} ordered pairs"))

    # (iii) translation equivariance for whole-cell shifts, away from the boundary
    worst = 0.0
    window_pad = radius * tau * 4 + 1.0
    for _ in range(max(3, trials // 10)):
        k = int(rng.integers(1, 30))
        u = Profile(a, h, _random_profile(rng, x, flat + k * h))
        lhs = Q(shift_cells(u, k))
        rhs_ = shift_cells(Q(u), k)
        win = (a + window_pad + k * h, b - window_pad)
        worst = max(worst, sup_dist(lhs, rhs_, window=win))
    rep.checks.append(CheckResult("translation_invariant", worst <= shift_tol, worst))

    # (iv) bistable constant dynamics
    al = cfg.alpha
    lows = np.linspace(0, al, 7)[1:-1]
    highs = np.linspace(al, 1, 7)[1:-1]
    dec = min(g - Q(constant_profile(g, -1, 1, 1.0)).values[0] for g in lows)
    inc = min(Q(constant_profile(g, -1, 1, 1.0)).values[0] - g for g in highs)
    eq_drift = max(abs(Q(constant_profile(e, -1, 1, 1.0), t_const).values[0] - e) for e in (0.0, al, 1.0))
    rep.checks.append(CheckResult("bistable_below_alpha_decreases", dec > 0, dec))
    rep.checks.append(CheckResult("bistable_above_alpha_increases", inc > 0, inc))
    rep.checks.append(CheckResult("equilibria_fixed", eq_drift <= 1e-9, eq_drift,
                                  f"0, alpha, 1 over t={t_const:g}"))
    # constant dynamics over the longer horizon named in acceptance (strict monotone change)
    g_lo, g_hi = al / 2, (al + 1) / 2
    d_lo = g_lo - Q(constant_profile(g_lo, -1, 1, 1.0), t_const).values[0]
    d_hi = Q(constant_profile(g_hi, -1, 1, 1.0), t_const).values[0] - g_hi
    rep.checks.append(CheckResult("constant_dynamics_long", d_lo > 0 and d_hi > 0, min(d_lo, d_hi),
                                  f"gamma={g_lo:g} decreases, gamma={g_hi:g} increases over t={t_const:g}"))

    # (i) continuity: small perturbations stay small
    lip = math.exp((mk.total_mass(cfg.measure) + 1 + cfg.nonlinearity.lipschitz) * tau)
    worst_ratio = 0.0
    for _ in range(max(3, trials // 10)):
        base = _random_profile(rng, x, flat)
        eta = 1e-6
        pert = monotone_project(base + eta * rng.random() * np.linspace(0, 1, x.size))
        d0 = np.max(np.abs(pert - base))
        if d0 == 0:
            continue
        d1 = sup_dist(Q(Profile(a, h, base)), Q(Profile(a, h, pert)))
        worst_ratio = max(worst_ratio, d1 / d0)
    rep.checks.append(CheckResult("continuous", worst_ratio <= lip, worst_ratio,
                                  f"sup-norm amplification bound {lip:.3g}"))
    rep.projection_budget = cfg.stats.total_correction - start
    return rep
