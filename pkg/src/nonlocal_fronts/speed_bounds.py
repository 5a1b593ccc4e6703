"""Exponential-moment bounds on sub-front speeds.

For a probability measure ``mu`` and ``0 < sigma < f'(alpha)`` the curves

    minus:  lam -> (M(+lam) - 1 + sigma) / lam
    plus:   lam -> (M(-lam) - 1 + sigma) / lam,      M(lam) = int e^{lam y} dmu(y)

have infima that bound the speeds of the ``0 -> alpha`` and ``alpha -> 1``
sub-fronts: ``inf_minus <= -c_minus`` and ``inf_plus <= c_plus``.  Their sum
(the gap) is positive whenever ``mu`` is not concentrated at 0, which
separates the two sub-front speeds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize_scalar

from . import measure_kit as mk

__all__ = [
    "SpeedBoundQuery",
    "SpeedBoundReport",
    "default_lambda_grid",
    "bound_curve",
    "curve_values",
    "infimum",
    "hypothesis7_gap",
    "check_subfront_speed_bound",
]

LAMBDA_CAP = 1e8


def default_lambda_grid(lo: float = 1e-3, hi: float = 1e3, num: int = 241) -> np.ndarray:
    return np.logspace(math.log10(lo), math.log10(hi), num)


@dataclass
class SpeedBoundQuery:
    measure: mk.Measure
    sigma: float
    direction: str = "minus"
    lambda_grid: np.ndarray = field(default_factory=default_lambda_grid)
    refine_tol: float = 1e-10
    nonlinearity: object = None

    def __post_init__(self):
        if self.direction not in ("minus", "plus"):
            raise ValueError("direction must be 'minus' or 'plus'")
        if not self.sigma > 0:
            raise ValueError("sigma must be positive")
        if self.nonlinearity is not None and not self.sigma < self.nonlinearity.derivative_at_alpha:
            raise ValueError(f"sigma={self.sigma:g} must be below f'(alpha)="
                             f"{self.nonlinearity.derivative_at_alpha:g}")
        g = np.asarray(self.lambda_grid, dtype=float)
        if g.ndim != 1 or g.size < 3 or g[0] <= 0 or np.any(np.diff(g) <= 0):
            raise ValueError("lambda_grid must be strictly increasing, positive, length >= 3")
        self.lambda_grid = g

    @property
    def sign(self) -> float:
        return 1.0 if self.direction == "minus" else -1.0


@dataclass
class SpeedBoundReport:
    value: float
    lambda_star: float | None
    attained: bool
    direction: str = "minus"
    gap: float | None = None
    positive: bool | None = None
    parts: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {"value": self.value, "lambda_star": self.lambda_star, "attained": self.attained,
               "direction": self.direction}
        if self.gap is not None:
            out["gap"] = self.gap
            out["positive"] = self.positive
            out["parts"] = {k: v.to_dict() for k, v in self.parts.items()}
        return out


def bound_curve(q: SpeedBoundQuery, lam: float) -> float:
    if not lam > 0:
        raise ValueError("lam must be positive")
    with np.errstate(over="ignore"):
        return (mk.exp_moment(q.measure, q.sign * lam) - 1.0 + q.sigma) / lam


def curve_values(q: SpeedBoundQuery, lams=None) -> np.ndarray:
    lams = q.lambda_grid if lams is None else np.asarray(lams, dtype=float)
    return np.array([bound_curve(q, float(l)) for l in lams])


def infimum(q: SpeedBoundQuery) -> SpeedBoundReport:
    """Grid scan over ``lambda_grid`` followed by golden-section refinement.

    When the grid minimum sits at the upper end the grid is extended by
    decades up to ``LAMBDA_CAP``.  A curve still decreasing there has
    infimum 0 (the curve is bounded below by ``(sigma - 1)/lam``), reported
    with ``attained=False``.
    """
    lams = q.lambda_grid
    vals = curve_values(q, lams)
    j = int(np.argmin(vals))
    while j == lams.size - 1:
        if lams[-1] >= LAMBDA_CAP:
            return SpeedBoundReport(0.0, None, False, q.direction)
        ext = lams[-1] * np.logspace(0.1, 1.0, 10)
        lams = np.concatenate([lams, ext])
        vals = np.concatenate([vals, curve_values(q, ext)])
        j = int(np.argmin(vals))
    if j == 0:
        # the curve blows up as lam -> 0+, so this only happens on a coarse grid
        return SpeedBoundReport(float(vals[0]), float(lams[0]), False, q.direction)
    s = np.log(lams[j - 1: j + 2])
    res = minimize_scalar(lambda t: bound_curve(q, math.exp(t)), bracket=tuple(s),
                          method="golden", tol=q.refine_tol)
    lam_star, value = math.exp(res.x), float(res.fun)
    if value > vals[j]:
        lam_star, value = float(lams[j]), float(vals[j])
    return SpeedBoundReport(value, lam_star, True, q.direction)


def hypothesis7_gap(m: mk.Measure, sigma: float, lambda_grid=None, nonlinearity=None,
                    tol: float = 1e-12) -> SpeedBoundReport:
    """Sum of the minus and plus infima, with a positivity flag."""
    mass = mk.total_mass(m)
    if abs(mass - 1.0) > 1e-10:
        raise ValueError(f"measure must have total mass 1 (got {mass:.12g})")
    kw = {} if lambda_grid is None else {"lambda_grid": lambda_grid}
    lo = infimum(SpeedBoundQuery(m, sigma, "minus", nonlinearity=nonlinearity, **kw))
    hi = infimum(SpeedBoundQuery(m, sigma, "plus", nonlinearity=nonlinearity, **kw))
    gap = lo.value + hi.value
    return SpeedBoundReport(gap, None, lo.attained and hi.attained, "both", gap, bool(gap > tol),
                            {"minus": lo, "plus": hi})


def check_subfront_speed_bound(front, m: mk.Measure, sigma: float, alpha: float | None = None,
                               tol: float = 1e-3, nonlinearity=None) -> bool:
    """Does a sub-front speed respect its exponential-moment bound?

    ``front`` is any object with ``c`` and ``limits``; limits (0, alpha) use
    the minus bound ``inf <= -c``, limits (alpha, 1) the plus bound ``inf <= c``.
    """
    left, right = front.limits
    if (left, right) == (0.0, 1.0):
        raise ValueError("bound applies to sub-fronts only")
    if left == 0.0 and right not in (0.0, 1.0):
        direction, target = "minus", -front.c
    elif right == 1.0 and left not in (0.0, 1.0):
        direction, target = "plus", front.c
    else:
        raise ValueError(f"bound applies to sub-fronts only (limits {front.limits})")
    if alpha is not None and abs((right if direction == "minus" else left) - alpha) > 1e-9:
        raise ValueError("sub-front limit does not match alpha")
    rep = infimum(SpeedBoundQuery(m, sigma, direction, nonlinearity=nonlinearity))
    return bool(rep.value <= target + tol)
