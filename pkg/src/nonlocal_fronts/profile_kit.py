"""Monotone profiles on uniform grids with constant tails.

A :class:`GridFunction` is a sampled function ``u`` on the grid
``grid_min + i * step`` that is piecewise linear between samples and
constant (``left_tail`` / ``right_tail``) outside the grid.  A
:class:`Profile` is a grid function that additionally belongs to the
class of nondecreasing functions with values in ``[0, 1]``.
"""
from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

__all__ = [
    "GridFunction",
    "Profile",
    "AffineMap",
    "ProfileError",
    "evaluate",
    "translate",
    "shift_cells",
    "affine_precompose",
    "leq",
    "sup_dist",
    "level_crossing",
    "sub_front_transform",
    "monotone_project",
    "resample",
    "constant_profile",
    "step_profile",
    "ramp_profile",
    "write_profile",
    "read_profile",
]

# slack for monotonicity / range checks on construction
_VALID_TOL = 1e-12


class ProfileError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class GridFunction:
    grid_min: float
    step: float
    values: np.ndarray
    left_tail: float = None
    right_tail: float = None

    def __post_init__(self):
        values = np.array(self.values, dtype=float)
        if values.ndim != 1 or values.size < 2:
            raise ProfileError("need at least two samples")
        if not self.step > 0:
            raise ProfileError("step must be positive")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "grid_min", float(self.grid_min))
        object.__setattr__(self, "step", float(self.step))
        if self.left_tail is None:
            object.__setattr__(self, "left_tail", float(values[0]))
        if self.right_tail is None:
            object.__setattr__(self, "right_tail", float(values[-1]))
        object.__setattr__(self, "left_tail", float(self.left_tail))
        object.__setattr__(self, "right_tail", float(self.right_tail))

    @property
    def n(self) -> int:
        return self.values.size

    @property
    def grid_max(self) -> float:
        return self.grid_min + (self.n - 1) * self.step

    @property
    def x(self) -> np.ndarray:
        return self.grid_min + self.step * np.arange(self.n)

    def __call__(self, x):
        return evaluate(self, x)

    def replace(self, **changes):
        kw = dict(grid_min=self.grid_min, step=self.step, values=self.values,
                  left_tail=self.left_tail, right_tail=self.right_tail)
        kw.update(changes)
        return type(self)(**kw)

    def with_values(self, values, left_tail=None, right_tail=None):
        values = np.asarray(values, dtype=float)
        return type(self)(self.grid_min, self.step, values,
                          values[0] if left_tail is None else left_tail,
                          values[-1] if right_tail is None else right_tail)

    def same_grid(self, other: GridFunction) -> bool:
        return (self.n == other.n and self.step == other.step
                and self.grid_min == other.grid_min)

    def __repr__(self):
        return (f"{type(self).__name__}(grid=[{self.grid_min:g}, {self.grid_max:g}], "
                f"step={self.step:g}, tails=({self.left_tail:.4g}, {self.right_tail:.4g}))")


class Profile(GridFunction):
    """Nondecreasing grid function with values in [0, 1].

    Evaluation is piecewise linear, hence continuous and in particular
    left-continuous.  Construction raises :class:`ProfileError` on any
    violation larger than ``1e-12``; use :func:`monotone_project` first to
    repair values coming out of a numerical integrator.
    """

    def __post_init__(self):
        super().__post_init__()
        v = self.values
        lo, hi = self.left_tail, self.right_tail
        if lo < -_VALID_TOL or hi > 1 + _VALID_TOL or v.min() < -_VALID_TOL or v.max() > 1 + _VALID_TOL:
            raise ProfileError("profile values must lie in [0, 1]")
        if np.any(np.diff(v) < -_VALID_TOL) or lo > v[0] + _VALID_TOL or v[-1] > hi + _VALID_TOL:
            raise ProfileError("profile must be nondecreasing (tails included)")

    @classmethod
    def from_grid_function(cls, g: GridFunction) -> Profile:
        return cls(g.grid_min, g.step, g.values, g.left_tail, g.right_tail)


@dataclass(frozen=True)
class AffineMap:
    """rho(x) = slope * (x - center), slope > 0."""

    slope: float
    center: float = 0.0

    def __post_init__(self):
        if not self.slope > 0:
            raise ValueError("affine map must be increasing (slope > 0)")

    def __call__(self, x):
        return self.slope * (np.asarray(x, dtype=float) - self.center)

    def inverse(self, y):
        return np.asarray(y, dtype=float) / self.slope + self.center


def evaluate(u: GridFunction, x):
    """Piecewise-linear interpolation with constant tails."""
    x = np.asarray(x, dtype=float)
    s = (x - u.grid_min) / u.step
    r = np.rint(s)
    s = np.where(np.abs(s - r) < 1e-9, r, s)   # nodes evaluate exactly
    i = np.clip(np.floor(s).astype(np.int64), 0, u.n - 2)
    w = s - i
    v = u.values
    out = (1.0 - w) * v[i] + w * v[i + 1]
    out = np.where(s < 0, u.left_tail, out)
    out = np.where(s > u.n - 1, u.right_tail, out)
    return out if out.ndim else float(out)


def resample(u: GridFunction, grid_min: float, step: float, n: int) -> GridFunction:
    """Sample ``u`` on another uniform grid (tails are kept)."""
    x = grid_min + step * np.arange(n)
    return type(u)(grid_min, step, evaluate(u, x), u.left_tail, u.right_tail)


def translate(u: GridFunction, h: float, resample_to_grid: bool = False) -> GridFunction:
    """Return ``x -> u(x - h)``.

    By default the grid itself moves (``grid_min + h``), which is exact.  With
    ``resample_to_grid`` the result is sampled back on ``u``'s grid; this is
    exact when ``h`` is a multiple of the step, up to tail filling.
    """
    moved = u.replace(grid_min=u.grid_min + h)
    if not resample_to_grid:
        return moved
    k = h / u.step
    if abs(k - round(k)) < 1e-9:
        return shift_cells(u, int(round(k)))
    return resample(moved, u.grid_min, u.step, u.n)


def shift_cells(u: GridFunction, k: int) -> GridFunction:
    """Translate right by ``k`` whole cells on the same grid, filling from the tails."""
    v = u.values
    if k == 0:
        return u
    out = np.empty_like(v)
    if k > 0:
        kk = min(k, u.n)
        out[:kk] = u.left_tail
        out[kk:] = v[: u.n - kk]
    else:
        kk = min(-k, u.n)
        out[u.n - kk:] = u.right_tail
        out[: u.n - kk] = v[kk:]
    return u.replace(values=out)


def affine_precompose(u: GridFunction, rho: AffineMap, grid: GridFunction | None = None) -> GridFunction:
    """Return ``x -> u(rho(x))`` sampled on ``grid`` (default: ``u``'s own grid).

    Points whose image falls outside ``u``'s grid take the tail values, so the
    result stays an element of the same class whenever ``u`` is.
    """
    g = u if grid is None else grid
    vals = evaluate(u, rho(g.x))
    return type(u)(g.grid_min, g.step, vals, u.left_tail, u.right_tail)


def _union_points(u1: GridFunction, u2: GridFunction, window=None) -> np.ndarray:
    pts = np.union1d(u1.x, u2.x)
    if window is not None:
        a, b = window
        pts = pts[(pts >= a) & (pts <= b)]
        pts = np.union1d(pts, [a, b])
    return pts


def leq(u1: GridFunction, u2: GridFunction, tol: float = 0.0) -> bool:
    pts = _union_points(u1, u2)
    if np.any(evaluate(u1, pts) > evaluate(u2, pts) + tol):
        return False
    return u1.left_tail <= u2.left_tail + tol and u1.right_tail <= u2.right_tail + tol


def max_violation(u1: GridFunction, u2: GridFunction) -> float:
    """Largest amount by which ``u1`` exceeds ``u2`` (0 when ``u1 <= u2``)."""
    pts = _union_points(u1, u2)
    d = np.max(evaluate(u1, pts) - evaluate(u2, pts))
    d = max(d, u1.left_tail - u2.left_tail, u1.right_tail - u2.right_tail)
    return max(float(d), 0.0)


def sup_dist(u1: GridFunction, u2: GridFunction, window=None) -> float:
    if u1.same_grid(u2) and window is None:
        return float(np.max(np.abs(u1.values - u2.values)))
    pts = _union_points(u1, u2, window)
    return float(np.max(np.abs(evaluate(u1, pts) - evaluate(u2, pts))))


def level_crossing(u: GridFunction, level: float) -> float:
    """Smallest ``x`` with ``u(x) >= level``.

    For a monotone piecewise-linear ``u`` this is found by bisection on the
    samples followed by exact inversion of the linear piece.
    """
    if not u.left_tail < level < u.right_tail:
        raise ProfileError(
            f"level not crossed: level {level:g} outside ({u.left_tail:g}, {u.right_tail:g})")
    v = u.values
    if v[0] >= level:
        return u.grid_min
    if v[-1] < level:
        return u.grid_max
    # first index with v >= level; values are nondecreasing
    j = int(np.searchsorted(v, level, side="left"))
    a, b = v[j - 1], v[j]
    frac = 1.0 if b == a else (level - a) / (b - a)
    return u.grid_min + (j - 1 + frac) * u.step


def monotone_project(values, return_correction: bool = False):
    """Running maximum followed by clamping to [0, 1].

    Returns the projected array, and optionally the largest pointwise change.
    """
    v = np.asarray(values, dtype=float)
    out = np.clip(np.maximum.accumulate(v), 0.0, 1.0)
    if return_correction:
        corr = float(np.max(np.abs(out - v))) if v.size else 0.0
        return out, corr
    return out


def sub_front_transform(u: GridFunction, side: str, alpha: float,
                        direction: str = "forward") -> Profile:
    """Maps between full fronts and sub-fronts.

    ``minus``: forward ``x -> alpha * (1 - u(-x))`` takes values in [0, alpha],
    inverse ``x -> 1 - u(-x) / alpha``.
    ``plus``: forward ``(1 - alpha) * u + alpha``, inverse ``(u - alpha) / (1 - alpha)``.

    The reflection ``x -> -x`` maps the grid onto its mirror image; for a
    continuous representation the right limit ``u(-x+)`` is just ``u(-x)``.
    """
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    if side not in ("minus", "plus") or direction not in ("forward", "inverse"):
        raise ValueError("side must be minus/plus and direction forward/inverse")
    tol = 1e-10
    lo = min(u.values.min(), u.left_tail)
    hi = max(u.values.max(), u.right_tail)
    if side == "minus":
        if direction == "inverse" and (lo < -tol or hi > alpha + tol):
            raise ProfileError("inverse minus transform needs values in [0, alpha]")
        vals = u.values[::-1]
        lt, rt = u.right_tail, u.left_tail
        if direction == "forward":
            vals, lt, rt = alpha * (1 - vals), alpha * (1 - lt), alpha * (1 - rt)
        else:
            vals, lt, rt = 1 - vals / alpha, 1 - lt / alpha, 1 - rt / alpha
        return Profile(-u.grid_max, u.step, np.clip(vals, 0, 1), lt, rt)
    if direction == "inverse" and (lo < alpha - tol or hi > 1 + tol):
        raise ProfileError("inverse plus transform needs values in [alpha, 1]")
    if direction == "forward":
        t = lambda w: (1 - alpha) * w + alpha  # noqa: E731
    else:
        t = lambda w: (w - alpha) / (1 - alpha)  # noqa: E731
    return Profile(u.grid_min, u.step, np.clip(t(u.values), 0, 1),
                   min(max(t(u.left_tail), 0.0), 1.0), min(max(t(u.right_tail), 0.0), 1.0))


# -- constructors -----------------------------------------------------------

def _grid(grid_min, grid_max, step):
    n = int(round((grid_max - grid_min) / step)) + 1
    return grid_min + step * np.arange(n)


def constant_profile(value: float, grid_min: float, grid_max: float, step: float) -> Profile:
    x = _grid(grid_min, grid_max, step)
    return Profile(grid_min, step, np.full(x.size, float(value)))


def step_profile(at: float, grid_min: float, grid_max: float, step: float,
                 low: float = 0.0, high: float = 1.0) -> Profile:
    """Sampled step: ``low`` for ``x <= at`` and ``high`` above it (linear across one cell)."""
    x = _grid(grid_min, grid_max, step)
    return Profile(grid_min, step, np.where(x <= at + 1e-12 * step, low, high), low, high)


def ramp_profile(a: float, b: float, grid_min: float, grid_max: float, step: float,
                 low: float = 0.0, high: float = 1.0) -> Profile:
    """Linear ramp from ``low`` at ``a`` to ``high`` at ``b``."""
    x = _grid(grid_min, grid_max, step)
    t = np.clip((x - a) / (b - a), 0.0, 1.0)
    return Profile(grid_min, step, low + (high - low) * t, low, high)


# -- serialization ----------------------------------------------------------

def write_profile(u: GridFunction, path) -> tuple[Path, Path]:
    """Write ``x,value`` CSV plus a ``.json`` sidecar with tails and step."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "value"])
        for xi, vi in zip(u.x, u.values):
            w.writerow([repr(float(xi)), repr(float(vi))])
    side = path.with_suffix(".json")
    side.write_text(json.dumps({"left_tail": u.left_tail, "right_tail": u.right_tail,
                                "step": u.step, "grid_min": u.grid_min}, indent=2))
    return path, side


def read_profile(path, cls=Profile) -> GridFunction:
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["x", "value"]:
        raise ProfileError(f"{path}: expected header x,value")
    x = np.array([float(r[0]) for r in rows[1:]])
    v = np.array([float(r[1]) for r in rows[1:]])
    meta = json.loads(path.with_suffix(".json").read_text())
    step = float(meta["step"])
    if x.size > 1 and not math.isclose(x[1] - x[0], step, rel_tol=1e-9, abs_tol=1e-12):
        raise ProfileError(f"{path}: grid spacing does not match sidecar step")
    return cls(float(meta.get("grid_min", x[0])), step, v, meta["left_tail"], meta["right_tail"])
