"""Finite, compactly supported Borel measures on the line.

A :class:`Measure` is a finite sum of point masses plus a piecewise-linear
density sampled on a uniform grid (zero outside that grid).  Integrals of
the density use the trapezoid rule on its nodes, which is exact for the
piecewise-linear interpolant.

Convolution of two densities is done on the common lattice of node
weights, so masses multiply exactly; moments of the product are then
accurate to second order in the density step.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .profile_kit import GridFunction, Profile, ProfileError

__all__ = [
    "Density",
    "Measure",
    "Stencil",
    "MeasureError",
    "delta",
    "uniform",
    "triangle",
    "gaussian_truncated",
    "measure_from_spec",
    "total_mass",
    "convolve",
    "stencil",
    "exp_moment",
    "reflect",
    "convolve_measures",
    "add_measures",
    "scale_measure",
    "exp_series",
    "verify_mgf_identity",
]

log = logging.getLogger(__name__)

SERIES_CAP = 64
_MERGE_TOL = 1e-12


class MeasureError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Density:
    grid_min: float
    step: float
    values: np.ndarray

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.ndim != 1 or v.size < 2:
            raise MeasureError("density needs at least two samples")
        if not self.step > 0:
            raise MeasureError("density step must be positive")
        if np.any(v < 0):
            raise MeasureError("density samples must be nonnegative")
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "grid_min", float(self.grid_min))
        object.__setattr__(self, "step", float(self.step))

    @property
    def grid_max(self) -> float:
        return self.grid_min + (self.values.size - 1) * self.step

    @property
    def x(self) -> np.ndarray:
        return self.grid_min + self.step * np.arange(self.values.size)

    def weights(self) -> np.ndarray:
        """Trapezoid weights of the nodes."""
        t = self.step * self.values.copy()
        t[0] *= 0.5
        t[-1] *= 0.5
        return t

    @classmethod
    def from_weights(cls, grid_min: float, step: float, weights) -> Density:
        v = np.asarray(weights, dtype=float) / step
        if v.size == 1:
            v = np.array([v[0], 0.0])
        v = v.copy()
        v[0] *= 2.0
        v[-1] *= 2.0
        return cls(grid_min, step, np.clip(v, 0.0, None))


@dataclass(frozen=True, eq=False)
class Measure:
    """Atoms ``(location, mass)`` plus an optional :class:`Density`."""

    atoms: tuple = ()
    density: Density | None = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self):
        locs = np.array([float(a[0]) for a in self.atoms])
        masses = np.array([float(a[1]) for a in self.atoms])
        if np.any(masses < 0) or not np.all(np.isfinite(masses)):
            raise MeasureError("atom masses must be finite and nonnegative")
        object.__setattr__(self, "atoms", _merge_atoms(locs, masses))

    @property
    def atom_locs(self) -> np.ndarray:
        return np.array([a[0] for a in self.atoms], dtype=float)

    @property
    def atom_masses(self) -> np.ndarray:
        return np.array([a[1] for a in self.atoms], dtype=float)

    @property
    def support_radius(self) -> float:
        r = max((abs(a[0]) for a in self.atoms), default=0.0)
        if self.density is not None:
            r = max(r, abs(self.density.grid_min), abs(self.density.grid_max))
        return r

    def mass_at(self, loc: float) -> float:
        return sum(m for a, m in self.atoms if abs(a - loc) <= _MERGE_TOL)

    def __repr__(self):
        dens = "" if self.density is None else (
            f", density on [{self.density.grid_min:g}, {self.density.grid_max:g}]")
        return f"Measure({len(self.atoms)} atoms{dens}, mass={total_mass(self):.6g})"


def _merge_atoms(locs, masses) -> tuple:
    if locs.size == 0:
        return ()
    order = np.argsort(locs, kind="stable")
    out = []
    for x, m in zip(locs[order], masses[order]):
        if m == 0.0:
            continue
        if out and abs(x - out[-1][0]) <= _MERGE_TOL * max(1.0, abs(x)):
            out[-1][1] += m
        else:
            out.append([x, m])
    return tuple((float(x), float(m)) for x, m in out)


# -- generators -------------------------------------------------------------

def delta(loc: float = 0.0, mass: float = 1.0) -> Measure:
    return Measure(atoms=((loc, mass),))


def _density_measure(x, values, step, mass) -> Measure:
    d = Density(x[0], step, values)
    scale = mass / d.weights().sum()
    return Measure(density=Density(d.grid_min, step, d.values * scale))


def _nodes(a, b, step):
    n = int(round((b - a) / step))
    if n < 1 or not math.isclose(a + n * step, b, rel_tol=0, abs_tol=1e-9 * max(1.0, abs(b))):
        raise MeasureError(f"interval [{a}, {b}] is not a whole number of steps {step}")
    return a + step * np.arange(n + 1)


def uniform(a: float, b: float, step: float, mass: float = 1.0) -> Measure:
    """Uniform distribution on [a, b] (density ``mass / (b - a)``)."""
    x = _nodes(a, b, step)
    return _density_measure(x, np.ones_like(x), step, mass)


def triangle(a: float, b: float, step: float, mass: float = 1.0) -> Measure:
    x = _nodes(a, b, step)
    c = 0.5 * (a + b)
    return _density_measure(x, 1.0 - np.abs(x - c) / (c - a), step, mass)


def gaussian_truncated(scale: float, radius: float, step: float, center: float = 0.0,
                       mass: float = 1.0) -> Measure:
    x = _nodes(center - radius, center + radius, step)
    return _density_measure(x, np.exp(-0.5 * ((x - center) / scale) ** 2), step, mass)


_GENERATORS = {"uniform": uniform, "triangle": triangle, "gaussian_truncated": gaussian_truncated}


def measure_from_spec(spec: dict) -> Measure:
    """Build a measure from a config mapping.

    ``{"atoms": [{"loc": 1.0, "mass": 0.5}, ...],
       "density": {"grid_min": .., "grid_max": .., "step": .., "values": [...]}
                  | {"generator": "uniform", "a": 0, "b": 1, "step": 0.01, "mass": 0.5}}``
    """
    unknown = set(spec) - {"atoms", "density"}
    if unknown:
        raise MeasureError(f"unknown measure keys: {sorted(unknown)}")
    atoms = tuple((float(a["loc"]), float(a["mass"])) for a in spec.get("atoms", ()))
    dens = spec.get("density")
    if dens is None:
        return Measure(atoms=atoms)
    dens = dict(dens)
    if "generator" in dens:
        name = dens.pop("generator")
        if name not in _GENERATORS:
            raise MeasureError(f"unknown density generator {name!r}")
        part = _GENERATORS[name](**dens).density
    else:
        vals = np.asarray(dens["values"], dtype=float)
        step = float(dens["step"])
        n = int(round((float(dens["grid_max"]) - float(dens["grid_min"])) / step)) + 1
        if n != vals.size:
            raise MeasureError(f"density has {vals.size} values but the grid has {n} nodes")
        part = Density(float(dens["grid_min"]), step, vals)
    return Measure(atoms=atoms, density=part)


# -- basic operations -------------------------------------------------------

def total_mass(m: Measure) -> float:
    s = math.fsum(a[1] for a in m.atoms)
    if m.density is not None:
        s += math.fsum(m.density.weights())
    return s


def _segment_kernels(s):
    """``E1 = int_0^1 e^{s t} dt`` and ``E2 = int_0^1 t e^{s t} dt``, stable near 0."""
    s = np.asarray(s, dtype=float)
    small = np.abs(s) < 1e-3
    ss = np.where(small, 1.0, s)
    with np.errstate(over="ignore", invalid="ignore"):
        e1 = np.where(small, 1 + s / 2 + s * s / 6 + s ** 3 / 24, np.expm1(ss) / ss)
        e2 = np.where(small, 0.5 + s / 3 + s * s / 8 + s ** 3 / 30,
                      (np.exp(ss) * (ss - 1.0) + 1.0) / (ss * ss))
    return e1, e2


def exp_moment(m: Measure, lam: float) -> float:
    """``int exp(lam * y) dm(y)``, exact for the piecewise-linear density."""
    with np.errstate(over="ignore", invalid="ignore"):
        s = float(np.sum(m.atom_masses * np.exp(lam * m.atom_locs))) if m.atoms else 0.0
        d = m.density
        if d is not None:
            v0, v1 = d.values[:-1], d.values[1:]
            y0 = d.x[:-1]
            e1, e2 = _segment_kernels(lam * d.step)
            seg = d.step * np.exp(lam * y0) * (v0 * e1 + (v1 - v0) * e2)
            s += float(np.sum(seg))
    return s


def reflect(m: Measure) -> Measure:
    """Mirror image ``A -> m(-A)``."""
    atoms = tuple((-x, w) for x, w in m.atoms)
    d = m.density
    if d is None:
        return Measure(atoms=atoms)
    return Measure(atoms=atoms, density=Density(-d.grid_max, d.step, d.values[::-1]))


def scale_measure(m: Measure, c: float) -> Measure:
    atoms = tuple((x, c * w) for x, w in m.atoms)
    d = m.density
    return Measure(atoms=atoms, density=None if d is None else Density(d.grid_min, d.step, c * d.values))


def _lattice_weights(d: Density, step: float):
    """Project the node weights of ``d`` onto the lattice ``step * Z``.

    Returns ``(k0, w)`` with ``w[j]`` the weight at ``(k0 + j) * step``.
    Nodes between lattice points are split linearly, which keeps mass and
    first moment.
    """
    t = d.weights()
    s = d.x / step
    k = np.floor(s + 1e-9)
    frac = s - k
    frac[np.abs(frac) < 1e-9] = 0.0
    k = k.astype(np.int64)
    k0 = int(k.min())
    w = np.zeros(int(k.max()) - k0 + 2)
    np.add.at(w, k - k0, t * (1 - frac))
    np.add.at(w, k - k0 + 1, t * frac)
    if w[-1] == 0.0 and w.size > 2:
        w = w[:-1]
    return k0, w


def _density_from_lattice(k0: int, step: float, w) -> Density | None:
    w = np.asarray(w, dtype=float)
    nz = np.nonzero(w > 0)[0]
    if nz.size == 0:
        return None
    w = w[nz[0]: nz[-1] + 1]
    k0 += int(nz[0])
    if w.size == 1:
        w = np.array([w[0], 0.0])
    return Density.from_weights(k0 * step, step, w)


def add_measures(*ms: Measure, step: float | None = None) -> Measure:
    atoms = tuple(a for m in ms for a in m.atoms)
    parts = [m.density for m in ms if m.density is not None]
    if not parts:
        return Measure(atoms=atoms)
    step = parts[0].step if step is None else step
    if len(parts) == 1 and _on_lattice(parts[0], step):
        return Measure(atoms=atoms, density=parts[0])
    lat = [_lattice_weights(p, step) for p in parts]
    lo = min(k0 for k0, _ in lat)
    hi = max(k0 + w.size for k0, w in lat)
    acc = np.zeros(hi - lo)
    for k0, w in lat:
        acc[k0 - lo: k0 - lo + w.size] += w
    return Measure(atoms=atoms, density=_density_from_lattice(lo, step, acc))


def _on_lattice(d: Density, step: float) -> bool:
    k = d.grid_min / step
    return d.step == step and abs(k - round(k)) < 1e-9


def _conv(a, b):
    if a.size * b.size < 2_000_000:
        return np.convolve(a, b)
    return np.clip(fftconvolve(a, b), 0.0, None)


def convolve_measures(m1: Measure, m2: Measure, max_radius: float = 1e4) -> Measure:
    """``m1 * m2``: locations add, masses multiply."""
    need = m1.support_radius + m2.support_radius
    if need > max_radius:
        raise MeasureError(f"convolution support radius {need:g} exceeds the maximum "
                           f"{max_radius:g}; raise max_radius to at least {need:g}")
    atoms = tuple((x1 + x2, w1 * w2) for x1, w1 in m1.atoms for x2, w2 in m2.atoms)
    pieces = []
    for (d, other) in ((m1.density, m2), (m2.density, m1)):
        if d is None:
            continue
        for x, w in other.atoms:
            pieces.append(Measure(density=Density(d.grid_min + x, d.step, w * d.values)))
    d1, d2 = m1.density, m2.density
    step = d1.step if d1 is not None else (d2.step if d2 is not None else None)
    if d1 is not None and d2 is not None:
        if d2.step != step:
            # put the finer grid's mass on the coarser lattice
            step = max(d1.step, d2.step)
        k1, w1 = _lattice_weights(d1, step)
        k2, w2 = _lattice_weights(d2, step)
        pieces.append(Measure(density=_density_from_lattice(k1 + k2, step, _conv(w1, w2))))
    if not pieces:
        return Measure(atoms=atoms)
    return add_measures(Measure(atoms=atoms), *pieces, step=step)


def exp_series(mhat: Measure, K: int | None = None, rtol: float = 1e-17,
               max_radius: float = 1e4) -> Measure:
    """Truncated exponential ``sum_{k<=K} mhat^{*k} / k!``.

    This is the measure of the time-one map of ``v_t = mhat * v``.  With
    ``K=None`` the series stops once the mass of a term drops below
    ``rtol`` times the running total (at most 64 terms).
    """
    if K is not None and K < 0:
        raise MeasureError("K must be nonnegative")
    cap = SERIES_CAP if K is None else K
    term = delta(0.0)
    terms = [term]
    running = 1.0
    for k in range(1, cap + 1):
        term = scale_measure(convolve_measures(term, mhat, max_radius), 1.0 / k)
        tm = total_mass(term)
        terms.append(term)
        running += tm
        if K is None and tm <= rtol * running:
            break
    return add_measures(*terms)


def verify_mgf_identity(mhat: Measure, lams, K: int = 40, term_rtol: float = 1e-12) -> float:
    """Max relative error between ``log int e^{lam y} d nu`` and
    ``int e^{lam y} d mhat`` over ``lams``, with ``nu = exp_series(mhat, K)``."""
    lams = [float(x) for x in lams]
    for lam in lams:
        M = exp_moment(mhat, lam)
        # term K of the scalar series e^M, relative to its sum
        last = K * math.log(M) - math.lgamma(K + 1) - M if M > 0 else -math.inf
        if last > math.log(term_rtol):
            raise MeasureError(f"series truncated at K={K} has not converged at lambda={lam:g} "
                               f"(last term ratio {math.exp(last):.3g})")
    nu = exp_series(mhat, K)
    err = 0.0
    for lam in lams:
        M = exp_moment(mhat, lam)
        lhs = math.log(exp_moment(nu, lam))
        err = max(err, abs(lhs - M) / max(abs(M), 1e-300))
    return err


# -- action on grid functions ----------------------------------------------

@dataclass(frozen=True, eq=False)
class Stencil:
    """Weights ``w[j]`` acting as ``(m * u)_i = sum_j w[j] u_{i - (kmin + j)}``."""

    kmin: int
    weights: np.ndarray
    rounding_error: float = 0.0

    @property
    def kmax(self) -> int:
        return self.kmin + self.weights.size - 1

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def apply(self, values: np.ndarray, left: float, right: float) -> np.ndarray:
        lo, hi = min(self.kmin, 0), max(self.kmax, 0)
        w = np.zeros(hi - lo + 1)
        w[self.kmin - lo: self.kmin - lo + self.weights.size] = self.weights
        padded = np.concatenate([np.full(hi, left), values, np.full(-lo, right)])
        return np.convolve(padded, w, mode="valid")


def stencil(m: Measure, step: float) -> Stencil:
    """Discrete convolution weights of ``m`` on the lattice ``step * Z``.

    Atoms are snapped to the nearest lattice point (the largest snap
    distance is kept as ``rounding_error``); density nodes are split
    linearly between neighbouring lattice points.
    """
    key = ("stencil", float(step))
    if key in m._cache:
        return m._cache[key]
    entries = {}
    err = 0.0
    for x, w in m.atoms:
        k = int(round(x / step))
        err = max(err, abs(x - k * step))
        entries[k] = entries.get(k, 0.0) + w
    lo = min(entries, default=0)
    hi = max(entries, default=0)
    if m.density is not None:
        k0, dw = _lattice_weights(m.density, step)
        lo, hi = min(lo, k0), max(hi, k0 + dw.size - 1)
    w = np.zeros(hi - lo + 1)
    for k, v in entries.items():
        w[k - lo] += v
    if m.density is not None:
        w[k0 - lo: k0 - lo + dw.size] += dw
    if err > 1e-12:
        log.warning("atom offsets snapped to grid step %g (max rounding %.3g)", step, err)
    st = Stencil(lo, w, err)
    m._cache[key] = st
    return st


def convolve(m: Measure, u: GridFunction) -> GridFunction:
    """``(m * u)(x) = int u(x - y) dm(y)`` on ``u``'s grid, constant tails beyond it.

    The result is a :class:`Profile` when ``u`` is one and ``m`` has unit mass.
    """
    st = stencil(m, u.step)
    vals = st.apply(u.values, u.left_tail, u.right_tail)
    mass = st.mass
    g = GridFunction(u.grid_min, u.step, vals, mass * u.left_tail, mass * u.right_tail)
    if isinstance(u, Profile) and abs(mass - 1.0) < 1e-12:
        try:
            return Profile.from_grid_function(g)
        except ProfileError:
            pass
    return g
