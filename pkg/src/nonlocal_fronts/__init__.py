"""Traveling fronts of ``u_t = mu * u - u + f(u)`` for bistable ``f``.

Modules:

* :mod:`measure_kit` - finite measures (atoms plus a density), convolution,
  exponential moments and the measure exponential.
* :mod:`profile_kit` - monotone grid profiles with flat tails.
* :mod:`semiflow` - the time-``t`` map ``Q^t`` and a hypothesis checker.
* :mod:`front_finder` - sub/super-solutions, the rescaled fixed-point
  recursion and front extraction.
* :mod:`speed_bounds` - exponential-moment bounds on sub-front speeds.
"""
from . import front_finder, measure_kit, profile_kit, semiflow, speed_bounds
from .front_finder import FrontResult, measure_speed, solve_front
from .measure_kit import Measure, delta, uniform
from .profile_kit import Profile
from .semiflow import Nonlinearity, SemiflowConfig, evolve

__version__ = "0.1.0"

__all__ = [
    "front_finder", "measure_kit", "profile_kit", "semiflow", "speed_bounds",
    "FrontResult", "Measure", "Nonlinearity", "Profile", "SemiflowConfig",
    "delta", "evolve", "measure_speed", "solve_front", "uniform",
]
