"""
Exponential-moment bounds on sub-front speeds
=============================================

For a probability measure mu and 0 < sigma < f'(alpha) the curves
(M(+-lam) - 1 + sigma) / lam bound the speeds of the 0 -> alpha and
alpha -> 1 sub-fronts.  Their infima add up to a positive gap unless mu
sits entirely at 0.
"""
import math

from scipy.optimize import brentq

from nonlocal_fronts.measure_kit import add_measures, delta, triangle, uniform
from nonlocal_fronts.speed_bounds import SpeedBoundQuery, hypothesis7_gap, infimum

# single atom at 1: the minimiser solves e^lam (lam - 1) = -(1 - sigma)
rep = infimum(SpeedBoundQuery(delta(1.0), 0.1, "minus"))
lam = brentq(lambda t: math.exp(t) * (t - 1) + 0.9, 1e-6, 1.0)
print("delta_1: lambda* =", rep.lambda_star, " (root:", lam, ")  value =", rep.value)

kernels = {
    "delta_1": delta(1.0),
    "two_point": add_measures(delta(-1.0, 0.5), delta(1.0, 0.5)),
    "uniform[-1/2,1/2]": uniform(-0.5, 0.5, 0.05),
    "triangle[-1,1]": triangle(-1.0, 1.0, 0.05),
    "delta_0": delta(0.0),
}
for name, m in kernels.items():
    for sigma in (0.05, 0.1):
        g = hypothesis7_gap(m, sigma)
        print("%-18s sigma=%.2f  minus=%.4f  plus=%.4f  gap=%.4f  positive=%s" % (
            name, sigma, g.parts["minus"].value, g.parts["plus"].value, g.gap, g.positive))

# delta_0 is the boundary case: sigma/lam has infimum 0 and it is never attained
print(infimum(SpeedBoundQuery(delta(0.0), 0.1)).to_dict())
