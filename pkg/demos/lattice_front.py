"""
Traveling front of the lattice equation
=======================================

u_t = u(t, x - 1) - u(t, x) + f(u) with the cubic f(u) = -u(u - 0.3)(u - 1).
The kernel is a single atom at 1, so the convolution is a plain shift.
"""
import numpy as np

from nonlocal_fronts import Nonlinearity, SemiflowConfig, delta, measure_speed, solve_front
from nonlocal_fronts.profile_kit import level_crossing, ramp_profile

flow = SemiflowConfig(delta(1.0), Nonlinearity.cubic(0.3), dt=0.1)

# sub/super-solutions, the perturbed recursion for n = 10, 20, 40, then extraction
sol = solve_front(flow, n_list=(10, 20, 40), step=0.05)
print("ramp speed bracket      ", sol.pair.c_lower, sol.pair.c_upper)
print("tightened bracket       ", sol.tight_pair.c_lower, sol.tight_pair.c_upper)
for row in sol.trace.rows():
    print("n=%3d  y_n/n=%+.5f  z_n/n=%+.5f" % (row["n"], row["y_n/n"], row["z_n/n"]))
print("c (recursion)           ", round(sol.c, 5), "branch:", sol.front.branch)
print("traveling residual      ", sol.front.residual, sol.front.residual_2tau)

# an independent number: push a steep ramp forward and follow the alpha crossing
u0 = ramp_profile(-0.5, 0.5, -40.0, 40.0, 0.05)
print("c (direct simulation)   ", round(measure_speed(u0, 60.0, flow), 5))

# c < 0 here: the shift to the right beats the preference for the state 1
phi = sol.front.phi
print("width between 0.1 and 0.9:", level_crossing(phi, 0.9) - level_crossing(phi, 0.1))
print("phi on a coarse grid:", np.round(phi(np.arange(-6.0, 7.0, 2.0)), 3))

# optional picture
try:
    from nonlocal_fronts.plots import plot_profiles
    plot_profiles([(sol.minus.phi, "minus"), (sol.plus.phi, "plus")], "lattice_front.svg")
except ImportError:
    pass
