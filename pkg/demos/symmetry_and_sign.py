"""
Symmetry fixes the sign of the speed
====================================

With a symmetric kernel the map u -> 1 - u, x -> -x sends the problem with
alpha to the one with 1 - alpha and flips the speed.  At alpha = 1/2 the
front must stand still.
"""
from nonlocal_fronts import Nonlinearity, SemiflowConfig, delta, solve_front
from nonlocal_fronts.measure_kit import add_measures

mu = add_measures(delta(-1.0, 0.5), delta(1.0, 0.5))

speeds = {}
for alpha in (0.3, 0.5, 0.7):
    flow = SemiflowConfig(mu, Nonlinearity.cubic(alpha), dt=0.1)
    sol = solve_front(flow)
    speeds[alpha] = sol.c
    print("alpha=%.1f  c=%+.5f  bracket=[%+.3f, %+.3f]" % (
        alpha, sol.c, sol.tight_pair.c_lower, sol.tight_pair.c_upper))

# 1 invades 0 when alpha < 1/2 (c > 0 with u = phi(x + c t)), and the reverse
print("c(0.3) + c(0.7) =", speeds[0.3] + speeds[0.7])
