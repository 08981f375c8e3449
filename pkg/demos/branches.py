"""Three kinds of critical points on one mass sphere.

Just below the threshold the global infimum vanishes but a local minimizer
with positive energy survives away from the origin.  A mountain-pass level
sits above it.  Above the threshold the global minimizer has negative energy
and the mountain pass separates it from the small-gradient region.

Run: python demos/branches.py
"""

from __future__ import annotations

import numpy as np

from qlap import ProblemParams
from qlap.minimize import (
    estimate_d1,
    estimate_rho_hat,
    global_minimize,
    local_minimize,
    local_sweep,
    mountain_pass_endpoints,
    mountain_pass_estimate,
)
from qlap.scaling import alpha0_from_d

base = ProblemParams(N=1, q=3, p=7.5, m=1.0)
a0 = alpha0_from_d(estimate_d1(base), base)
print(f"threshold estimate alpha0 = {a0:.4f}")

below = base.replace(alpha=0.99 * a0)
rho = estimate_rho_hat(below)
glob = global_minimize(below)
loc = local_minimize(below, rho)
low, high = mountain_pass_endpoints(loc.u, below, rho)
mp = mountain_pass_estimate(below, low, high, rho=rho)
print(f"\nalpha = 0.99 alpha0 (rho_hat = {rho:.4g})")
print(f"  global : {glob.status.value}, energy {glob.energy:.2e}")
print(f"  local  : energy {loc.energy:.4f}, lambda {loc.lam:.3f}, K {loc.K:.3f}")
print(f"  mountain pass upper bound {mp:.4f}")

above = base.replace(alpha=1.1 * a0)
rho_a = estimate_rho_hat(above)
glob_a = global_minimize(above)
low, high = mountain_pass_endpoints(glob_a.u, above, rho_a)
print("\nalpha = 1.1 alpha0")
print(f"  global : energy {glob_a.energy:.4f}, lambda {glob_a.lam:.3f}")
print(f"  mountain pass upper bound {mountain_pass_estimate(above, low, high, rho=rho_a):.4f}")

# Follow the local branch downward until it disappears.
print("\ncontinuation of the local branch:")
for a, res in local_sweep(base, np.linspace(0.99 * a0, 0.93 * a0, 7)):
    txt = "lost" if res is None else f"energy {res.energy:.4f}, lambda {res.lam:.3f}"
    print(f"  alpha {a:.3f}: {txt}")
