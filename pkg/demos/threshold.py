"""Where does the global minimum energy turn negative?

In the intermediate regime the energy is bounded below on the mass sphere but
its infimum is 0 for weak coupling.  Two independent estimates of the
threshold strength are compared here: one from the scale-free quotient J,
one from bisecting the sign of the minimum energy itself.

Run: python demos/threshold.py
"""

from __future__ import annotations

from qlap import ProblemParams, classify_regime, gn_exponents
from qlap.minimize import alpha0_bisect, estimate_d1, global_minimize
from qlap.scaling import alpha0_from_d, alpha0_mass_exponent, d_at_mass

params = ProblemParams(N=1, q=3, p=7.5, m=1.0)
tab = gn_exponents(params)
print(f"regime: {classify_regime(params).kind.value}  (p2={tab.p2:g} < p={params.p:g} < pq={tab.pq:g})")

# J does not depend on alpha, so one minimization serves every coupling.
d1 = estimate_d1(params)
a_formula = alpha0_from_d(d1, params)
print(f"d(1) = {d1:.6f}  ->  alpha0 from the closed form: {a_formula:.5f}")

a_bis = alpha0_bisect(params, alpha_start=a_formula)
print(f"alpha0 by bisection on the sign of e_alpha(1): {a_bis:.5f}"
      f"  (relative gap {abs(a_bis - a_formula) / a_formula:.1e})")

for f in (0.9, 0.99, 1.01, 1.1):
    res = global_minimize(params.replace(alpha=f * a_formula))
    print(f"  alpha = {f:4.2f} * alpha0: status {res.status.value:16s} energy {res.energy: .4e}")

# The threshold moves with the mass by a fixed power.
k = alpha0_mass_exponent(params)
for m in (0.5, 2.0, 4.0):
    print(f"m = {m}: predicted alpha0 = {a_formula * m ** k:.4f}"
          f"  (d(m) = {d_at_mass(d1, params, m):.4e})")
