"""Ground states from the radial ODE, checked against the minimizer.

Shooting on u(0) finds the positive decaying profile for a fixed multiplier.
Its mass then defines a constrained minimization problem whose answer should
be the same function.  At zero multiplier the same machinery fits the
algebraic tail, or reports that no decaying profile exists.

Run: python demos/shooting.py
"""

from __future__ import annotations

import numpy as np

from qlap import ProblemParams, liouville_certificate
from qlap.minimize import global_minimize
from qlap.shoot import GroundStateNotFound, find_ground_state, to_radial

params = ProblemParams(N=1, q=3, p=4.5, alpha=1.0)
gs = find_ground_state(params, 1.0)
exact = (params.p / 2.0) ** (1.0 / (params.p - 2.0))
print(f"1D ground state at lambda = 1: u(0) = {gs.u0:.12f} (exact {exact:.12f})")
print(f"  mass {gs.l2_mass:.6f}, energy {gs.extras['energy']:.6f}, "
      f"Pohozaev residual {gs.pohozaev_residual:.1e}")

res = global_minimize(params.replace(m=gs.l2_mass))
mapped = to_radial(gs, grid=res.u.grid)
print(f"minimizer at that mass: energy {res.energy:.6f}, lambda {res.lam:.5f}, "
      f"sup difference {np.max(np.abs(mapped.values - res.u.values)):.1e}")

five = ProblemParams(N=5, q=4, p=4)
zm = find_ground_state(five, 0.0)
print(f"\nN=5, zero multiplier: u(0) = {zm.u0:.8f}, tail slope {zm.decay_slope:.4f} "
      f"(expected -(N-2) = -3), mass {zm.l2_mass}")

three = ProblemParams(N=3, q=3, p=4)
try:
    find_ground_state(three, 0.0)
except GroundStateNotFound as exc:
    cert = liouville_certificate(three.N, three.p, three.q)
    print(f"N=3, zero multiplier: {exc}")
    print(f"  analytic certificate: {cert.kind.value} ({cert.reason})")
