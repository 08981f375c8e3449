"""Invariant suite behind ``qlap verify``.

Each check recomputes one identity or cross-validation from scratch and
reports the measured value next to its tolerance.  ``quick`` keeps the run
well under a minute by skipping the minimizer-heavy checks.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from typing import Callable

import numpy as np

from .functionals import (
    energy,
    first_variation,
    multiplier_from_norms,
    norms,
    pohozaev_from_norms,
    q_from_norms,
)
from .minimize import Status, global_minimize, threshold_estimates
from .params import ProblemParams, decay_iteration, liouville_certificate
from .radial import RadialGrid, grad_norm_pow, lp_norm_pow
from .scaling import fiber_argmin, fiber_psi_values, theta_scale
from .shoot import ShootConfig, find_ground_state, rk4_fixed, shoot


@dataclass
class Check:
    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""

    def to_record(self) -> dict:
        return asdict(self)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"{tag} {self.name}: {self.value:.3e} (tol {self.tolerance:.1e}) {self.detail}".rstrip()


def random_profile(grid: RadialGrid, rng: np.random.Generator):
    """Smooth radial profile: a random mix of two Gaussians with a small ripple."""
    r = np.asarray(grid.r)
    w1, w2 = rng.uniform(0.8, 3.0, 2)
    a = rng.uniform(-0.5, 0.5)
    vals = np.exp(-(r / w1) ** 2) + a * np.exp(-(r / w2) ** 2) * np.cos(rng.uniform(0, 2) * r)
    return grid.fn(vals)


def fd_gradient_error(u, params: ProblemParams, rng: np.random.Generator, h: float = 1e-6) -> float:
    """Relative gap between <dE(u), phi> and a central difference quotient."""
    g = u.grid
    phi = random_profile(g, rng)
    rep = first_variation(u, params)
    analytic = float(np.dot(g.weights, rep.values * phi.values))
    fd = (energy(u + phi * h, params) - energy(u - phi * h, params)) / (2 * h)
    return abs(fd - analytic) / max(abs(analytic), 1e-12)


def check_gradient(count: int = 20, n: int = 1024, seed: int = 0) -> Check:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for k in range(count):
        N = int(rng.integers(1, 4))
        params = ProblemParams(N=N, q=float(rng.uniform(2.5, 4)), p=float(rng.uniform(2.5, 5)),
                               alpha=float(rng.uniform(0.5, 3)))
        g = RadialGrid.uniform(12.0, n, N)
        worst = max(worst, fd_gradient_error(random_profile(g, rng), params, rng))
    return Check("gradient_exactness", worst < 1e-6, worst, 1e-6, f"{count} profiles, n={n}")


def scaling_law_errors(params: ProblemParams, theta: float, n: int = 4096) -> list[float]:
    """Relative errors of the four norm identities for a dilated Gaussian."""
    N, q, p = params.N, params.q, params.p
    g = RadialGrid.uniform(30.0, n, N)
    u = g.sample(lambda r: np.exp(-r * r / 2))
    ut = theta_scale(u, theta)
    pairs = [
        (lp_norm_pow(ut, 2.0), lp_norm_pow(u, 2.0)),
        (grad_norm_pow(ut, 2.0), theta ** 2 * grad_norm_pow(u, 2.0)),
        (grad_norm_pow(ut, q), theta ** (q * (1 + N / 2.0) - N) * grad_norm_pow(u, q)),
        (lp_norm_pow(ut, p), theta ** (N * (p / 2.0 - 1)) * lp_norm_pow(u, p)),
    ]
    return [abs(a - b) / abs(b) for a, b in pairs]


def check_scaling(n: int = 4096) -> Check:
    params = ProblemParams(N=2, q=3, p=4)
    worst = max(max(scaling_law_errors(params, t, n)) for t in (0.5, 1.5, 3.0))
    return Check("scaling_laws", worst < 1e-4, worst, 1e-4, "theta in {0.5, 1.5, 3}")


def fiber_errors(params: ProblemParams, u) -> tuple[float, float]:
    """(argmin error vs a dense scan, closed-form minimum vs direct evaluation)."""
    nm = norms(u, params)
    tb, psi_min = fiber_argmin(nm, params)
    # asymmetric window so theta_bar is not itself a scan node
    thetas = np.geomspace(tb / 17.0, tb * 41.0, 200001)
    scan = thetas[np.argmin(fiber_psi_values(nm, params, thetas))]
    direct = float(fiber_psi_values(nm, params, np.array([tb]))[0])
    return abs(scan - tb) / tb, abs(direct - psi_min) / max(abs(direct), 1e-300)


def intermediate_params(rng: np.random.Generator) -> ProblemParams:
    N = int(rng.integers(1, 4))
    q = float(rng.uniform(2.2, 4.0))
    p2, pq = 2 + 4.0 / N, q * (1 + 2.0 / N)
    while pq <= p2:
        q = float(rng.uniform(2.2, 4.0))
        pq = q * (1 + 2.0 / N)
    p = float(rng.uniform(p2 + 0.05 * (pq - p2), pq - 0.05 * (pq - p2)))
    return ProblemParams(N=N, q=q, p=p, alpha=float(rng.uniform(0.5, 20)))


def check_fiber(count: int = 10, seed: int = 1) -> Check:
    rng = np.random.default_rng(seed)
    worst_arg = worst_val = 0.0
    for _ in range(count):
        params = intermediate_params(rng)
        g = RadialGrid.uniform(20.0, 2049, params.N)
        ea, ev = fiber_errors(params, random_profile(g, rng))
        worst_arg, worst_val = max(worst_arg, ea), max(worst_val, ev)
    ok = worst_arg < 1e-4 and worst_val < 1e-10
    return Check("fiber_closed_form", ok, worst_arg, 1e-4,
                 f"psi(theta_bar) gap {worst_val:.1e} (tol 1e-10)")


def check_pohozaev_identity(seed: int = 2) -> Check:
    """P = -Q whenever lambda is the multiplier of u (a discrete identity)."""
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(5):
        params = intermediate_params(rng)
        u = random_profile(RadialGrid.uniform(15.0, 1025, params.N), rng)
        nm = norms(u, params)
        lam = multiplier_from_norms(nm, params)
        P = pohozaev_from_norms(nm, params, lam)
        worst = max(worst, abs(P + q_from_norms(nm, params)) / nm.K)
    return Check("pohozaev_equals_minus_q", worst < 1e-10, worst, 1e-10)


def check_first_integral() -> Check:
    worst = 0.0
    for N, lam, u0 in [(1, 1.0, 1.2), (1, 1.0, 2.0), (2, 1.0, 1.5), (3, 0.0, 1.0), (5, 1.0, 2.5)]:
        params = ProblemParams(N=N, q=3, p=4.5)
        res = shoot(ShootConfig(lam=lam, u0=u0, r_max=20.0), params)
        worst = max(worst, res.F_drift)
    return Check("first_integral", worst < 1e-8, worst, 1e-8, "N=1 conserved, N>=2 nonincreasing")


def check_rk4_order() -> Check:
    params = ProblemParams(N=3, q=3, p=4.5)
    ref = rk4_fixed(params, 1.0, 2.0, 2.0, 6400)[0]
    e1 = abs(rk4_fixed(params, 1.0, 2.0, 2.0, 100)[0] - ref)
    e2 = abs(rk4_fixed(params, 1.0, 2.0, 2.0, 200)[0] - ref)
    ratio = e1 / e2
    return Check("integrator_order", ratio >= 8, ratio, 8.0, "error ratio under step halving")


def check_decay_iteration() -> Check:
    trace = decay_iteration(5, 3.5)
    ok = trace.values == [1.5, 1.75, 2.375, 3.9375] and trace.steps == 3
    return Check("decay_iteration", ok, float(trace.steps), 3.0, str(trace.values))


def check_liouville() -> Check:
    a = liouville_certificate(3, 4.0, 3.0).certified
    b = liouville_certificate(5, 4.0, 4.0).certified
    return Check("liouville_certificate", a and not b, float(a) - float(b), 1.0,
                 "(3,3,4) certified, (5,4,4) not")


def check_ground_state_amplitude() -> Check:
    """In one dimension F = 0 on the decaying profile, so u(0) is explicit."""
    params = ProblemParams(N=1, q=3, p=4.5, alpha=1.0)
    res = find_ground_state(params, 1.0)
    exact = (params.p * 1.0 / (2.0 * params.alpha)) ** (1.0 / (params.p - 2.0))
    err = abs(res.u0 - exact) / exact
    return Check("ground_state_amplitude", err < 1e-8 and res.decaying, err, 1e-8,
                 f"u0={res.u0!r}, exact={exact!r}")


def check_threshold() -> Check:
    params = ProblemParams(N=1, q=3, p=7.5, alpha=1.0, m=1.0)
    rep, _ = threshold_estimates(params)
    return Check("alpha0_cross_validation", rep.gap < 0.05, rep.gap, 0.05,
                 f"formula {rep.alpha0_formula:.6g}, bisection {rep.alpha0_bisect:.6g}")


def check_minimizer_certificates() -> Check:
    worst = 0.0
    ok = True
    for alpha in (20.0, 50.0):
        res = global_minimize(ProblemParams(N=1, q=3, p=4.5, alpha=alpha, m=1.0))
        d = res.diagnostics
        ok &= res.status is Status.CONVERGED and res.lam > 0
        worst = max(worst, d["q_residual"], d["pohozaev_residual"])
    return Check("minimizer_certificates", ok and worst < 1e-3, worst, 1e-3)


def check_zero_mass() -> Check:
    res = find_ground_state(ProblemParams(N=5, q=4, p=4), 0.0)
    s = res.decay_slope if res.decay_slope is not None else math.nan
    ok = res.decaying and -3.3 <= s <= -2.7 and isinstance(res.l2_mass, float)
    return Check("zero_mass_decay", ok, s, 0.3, f"target -3, l2_mass={res.l2_mass!r}")


QUICK: list[Callable[[], Check]] = [
    check_gradient, check_scaling, check_fiber, check_pohozaev_identity, check_first_integral,
    check_rk4_order, check_decay_iteration, check_liouville, check_ground_state_amplitude,
]
FULL: list[Callable[[], Check]] = QUICK + [check_threshold, check_minimizer_certificates, check_zero_mass]


def run(quick: bool = True) -> list[Check]:
    out = []
    for fn in (QUICK if quick else FULL):
        try:
            out.append(fn())
        except Exception as exc:  # a crashing check is a failed check
            out.append(Check(fn.__name__.removeprefix("check_"), False, math.nan, math.nan,
                             f"{type(exc).__name__}: {exc}"))
    return out
