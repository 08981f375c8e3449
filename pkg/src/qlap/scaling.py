"""Mass-preserving dilations ``u_theta(r) = theta^{N/2} u(theta r)`` and the fiber maps.

Along a dilation orbit every norm scales by an explicit power of theta, so
``psi(theta) = E(u_theta) / theta^2`` is a three-term power sum in the norms
of the unscaled u.  Physical rescaling of grid values (cubic interpolation) is
only needed when a new iterate has to be materialized.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import asdict, dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.optimize import minimize_scalar

from .functionals import Norms, norms, quotient_from_norms
from .params import ParameterError, ProblemParams, gn_exponents, require_intermediate
from .radial import RadialFn, lp_norm_pow


class ScalingWarning(UserWarning):
    pass


class UnderResolvedError(ValueError):
    pass


def _support_radius(u: RadialFn, rel: float = 1e-10) -> float:
    a = np.abs(u.values)
    top = a.max()
    if top == 0:
        return 0.0
    idx = np.flatnonzero(a > rel * top)
    return float(u.grid.r[min(idx[-1] + 1, u.grid.n - 1)])


def theta_scale(u: RadialFn, theta: float, check_mass: bool = True) -> RadialFn:
    """Return ``theta^{N/2} u(theta r)`` on the same grid (zero beyond r_max)."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    g = u.grid
    if theta == 1.0:
        return u
    support = _support_radius(u)
    if support > 0:
        cells = np.count_nonzero(g.r[1:] <= support / theta)
        if cells < 4:
            raise UnderResolvedError(
                f"under-resolved: theta={theta:g} squeezes the support into {cells} cells")
    spline = CubicSpline(g.r, u.values, bc_type=((1, 0.0), "not-a-knot"))
    x = theta * np.asarray(g.r)
    inside = x <= g.r_max
    vals = np.zeros(g.n)
    vals[inside] = spline(x[inside])
    out = u.with_values(theta ** (g.N / 2.0) * vals)
    if check_mass:
        m0 = lp_norm_pow(u, 2.0)
        m1 = lp_norm_pow(out, 2.0)
        if m0 > 0 and abs(m1 - m0) > 1e-4 * m0:
            warnings.warn(
                f"dilation by theta={theta:g} changed the mass by {abs(m1 - m0) / m0:.2e} (relative)",
                ScalingWarning, stacklevel=2)
    return out


def resample(u: RadialFn, grid) -> RadialFn:
    """Cubic interpolation of u onto another grid, zero beyond the old r_max."""
    g = u.grid
    spline = CubicSpline(g.r, u.values, bc_type=((1, 0.0), "not-a-knot"))
    x = np.asarray(grid.r)
    inside = x <= g.r_max
    vals = np.zeros(grid.n)
    vals[inside] = spline(x[inside])
    return grid.fn(vals)


def sigma_star(u: RadialFn, sigma: float, check_mass: bool = True) -> RadialFn:
    """``(sigma * u)(r) = e^{sigma N/2} u(e^sigma r)``."""
    return theta_scale(u, math.exp(sigma), check_mass=check_mass)


def dilation_energy(nm: Norms, params: ProblemParams, sigma: float) -> float:
    """``E(sigma * u)`` from the norms of u (the auxiliary functional J(sigma, u))."""
    N, q, p = params.N, params.q, params.p
    return (0.5 * math.exp(2.0 * sigma) * nm.grad2
            + math.exp(sigma * (q * (N / 2.0 + 1.0) - N)) * nm.gradq / q
            - params.alpha / p * math.exp(sigma * N * (p / 2.0 - 1.0)) * nm.lp)


@dataclass(frozen=True)
class FiberPoint:
    theta: float
    value: float
    energy_at_theta: float


def _as_norms(u, params: ProblemParams) -> Norms:
    return u if isinstance(u, Norms) else norms(u, params)


def fiber_psi(u, params: ProblemParams, theta: float) -> FiberPoint:
    """``psi(theta) = E(u_theta)/theta^2``; ``u`` may be a RadialFn or precomputed Norms."""
    if not theta > 0:
        raise ValueError("theta must be positive")
    nm = _as_norms(u, params)
    tab = gn_exponents(params)
    a, b = tab.a_grad_q, tab.b_lp
    value = (0.5 * nm.grad2 + theta ** (a - 2.0) / params.q * nm.gradq
             - params.alpha / params.p * theta ** (b - 2.0) * nm.lp)
    return FiberPoint(theta=theta, value=value, energy_at_theta=theta * theta * value)


def fiber_psi_values(nm: Norms, params: ProblemParams, thetas: np.ndarray) -> np.ndarray:
    tab = gn_exponents(params)
    a, b = tab.a_grad_q, tab.b_lp
    t = np.asarray(thetas, dtype=float)
    return (0.5 * nm.grad2 + t ** (a - 2.0) / params.q * nm.gradq
            - params.alpha / params.p * t ** (b - 2.0) * nm.lp)


def fiber_argmin(u, params: ProblemParams) -> tuple[float, float]:
    """Closed-form minimizer of psi and its minimum value.

    Needs 2 < p delta_p < q(1 + delta_q) (the intermediate regime) and alpha > 0.
    """
    if params.alpha <= 0:
        raise ParameterError("no interior minimum: psi is increasing when alpha = 0")
    tab = require_intermediate(params)
    nm = _as_norms(u, params)
    if not (nm.lp > 0 and nm.gradq > 0):
        raise ParameterError("fiber_argmin needs ||u||_p > 0 and ||grad u||_q > 0")
    q, p, alpha = params.q, params.p, params.alpha
    a, b = tab.a_grad_q, tab.b_lp
    gap = a - b
    base = q * alpha * (b - 2.0) * nm.lp / (p * (a - 2.0) * nm.gradq)
    theta_bar = base ** (1.0 / gap)
    c = q * (b - 2.0) / (p * (a - 2.0))
    psi_min = (0.5 * nm.grad2
               - alpha ** ((a - 2.0) / gap) * c ** ((b - 2.0) / gap) * (gap / (p * (a - 2.0)))
               * nm.lp ** ((a - 2.0) / gap) * nm.gradq ** ((2.0 - b) / gap))
    return theta_bar, psi_min


def fiber_energy_argmin(u, params: ProblemParams, lo: float = 1e-6, hi: float = 1e6,
                        samples: int = 2001) -> tuple[float, float]:
    """Minimizer of ``theta -> E(u_theta)`` over [lo, hi] (any regime).

    Scans log-spaced theta and polishes the best bracket with a bounded search.
    """
    nm = _as_norms(u, params)
    thetas = np.geomspace(lo, hi, samples)
    e = thetas ** 2 * fiber_psi_values(nm, params, thetas)
    k = int(np.argmin(e))
    a = math.log(thetas[max(k - 1, 0)])
    b = math.log(thetas[min(k + 1, samples - 1)])

    def f(s):
        return math.exp(2 * s) * float(fiber_psi_values(nm, params, np.array([math.exp(s)]))[0])

    res = minimize_scalar(f, bounds=(a, b), method="bounded", options={"xatol": 1e-12})
    theta = math.exp(res.x)
    return theta, float(res.fun)


def _threshold_constants(params: ProblemParams):
    tab = require_intermediate(params)
    q, p = params.q, params.p
    a, b = tab.a_grad_q, tab.b_lp
    gap = a - b
    c = q * (b - 2.0) / (p * (a - 2.0))
    prefactor = c ** (-(b - 2.0) / gap) * p * (a - 2.0) / gap * 0.5
    return prefactor, gap / (a - 2.0)


def alpha0_from_d(d_m: float, params: ProblemParams) -> float:
    """Threshold strength alpha_0(m) in terms of ``d(m) = inf J`` over S_m."""
    if not d_m > 0:
        raise ParameterError(f"d(m) must be positive, got {d_m}")
    prefactor, power = _threshold_constants(params)
    return (prefactor * d_m) ** power


def d_mass_exponent(params: ProblemParams) -> float:
    """k with ``d(m) = m^k d(1)``."""
    tab = require_intermediate(params)
    return -params.p * (params.q - 2.0) / (2.0 * (tab.a_grad_q - tab.b_lp))


def alpha0_mass_exponent(params: ProblemParams) -> float:
    """k with ``alpha_0(m) = m^k alpha_0(1)``."""
    tab = require_intermediate(params)
    return -params.p * (params.q - 2.0) / (2.0 * (tab.a_grad_q - 2.0))


def d_at_mass(d1: float, params: ProblemParams, m: float | None = None) -> float:
    m = params.m if m is None else m
    return m ** d_mass_exponent(params) * d1


def alpha0_for_profile(u, params: ProblemParams) -> float:
    """Smallest alpha at which the fiber of this particular u dips below zero energy."""
    nm = _as_norms(u, params)
    return alpha0_from_d(quotient_from_norms(nm, params), params)


@dataclass
class ThresholdReport:
    d1: float
    dm: float
    alpha0_formula: float
    alpha0_bisect: float | None
    mass: float

    @property
    def gap(self) -> float | None:
        if self.alpha0_bisect is None:
            return None
        return abs(self.alpha0_bisect - self.alpha0_formula) / self.alpha0_formula

    def to_record(self, params: ProblemParams | None = None) -> dict:
        rec = asdict(self)
        rec["relative_gap"] = self.gap
        if params is not None:
            rec["params"] = params.as_dict()
        return rec

    def to_json(self, params: ProblemParams | None = None) -> str:
        return json.dumps(self.to_record(params), sort_keys=True)


def threshold_report(d1: float, params: ProblemParams, alpha0_bisect: float | None = None
                     ) -> ThresholdReport:
    dm = d_at_mass(d1, params)
    return ThresholdReport(d1=d1, dm=dm, alpha0_formula=alpha0_from_d(dm, params),
                           alpha0_bisect=alpha0_bisect, mass=params.m)
