"""Radial shooting for ``-(r^{N-1} phi(u'))'/r^{N-1} + lambda u = alpha |u|^{p-2} u``.

Here ``phi(v) = (1 + |v|^{q-2}) v``.  Solved for u'' the equation reads

    u'' = [-((N-1)/r)(1+|v|^{q-2}) v + lambda u - alpha |u|^{p-2} u] / (1 + (q-1)|v|^{q-2})

with ``v = u'``.  Trajectories start at a small radius from the regular series
``u = u0 + c r^2/2`` and are integrated with classical RK4 under step-doubling
error control.  Alongside (u, v) the integrator carries the source integral
``int s^{N-1}(lambda u - alpha |u|^{p-2} u) ds`` (which must equal the flux
increment of ``r^{N-1} phi(u')``) and the mass integral, so both checks come
from the same accepted steps.

Classification of a trajectory:

* ``Crossing(r*)``: u reaches zero at r*.
* ``Diverging(r*)``: u leaves the decay corridor without crossing.  Either u'
  turns positive, |u| exceeds the blow-up cap, or the horizon is reached with
  u still above ``1e-8 u0``.
* ``Decaying``: no crossing and ``|u(r_max)| < 1e-8 u0``.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicHermiteSpline
from scipy.optimize import brentq

from .functionals import report
from .params import ParameterError, ProblemParams, liouville_certificate, zero_mass_eligible
from .radial import RadialFn, RadialGrid, sphere_area


class ShootError(RuntimeError):
    """Integration failure; ``state`` holds the last accepted ``(r, u, v)``."""

    def __init__(self, message: str, state: tuple[float, float, float] | None = None):
        super().__init__(message)
        self.state = state


class GroundStateNotFound(ShootError):
    pass


class TailError(ValueError):
    pass


DECAY_FRACTION = 1e-8


@dataclass(frozen=True)
class ShootConfig:
    lam: float = 1.0
    u0: float = 1.0
    r_max: float | None = None
    h0: float | None = None
    tol_step: float = 1e-12
    blowup_threshold: float = 1e6

    def __post_init__(self):
        if not self.lam >= 0 or not math.isfinite(self.lam):
            raise ParameterError(f"lambda must be finite and >= 0, got {self.lam}")
        if not self.u0 > 0 or not math.isfinite(self.u0):
            raise ParameterError(f"u0 must be positive, got {self.u0}")
        if self.r_max is not None and not self.r_max > 0:
            raise ParameterError("r_max must be positive")
        if self.h0 is not None and not self.h0 > 0:
            raise ParameterError("h0 must be positive")
        if not 0 < self.tol_step < 1:
            raise ParameterError("tol_step must lie in (0, 1)")
        if not self.blowup_threshold > 1:
            raise ParameterError("blowup_threshold must exceed 1")

    def horizon(self, params: ProblemParams) -> float:
        """Integration horizon.

        Defaults to 60 decay lengths ``1/sqrt(lambda)`` for lambda > 0.  For
        lambda = 0 there is no intrinsic length, so the horizon is 1e4 times
        the larger of the two core radii of this trajectory, the one where the
        Laplacian balances the source and the one where the q-Laplacian does.
        """
        if self.r_max is not None:
            return float(self.r_max)
        if self.lam > 0:
            return 60.0 / math.sqrt(self.lam)
        N, q, p, a, u0 = params.N, params.q, params.p, params.alpha, self.u0
        core2 = math.sqrt(N / (a * u0 ** (p - 2.0)))
        coreq = (N * u0 ** (q - 1.0) / (a * u0 ** (p - 1.0))) ** (1.0 / q)
        return 1e4 * max(core2, coreq)

    def as_dict(self) -> dict:
        return {"lambda": self.lam, "u0": self.u0, "r_max": self.r_max, "h0": self.h0,
                "tol_step": self.tol_step, "blowup_threshold": self.blowup_threshold}


class Kind(str, enum.Enum):
    CROSSING = "Crossing"
    DIVERGING = "Diverging"
    DECAYING = "Decaying"


@dataclass(frozen=True)
class Classification:
    kind: Kind
    r_star: float | None = None
    # why a trajectory was called Diverging: "turned", "blowup" or "horizon"
    reason: str = ""

    def __str__(self) -> str:
        if self.kind is Kind.DECAYING:
            return "Decaying"
        return f"{self.kind.value}({self.r_star!r})"


def ode_rhs(r: float, u: float, v: float, params: ProblemParams, lam: float) -> float:
    """u'' at radius r > 0."""
    if not r > 0:
        raise ValueError("ode_rhs needs r > 0; the origin is handled by the series start")
    return _accel(r, u, v, params.N, params.q, params.p, params.alpha, lam)[0]


def _accel(r, u, v, N, q, p, alpha, lam):
    av = abs(v)
    vq = av ** (q - 2.0) if av > 0.0 else 0.0
    src = lam * u - alpha * abs(u) ** (p - 2.0) * u
    fric = (N - 1.0) / r * (1.0 + vq) * v if N > 1 else 0.0
    return (src - fric) / (1.0 + (q - 1.0) * vq), src


def first_integral(u, v, params: ProblemParams, lam: float):
    """``F = v^2/2 + (q-1)/q |v|^q + alpha/p |u|^p - lambda/2 u^2``."""
    q, p = params.q, params.p
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return (0.5 * v * v + (q - 1.0) / q * np.abs(v) ** q
            + params.alpha / p * np.abs(u) ** p - 0.5 * lam * u * u)


def flux(r, v, params: ProblemParams):
    """``r^{N-1} (1 + |v|^{q-2}) v``."""
    r = np.asarray(r, dtype=float)
    v = np.asarray(v, dtype=float)
    return r ** (params.N - 1) * (1.0 + np.abs(v) ** (params.q - 2.0)) * v


class _System:
    """Right-hand side for the state (u, v, source integral, mass integral)."""

    def __init__(self, params: ProblemParams, lam: float):
        self.c = (params.N, params.q, params.p, params.alpha, lam)
        self.N = params.N

    def __call__(self, r, y):
        u, v = y[0], y[1]
        acc, src = _accel(r, u, v, *self.c)
        rn = r ** (self.N - 1)
        return (v, acc, rn * src, rn * u * u)


def _rk4(f, r, y, h):
    k1 = f(r, y)
    y2 = tuple(a + 0.5 * h * b for a, b in zip(y, k1))
    k2 = f(r + 0.5 * h, y2)
    y3 = tuple(a + 0.5 * h * b for a, b in zip(y, k2))
    k3 = f(r + 0.5 * h, y3)
    y4 = tuple(a + h * b for a, b in zip(y, k3))
    k4 = f(r + h, y4)
    return tuple(a + h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4)
                 for a, b1, b2, b3, b4 in zip(y, k1, k2, k3, k4))


def rk4_fixed(params: ProblemParams, lam: float, u0: float, r_end: float, steps: int,
              r_start: float | None = None) -> tuple[float, float]:
    """Plain fixed-step RK4 from the series start to r_end; returns (u, u')."""
    r0 = r_start if r_start is not None else start_radius(params, lam, u0, r_end)
    y = _series_start(params, lam, u0, r0)
    f = _System(params, lam)
    h = (r_end - r0) / steps
    r = r0
    for i in range(steps):
        y = _rk4(f, r, y, h)
        r = r0 + (i + 1) * h
    return y[0], y[1]


def start_radius(params: ProblemParams, lam: float, u0: float, r_max: float) -> float:
    """``1e-6 r_max``, reduced when the series itself varies on a shorter scale."""
    c = abs(lam * u0 - params.alpha * u0 ** (params.p - 1.0)) / params.N
    eps = 1e-6 * r_max
    if c > 0:
        eps = min(eps, 1e-4 * math.sqrt(u0 / c))
    return eps


def _series_start(params: ProblemParams, lam: float, u0: float, eps: float):
    c = (lam * u0 - params.alpha * u0 ** (params.p - 1.0)) / params.N
    u = u0 + 0.5 * c * eps * eps
    v = c * eps
    # integrals over [0, eps] from the same expansion (leading order)
    src = lam * u0 - params.alpha * u0 ** (params.p - 1.0)
    n = params.N
    return (u, v, src * eps ** n / n, u0 * u0 * eps ** n / n)


@dataclass
class ShootResult:
    params: ProblemParams
    lam: float
    u0: float
    r: np.ndarray
    u: np.ndarray
    v: np.ndarray
    F: np.ndarray
    classification: Classification
    F_drift: float
    F_scale: float
    flux_residual: float
    steps: int
    mass_profile: np.ndarray
    pohozaev_residual: float | None = None
    decay_slope: float | None = None
    l2_mass: float | str | None = None
    # radius up to which the profile is integrated data; beyond it, if present, an analytic tail
    r_resolved: float | None = None
    extras: dict = field(default_factory=dict)

    @property
    def r_end(self) -> float:
        return float(self.r[-1])

    @property
    def decaying(self) -> bool:
        return self.classification.kind is Kind.DECAYING

    def spline(self) -> CubicHermiteSpline:
        r, keep = np.unique(self.r, return_index=True)
        return CubicHermiteSpline(r, self.u[keep], self.v[keep])

    def to_record(self) -> dict:
        c = self.classification
        return {
            "params": self.params.as_dict(),
            "lambda": self.lam,
            "u0": self.u0,
            "classification": c.kind.value,
            "r_star": c.r_star,
            "reason": c.reason,
            "F_drift": self.F_drift,
            "F_scale": self.F_scale,
            "flux_residual": self.flux_residual,
            "steps": self.steps,
            "pohozaev_residual": self.pohozaev_residual,
            "decay_slope": self.decay_slope,
            "l2_mass": self.l2_mass,
            "r_resolved": self.r_resolved,
            "r_end": self.r_end,
            "extras": self.extras,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True, indent=2)

    def trajectory_csv(self, path=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["r", "u", "du", "F"])
        for row in zip(self.r, self.u, self.v, self.F):
            w.writerow([repr(float(x)) for x in row])
        text = buf.getvalue()
        if path is not None:
            with open(path, "w", encoding="utf-8") as fh:
                fh.write(text)
        return text


def _hermite_root(r0, u0, v0, r1, u1, v1):
    s = CubicHermiteSpline([r0, r1], [u0, u1], [v0, v1])
    if u1 == 0.0:
        return r1, v1
    if s(r0) * s(r1) > 0:
        rs = r0 + (r1 - r0) * u0 / (u0 - u1)
        return rs, v1
    rs = brentq(s, r0, r1, xtol=1e-15 * r1)
    return rs, float(s.derivative()(rs))


def shoot(cfg: ShootConfig, params: ProblemParams) -> ShootResult:
    """Integrate one trajectory from u(0) = cfg.u0, u'(0) = 0."""
    lam, u0 = cfg.lam, cfg.u0
    r_max = cfg.horizon(params)
    eps = start_radius(params, lam, u0, r_max)
    f = _System(params, lam)
    y = _series_start(params, lam, u0, eps)
    r = eps
    h = cfg.h0 if cfg.h0 is not None else eps
    tol = cfg.tol_step
    atol = 1e-14 * u0
    cap = cfg.blowup_threshold * u0

    rs, us, vs, Is, Ms = [r], [y[0]], [y[1]], [y[2]], [y[3]]
    cls = None
    steps = 0
    while r < r_max:
        h = min(h, r_max - r)
        if h < 1e-13 * r:
            raise ShootError(f"stiff region: step underflow at r={r!r}", (r, y[0], y[1]))
        full = _rk4(f, r, y, h)
        half = _rk4(f, r + 0.5 * h, _rk4(f, r, y, 0.5 * h), 0.5 * h)
        err = max(abs(half[0] - full[0]) / (abs(half[0]) + atol),
                  abs(half[1] - full[1]) / (abs(half[1]) + atol)) / 15.0
        if not math.isfinite(err):
            h *= 0.25
            continue
        if err > tol:
            h *= max(0.2, 0.9 * (tol / err) ** 0.2)
            continue
        y_new = tuple(b + (b - a) / 15.0 for a, b in zip(full, half))
        r_new = r + h
        steps += 1
        h *= min(4.0, 0.9 * (tol / max(err, 1e-300)) ** 0.2)
        if y_new[0] <= 0.0:
            r_star, v_star = _hermite_root(r, y[0], y[1], r_new, y_new[0], y_new[1])
            frac = (r_star - r) / (r_new - r)
            rs.append(r_star)
            us.append(0.0)
            vs.append(v_star)
            Is.append(y[2] + frac * (y_new[2] - y[2]))
            Ms.append(y[3] + frac * (y_new[3] - y[3]))
            cls = Classification(Kind.CROSSING, r_star)
            break
        r, y = r_new, y_new
        rs.append(r)
        us.append(y[0])
        vs.append(y[1])
        Is.append(y[2])
        Ms.append(y[3])
        if y[1] > 0.0:
            cls = Classification(Kind.DIVERGING, r, "turned")
            break
        if abs(y[0]) > cap:
            cls = Classification(Kind.DIVERGING, r, "blowup")
            break
    if cls is None:
        if abs(us[-1]) < DECAY_FRACTION * u0:
            cls = Classification(Kind.DECAYING)
        else:
            cls = Classification(Kind.DIVERGING, rs[-1], "horizon")

    r_arr = np.array(rs)
    u_arr = np.array(us)
    v_arr = np.array(vs)
    F = first_integral(u_arr, v_arr, params, lam)
    F_scale = params.alpha / params.p * u0 ** params.p + 0.5 * lam * u0 * u0
    F_drift = _drift(F, params.N) / F_scale
    flux_arr = flux(r_arr, v_arr, params)
    src = np.array(Is)
    denom = np.max(np.abs(flux_arr)) + np.max(np.abs(src)) + 1e-300
    flux_res = float(np.max(np.abs((flux_arr - flux_arr[0]) - (src - src[0]))) / denom)
    res = ShootResult(
        params=params, lam=lam, u0=u0, r=r_arr, u=u_arr, v=v_arr, F=F,
        classification=cls, F_drift=float(F_drift), F_scale=float(F_scale),
        flux_residual=flux_res, steps=steps,
        mass_profile=sphere_area(params.N) * np.array(Ms), r_resolved=float(r_arr[-1]),
    )
    return res


def _drift(F: np.ndarray, N: int) -> float:
    """Largest rebound of F (N >= 2) or largest departure from F(eps) (N = 1)."""
    if N == 1:
        return float(np.max(np.abs(F - F[0])))
    running_min = np.minimum.accumulate(F)
    return float(max(np.max(F - running_min), 0.0))


# ---------------------------------------------------------------------------
# tails


class DecayFit:
    """Least-squares tail fit ``log|u| ~ slope log r + intercept``.

    Unpacks as ``(slope, intercept, r_window)``.  ``super_polynomial`` is set
    when the local slope keeps steepening across the window (an exponential
    tail); slope and intercept are then NaN.
    """

    def __init__(self, slope: float, intercept: float, r_window: tuple[float, float],
                 super_polynomial: bool = False):
        self.slope = slope
        self.intercept = intercept
        self.r_window = r_window
        self.super_polynomial = super_polynomial

    def __iter__(self):
        return iter((self.slope, self.intercept, self.r_window))

    def __repr__(self) -> str:
        return (f"DecayFit(slope={self.slope!r}, intercept={self.intercept!r}, "
                f"r_window={self.r_window!r}, super_polynomial={self.super_polynomial})")


def fit_tail(r, u, floor: float = 1e-12) -> DecayFit:
    """Fit the last decade of (r, u) with |u| > floor."""
    r = np.asarray(r, dtype=float)
    a = np.abs(np.asarray(u, dtype=float))
    ok = (a > floor) & (r > 0)
    if not np.any(ok):
        raise TailError("insufficient tail: no samples above the floor")
    r_hi = float(r[ok][-1])
    r_lo = r_hi / 10.0
    sel = ok & (r >= r_lo) & (r <= r_hi)
    if r[ok][0] > r_lo * (1 + 1e-12) or np.count_nonzero(sel) < 8:
        raise TailError(f"insufficient tail: need a resolved decade below r={r_hi:g}")
    x, yv = np.log(r[sel]), np.log(a[sel])
    slope, intercept = np.polyfit(x, yv, 1)
    mid = math.log(math.sqrt(r_lo * r_hi))
    first, second = x <= mid, x >= mid
    s1 = np.polyfit(x[first], yv[first], 1)[0] if np.count_nonzero(first) >= 3 else slope
    s2 = np.polyfit(x[second], yv[second], 1)[0] if np.count_nonzero(second) >= 3 else slope
    if abs(s2 - s1) > 0.1 * max(abs(slope), 1.0):
        return DecayFit(math.nan, math.nan, (r_lo, r_hi), super_polynomial=True)
    return DecayFit(float(slope), float(intercept), (r_lo, r_hi))


def decay_fit(result: ShootResult) -> DecayFit:
    if not result.decaying:
        raise TailError(f"decay_fit needs a Decaying trajectory, got {result.classification}")
    keep = result.r <= (result.r_resolved or result.r_end)
    return fit_tail(result.r[keep], result.u[keep])


def l2_cauchy(result: ShootResult, onset: float, slope: float | None = None,
              tol: float = 1e-6, r_cap: float = 1e12):
    """Mass increments ``M(2R) - M(R)`` over dyadic radii from ``onset``.

    Up to ``r_resolved`` M comes from the integrated profile; beyond it the
    tail ``u(r_t)(r/r_t)^slope`` is integrated in closed form.  Returns
    ``(increments, converged)``: converged when the increments decrease and
    one of them falls below tol before ``r_cap``.
    """
    r, M = result.r, result.mass_profile
    r_t = result.r_resolved or result.r_end
    k_t = int(np.searchsorted(r, r_t, side="right")) - 1
    u_t, M_t = abs(float(result.u[k_t])), float(M[k_t])
    N = result.params.N
    om = sphere_area(N)

    def mass(R):
        if R <= r_t:
            return float(np.interp(R, r[: k_t + 1], M[: k_t + 1]))
        if slope is None:
            return math.nan
        e = 2.0 * slope + N
        if abs(e) < 1e-12:
            return M_t + om * u_t ** 2 * r_t ** N * math.log(R / r_t)
        return M_t + om * u_t ** 2 * r_t ** N * ((R / r_t) ** e - 1.0) / e

    inc = []
    R = onset
    prev = mass(R)
    while R < r_cap:
        cur = mass(2.0 * R)
        if not math.isfinite(cur):
            break
        inc.append(cur - prev)
        if abs(inc[-1]) < tol:
            break
        prev, R = cur, 2.0 * R
    ok = (len(inc) >= 3 and bool(np.all(np.diff(inc) <= 0)) and abs(inc[-1]) < tol)
    return [float(x) for x in inc], ok


# ---------------------------------------------------------------------------
# ground states


def to_radial(result: ShootResult, n: int = 4097, grid: RadialGrid | None = None) -> RadialFn:
    """Map the trajectory onto a radial grid (Hermite interpolation, zero past the end)."""
    N = result.params.N
    if grid is None:
        r_end = result.r_end
        if result.lam > 0:
            grid = RadialGrid.uniform(r_end, n, N)
        else:
            # resolve the core at about a thousandth of the half-height radius
            half = float(np.interp(-0.5 * result.u0, -result.u, result.r))
            h0 = 1e-3 * half

            def first_cell(ratio):
                return r_end * (ratio - 1.0) / math.expm1((n - 1) * math.log(ratio)) - h0
            ratio = brentq(first_cell, 1.0 + 1e-9, 1.1) if first_cell(1.0 + 1e-9) > 0 else 1.0
            grid = (RadialGrid.geometric(r_end, n, N, ratio) if ratio > 1.0
                    else RadialGrid.uniform(r_end, n, N))
    s = result.spline()
    x = np.asarray(grid.r)
    vals = np.zeros(grid.n)
    inside = x <= result.r_end
    vals[inside] = s(np.clip(x[inside], result.r[0], None))
    # inside [0, eps] the series is flat to within eps^2
    return grid.fn(vals)


def _truncation_radius(mid: ShootResult, lo: ShootResult, hi: ShootResult, rel: float) -> float:
    """First radius where the bracket trajectories disagree by ``rel`` of the smaller one."""
    r_cap = min(lo.r_end, hi.r_end, mid.r_end)
    r = mid.r[mid.r <= r_cap]
    ul = lo.spline()(r)
    uh = hi.spline()(r)
    ref = np.minimum(np.abs(ul), np.abs(uh))
    bad = np.flatnonzero(np.abs(ul - uh) > rel * ref)
    if bad.size == 0:
        return float(r[-1])
    return float(r[max(bad[0] - 1, 0)])


def _cut(res: ShootResult, r_t: float) -> ShootResult:
    k = int(np.searchsorted(res.r, r_t, side="right"))
    res.r, res.u, res.v, res.F = res.r[:k], res.u[:k], res.v[:k], res.F[:k]
    res.mass_profile = res.mass_profile[:k]
    res.r_resolved = float(res.r[-1])
    return res


def _append_tail(res: ShootResult, shape, r_far: float, samples: int = 400) -> None:
    """Continue past r_resolved with ``u = u_t * shape(r) / shape(r_t)``, ``shape`` giving (s, s')."""
    N, lam = res.params.N, res.lam
    r_t, u_t = float(res.r[-1]), float(res.u[-1])
    r = np.geomspace(r_t, r_far, samples + 1)[1:]
    s_t = shape(np.array([r_t]))[0][0]
    sv, dv = shape(r)
    u = u_t * sv / s_t
    v = u_t * dv / s_t
    rr = np.concatenate([[r_t], r])
    dens = sphere_area(N) * rr ** (N - 1) * np.concatenate([[u_t], u]) ** 2
    mass_tail = np.cumsum(0.5 * (dens[1:] + dens[:-1]) * np.diff(rr))
    res.mass_profile = np.concatenate([res.mass_profile, res.mass_profile[-1] + mass_tail])
    res.r = np.concatenate([res.r, r])
    res.u = np.concatenate([res.u, u])
    res.v = np.concatenate([res.v, v])
    res.F = np.concatenate([res.F, first_integral(u, v, res.params, lam)])


def _exponential_shape(N: int, lam: float):
    """Decaying mode of ``u'' + (N-1)u'/r = lambda u`` (leading order)."""
    k = math.sqrt(lam)

    def shape(r):
        s = r ** (-(N - 1) / 2.0) * np.exp(-k * r)
        return s, -s * (k + (N - 1) / (2.0 * r))
    return shape


def _power_shape(slope: float):
    def shape(r):
        s = r ** slope
        return s, slope * s / r
    return shape


def scan_brackets(params: ProblemParams, lam: float, cfg: ShootConfig | None = None,
                  u0_range: tuple[float, float] = (1e-8, 1e8), probes: int = 33):
    """Classify a log-spaced ladder of u0 and return every change between crossing and not.

    Each bracket is ``(u_lo, u_hi, lo_crosses)``.
    """
    cfg = cfg or ShootConfig(lam=lam)
    ladder = np.geomspace(u0_range[0], u0_range[1], probes)
    labels = []
    for u0 in ladder:
        try:
            labels.append(shoot(_with(cfg, lam, float(u0)), params).classification.kind)
        except ShootError:
            labels.append(None)
    brackets = []
    for i in range(probes - 1):
        a, b = labels[i], labels[i + 1]
        if a is None or b is None:
            continue
        if (a is Kind.CROSSING) != (b is Kind.CROSSING):
            brackets.append((float(ladder[i]), float(ladder[i + 1]), a is Kind.CROSSING))
    return brackets, list(zip(ladder.tolist(), [x.value if x else None for x in labels]))


def _with(cfg: ShootConfig, lam: float, u0: float) -> ShootConfig:
    return ShootConfig(lam=lam, u0=u0, r_max=cfg.r_max, h0=cfg.h0, tol_step=cfg.tol_step,
                       blowup_threshold=cfg.blowup_threshold)


def find_ground_state(params: ProblemParams, lam: float, cfg: ShootConfig | None = None,
                      u0_range: tuple[float, float] = (1e-8, 1e8), probes: int = 33,
                      rel_width: float = 1e-10, disagree: float = 1e-3) -> ShootResult:
    """Locate the positive decaying profile by bisection on u(0).

    The first change between crossing and non-crossing trajectories on a log
    ladder of u(0) is narrowed to ``rel_width``; the separatrix between the
    two is the decaying profile.  The mid trajectory is kept up to the radius
    where the two bracket trajectories separate; for lambda > 0 it is then
    continued with the exponentially decaying linear mode.
    """
    if not lam >= 0:
        raise ParameterError("lambda must be >= 0")
    if not params.alpha > 0:
        raise ParameterError("find_ground_state needs alpha > 0")
    cfg = cfg or ShootConfig(lam=lam)
    brackets, ladder = scan_brackets(params, lam, cfg, u0_range, probes)
    if not brackets:
        msg = f"no ground state located for u0 in [{u0_range[0]:g}, {u0_range[1]:g}]"
        if lam == 0:
            cert = liouville_certificate(params.N, params.p, params.q)
            msg += f" (Liouville certificate: {cert.kind.value})"
        raise GroundStateNotFound(msg)
    lo, hi, lo_crosses = brackets[0]
    res_lo = shoot(_with(cfg, lam, lo), params)
    res_hi = shoot(_with(cfg, lam, hi), params)
    while hi / lo - 1.0 > rel_width:
        mid = math.sqrt(lo * hi)
        if mid <= lo or mid >= hi:
            break
        res = shoot(_with(cfg, lam, mid), params)
        if (res.classification.kind is Kind.CROSSING) == lo_crosses:
            lo, res_lo = mid, res
        else:
            hi, res_hi = mid, res
    u_mid = math.sqrt(lo * hi)
    res = shoot(_with(cfg, lam, u_mid), params)
    r_t = _truncation_radius(res, res_lo, res_hi, disagree)
    if res.classification.kind is not Kind.DECAYING:
        r_t = min(r_t, res.classification.r_star or r_t)
    _cut(res, r_t)
    res.extras.update({
        "bracket": [lo, hi],
        "corridors": [[a, b] for a, b, _ in brackets],
        "probes": ladder,
    })
    fit = None
    if lam > 0:
        _append_tail(res, _exponential_shape(params.N, lam), r_t + 40.0 / math.sqrt(lam))
    else:
        try:
            fit = fit_tail(res.r, res.u)
        except TailError as exc:
            res.extras["decay_fit_error"] = str(exc)
        if fit is not None and not fit.super_polynomial and fit.slope < 0:
            # continue the measured power law until u is far below the decay threshold
            r_far = res.r_resolved * (1e-4 * DECAY_FRACTION * res.u0 / abs(res.u[-1])) ** (1.0 / fit.slope)
            _append_tail(res, _power_shape(fit.slope), max(r_far, 2.0 * res.r_resolved))
    if abs(res.u[-1]) < DECAY_FRACTION * res.u0 and np.all(res.u > 0):
        res.classification = Classification(Kind.DECAYING)
    else:
        res.classification = Classification(Kind.DIVERGING, res.r_resolved, "unresolved")
    _certify(res, fit)
    return res


def _certify(res: ShootResult, fit: DecayFit | None = None) -> None:
    """Attach the Pohozaev residual, the tail fit, the mass and the multiplier check."""
    params, lam = res.params, res.lam
    u = to_radial(res)
    rep = report(u, params, lam)
    res.pohozaev_residual = rep.pohozaev_residual
    res.extras["energy"] = rep.E
    if lam > 0:
        lam_test = (params.alpha * rep.lp - rep.K) / rep.mass
        res.extras["multiplier_from_profile"] = lam_test
        res.extras["multiplier_rel_error"] = abs(lam_test - lam) / lam
    if not res.decaying:
        return
    if fit is None:
        try:
            fit = decay_fit(res)
        except TailError as exc:
            res.extras["decay_fit_error"] = str(exc)
    if fit is not None:
        res.decay_slope = None if fit.super_polynomial else fit.slope
        res.extras["decay_window"] = list(fit.r_window)
        res.extras["super_polynomial_tail"] = fit.super_polynomial
    res.l2_mass = _mass_verdict(res)


def _mass_verdict(res: ShootResult):
    if res.lam > 0:
        return float(res.mass_profile[-1])
    s = res.decay_slope
    if s is None:
        return "divergent"
    window = res.extras.get("decay_window")
    inc, ok = l2_cauchy(res, window[0], slope=s)
    res.extras["l2_increments"] = inc
    # a tail ~ r^s is square integrable only if 2s + N < 0; borderline slopes are not trusted
    N = res.params.N
    if not ok or not 2.0 * s + N < -0.5:
        return "divergent"
    # closed-form remainder of the power tail beyond the last sample
    rest = sphere_area(N) * float(res.u[-1]) ** 2 * res.r_end ** N / -(2.0 * s + N)
    return float(res.mass_profile[-1] + rest)


def zero_mass_solution(params: ProblemParams, cfg: ShootConfig | None = None) -> ShootResult:
    """find_ground_state at lambda = 0, refusing parameters outside the existence range."""
    if not zero_mass_eligible(params.N, params.p, params.q):
        cert = liouville_certificate(params.N, params.p, params.q)
        raise ParameterError(
            f"zero-mass solutions need N >= 3 and 2* < p < q*; (N={params.N}, q={params.q}, "
            f"p={params.p}) is outside (Liouville certificate: {cert.kind.value})")
    return find_ground_state(params, 0.0, cfg)
