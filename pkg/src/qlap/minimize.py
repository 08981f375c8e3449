"""Constrained minimization on the mass sphere ``S_m = {||u||_2^2 = m}``.

The optimizer is a projected descent whose search direction is the gradient
taken in a Sobolev metric: each step solves one tridiagonal system with
``M + A(u)``, where M is the quadrature mass matrix and A(u) the stiffness of
the linearized (2,q) operator.  The direction is made tangent to the sphere in
that metric, the step is found by Armijo backtracking on the objective, and
the iterate is rescaled back onto S_m.  Every accepted step lowers the
objective, so the returned energy is certified by construction.
"""

from __future__ import annotations

import enum
import json
import math
import warnings
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.linalg import solve_banded
from scipy.optimize import brentq
from scipy.optimize import minimize as sp_minimize

from .functionals import (
    Norms,
    energy_from_norms,
    energy_gradient,
    multiplier_from_norms,
    norms,
    q_from_norms,
    quotient_exponents,
    report,
    term_gradients,
)
from .params import (
    ParameterError,
    ProblemParams,
    classify_regime,
    gn_exponents,
    nu,
    require_coercive,
    sobolev_exponent,
    require_intermediate,
)
from .radial import RadialFn, RadialGrid, grad_norm_pow, lp_norm_pow
from .scaling import (
    ScalingWarning,
    fiber_argmin,
    fiber_energy_argmin,
    resample,
    sigma_star,
    threshold_report,
)


class MinimizeError(RuntimeError):
    pass


@dataclass(frozen=True)
class MinimizeOptions:
    max_iter: int = 20000
    step: float = 1.0
    step_shrink: float = 0.5
    tol_grad: float = 1e-7
    restarts: int = 6
    seed: int = 0
    n: int = 1025
    r_max: float | None = None

    def __post_init__(self):
        if self.max_iter < 1 or self.restarts < 1:
            raise ParameterError("max_iter and restarts must be positive")
        if not self.step > 0 or not self.tol_grad > 0:
            raise ParameterError("step and tol_grad must be positive")
        if not 0.0 < self.step_shrink < 1.0:
            raise ParameterError("step_shrink must lie in (0, 1)")
        if self.n < 16:
            raise ParameterError("n must be at least 16")
        if self.r_max is not None and not self.r_max > 0:
            raise ParameterError("r_max must be positive")

    def as_dict(self) -> dict:
        return dict(max_iter=self.max_iter, step=self.step, step_shrink=self.step_shrink,
                    tol_grad=self.tol_grad, restarts=self.restarts, seed=self.seed,
                    n=self.n, r_max=self.r_max)

    @property
    def tol_neg(self) -> float:
        return 10.0 * self.tol_grad


class Status(str, enum.Enum):
    CONVERGED = "Converged"
    VANISHING = "VanishingInfimum"
    NOT_CONVERGED = "NotConverged"


@dataclass
class MinimizeResult:
    u: RadialFn
    energy: float
    lam: float
    grad_tangent_norm: float
    iterations: int
    converged: bool
    constraint: str = "Global"
    status: Status = Status.NOT_CONVERGED
    diagnostics: dict = field(default_factory=dict)

    @property
    def K(self) -> float:
        return self.diagnostics.get("K", math.nan)

    def to_record(self, params: ProblemParams | None = None) -> dict:
        rec = dict(energy=self.energy, **{"lambda": self.lam},
                   grad_tangent_norm=self.grad_tangent_norm, iterations=self.iterations,
                   converged=self.converged, constraint=self.constraint,
                   status=self.status.value, diagnostics=self.diagnostics,
                   grid=dict(N=self.u.grid.N, r_max=self.u.grid.r_max, n=self.u.grid.n,
                             spacing=self.u.grid.tag))
        if params is not None:
            rec["params"] = params.as_dict()
        return rec

    def to_json(self, params: ProblemParams | None = None) -> str:
        return json.dumps(self.to_record(params), sort_keys=True, indent=2)

    def save(self, stem, params: ProblemParams | None = None) -> tuple[str, str]:
        """Write ``<stem>.json`` and the profile sidecar ``<stem>.csv``."""
        stem = str(stem)
        with open(stem + ".json", "w", encoding="utf-8") as fh:
            fh.write(self.to_json(params) + "\n")
        self.u.to_csv(stem + ".csv")
        return stem + ".json", stem + ".csv"


def project_sphere(u: RadialFn, m: float) -> RadialFn:
    mass = lp_norm_pow(u, 2.0)
    if not mass > 0:
        raise MinimizeError("cannot project the zero function onto the mass sphere")
    return u.with_values(u.values * math.sqrt(m / mass))


# ---------------------------------------------------------------------------
# descent engine


def _metric(u: RadialFn, q: float, shift: float) -> np.ndarray:
    """Banded form of ``shift*M + A(u)`` for scipy.linalg.solve_banded((1, 1), ...)."""
    g = u.grid
    d = u.derivative()
    kappa = g.cell_measure / g.h ** 2 * (1.0 + (q - 1.0) * np.abs(d) ** (q - 2.0))
    ab = np.zeros((3, g.n))
    ab[1] = shift * g.weights
    ab[1, 1:] += kappa
    ab[1, :-1] += kappa
    ab[0, 1:] = -kappa
    ab[2, :-1] = -kappa
    return ab


@dataclass
class _Trace:
    u: RadialFn
    value: float
    resid: float
    iterations: int
    converged: bool
    stalled: bool = False
    newton_steps: int = 0
    stopped: bool = False


Objective = Callable[[RadialFn], tuple[float, np.ndarray]]


def _pin_end(ab: np.ndarray, g: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Freeze the last node (u(r_max) = 0) by decoupling its row and column."""
    ab = ab.copy()
    ab[1, -1] = 1.0
    ab[0, -1] = 0.0
    ab[2, -2] = 0.0
    g = g.copy()
    g[-1] = 0.0
    return ab, g


def _solver(op, g: np.ndarray):
    """Return (solve, pinned g) for a banded matrix or a (banded, U, S) low-rank update."""
    if isinstance(op, tuple):
        ab, U, S = op
    else:
        ab, U, S = op, None, None
    ab, g = _pin_end(ab, g)
    if U is None:
        return (lambda b: solve_banded((1, 1), ab, b)), g
    U = U.copy()
    U[-1, :] = 0.0
    TU = solve_banded((1, 1), ab, U)
    cap = np.diag(1.0 / S) + U.T @ TU

    def solve(b):
        Tb = solve_banded((1, 1), ab, b)
        return Tb - TU @ np.linalg.solve(cap, U.T @ Tb)
    return solve, g


def _tangent_direction(op, g: np.ndarray, C: np.ndarray):
    """Minimize ``<g, d> + |d|_P^2/2`` subject to ``C^T d = 0``; returns (d, slope) or None.

    ``C`` is one constraint gradient (a vector) or several stacked as columns.
    """
    C = C.reshape(len(g), -1)
    try:
        solve, g = _solver(op, g)
        C = C.copy()
        C[-1, :] = 0.0
        pg = solve(g)
        pc = solve(C)
        beta = np.linalg.solve(C.T @ pc, C.T @ pg)
    except (np.linalg.LinAlgError, ValueError):
        return None
    d = pg - pc @ beta
    slope = float((g - C @ beta) @ d)
    if not np.all(np.isfinite(d)):
        return None
    return d, slope


def _descend(u: RadialFn, objective: Objective, m: float, q: float, opts: MinimizeOptions,
             shift: Callable[[RadialFn], float], admissible: Callable[[RadialFn], bool] | None = None,
             tol: float | None = None,
             hessian: Callable[[RadialFn], np.ndarray] | None = None,
             stop: Callable[[RadialFn, float], bool] | None = None,
             constraints: Callable[[RadialFn], list[np.ndarray]] | None = None) -> _Trace:
    """Projected descent on S_m.

    ``shift`` sets the mass-matrix weight of the Sobolev metric.  If ``hessian``
    is given it returns a banded matrix tried first as the metric (a projected
    Newton step); it is used only when the step it proposes passes the same
    Armijo test with unit length.
    """
    tol = opts.tol_grad if tol is None else tol
    vals = np.array(u.values, dtype=float)
    vals[-1] = 0.0
    u = project_sphere(u.with_values(vals), m)
    w = np.asarray(u.grid.weights)
    f, g = objective(u)
    tau = opts.step
    resid = math.inf
    newton_steps = 0

    def try_step(d, slope, t0, shrinks):
        t = t0
        for _ in range(shrinks):
            cand = project_sphere(u.with_values(u.values - t * d), m)
            if admissible is None or admissible(cand):
                fc, gc = objective(cand)
                # Armijo, with slack for rounding once the decrease is at machine level
                if fc <= f - 1e-4 * t * slope or (
                        fc <= f + 4e-16 * abs(f) and t * slope < 1e-13 * max(abs(f), 1e-300)):
                    return cand, fc, gc, t
            t *= opts.step_shrink
        return None

    for it in range(1, opts.max_iter + 1):
        if stop is not None and it % 25 == 0 and stop(u, f):
            return _Trace(u, f, resid, it - 1, False, stalled=False, newton_steps=newton_steps,
                          stopped=True)
        Mu = w * u.values
        if constraints is not None:
            Mu = np.column_stack([Mu] + list(constraints(u)))
        sob = _tangent_direction(_metric(u, q, shift(u)), g, Mu)
        if sob is None:
            return _Trace(u, f, resid, it, False, stalled=True, newton_steps=newton_steps)
        d, slope = sob
        resid = math.sqrt(max(slope, 0.0))
        if resid <= tol:
            return _Trace(u, f, resid, it - 1, True, newton_steps=newton_steps)
        step = None
        if hessian is not None:
            nt = _tangent_direction(hessian(u), g, Mu)
            # trust region: a Newton step may not move any node by more than half the peak
            if (nt is not None and nt[1] > 0
                    and np.max(np.abs(nt[0])) <= 0.5 * np.max(np.abs(u.values))):
                step = try_step(nt[0], nt[1], 1.0, 1)
                if step is not None:
                    newton_steps += 1
        if step is None:
            step = try_step(d, slope, min(tau, opts.step * 1e3), 60)
            if step is None:
                return _Trace(u, f, resid, it, False, stalled=True, newton_steps=newton_steps)
            tau = step[3] / opts.step_shrink
        u, f, g = step[0], step[1], step[2]
    return _Trace(u, f, resid, opts.max_iter, False, newton_steps=newton_steps)


def _lagrangian_hessian(params: ProblemParams) -> Callable[[RadialFn], np.ndarray]:
    """Banded Hessian of ``E + lambda*||u||^2/2`` with lambda frozen at the current multiplier."""
    def hess(u: RadialFn) -> np.ndarray:
        lam = multiplier_from_norms(norms(u, params), params)
        ab = _metric(u, params.q, 0.0)
        v = np.abs(u.values)
        ab[1] += u.grid.weights * (lam - params.alpha * (params.p - 1.0) * v ** (params.p - 2.0))
        return ab
    return hess


def _energy_objective(params: ProblemParams) -> Objective:
    def obj(u: RadialFn):
        return energy_from_norms(norms(u, params), params), energy_gradient(u, params)
    return obj


def _energy_shift(params: ProblemParams) -> Callable[[RadialFn], float]:
    def shift(u: RadialFn) -> float:
        nm = norms(u, params)
        lam = multiplier_from_norms(nm, params)
        return max(lam, 0.1 * nm.K / nm.mass, 1e-12)
    return shift


# ---------------------------------------------------------------------------
# small-K region


def _rho_for_norms(nm: Norms, params: ProblemParams, thetas: np.ndarray, amps: np.ndarray) -> float:
    """Smallest K along ``c * u_theta`` (c <= 1) where E >= K/(2q) or Q >= K/2 fails."""

    N, q, p, alpha = params.N, params.q, params.p, params.alpha
    tab = gn_exponents(params)
    a, b = tab.a_grad_q, tab.b_lp
    cq_coef = ((N + 2.0) * q / 2.0 - N) / q
    cp_coef = alpha * N / p * (p / 2.0 - 1.0)
    best = math.inf

    def margins(c, th):
        g2 = c * c * th ** 2 * nm.grad2
        gq = c ** q * th ** a * nm.gradq
        lp = c ** p * th ** b * nm.lp
        K = g2 + gq
        e_margin = 0.5 * g2 + gq / q - alpha * lp / p - K / (2.0 * q)
        q_margin = g2 + cq_coef * gq - cp_coef * lp - K / 2.0
        return np.minimum(e_margin / K, q_margin / K), K

    for c in amps:
        mg, K = margins(c, thetas)
        bad = np.flatnonzero(mg < 0)
        if bad.size == 0:
            continue
        k = bad[0]
        if k == 0:
            return 0.0
        lo, hi = math.log(thetas[k - 1]), math.log(thetas[k])
        s = brentq(lambda x: float(margins(c, np.array([math.exp(x)]))[0][0]), lo, hi, xtol=1e-12)
        best = min(best, float(margins(c, np.array([math.exp(s)]))[1][0]))
    return best


def _random_profiles(N: int, count: int, seed: int):
    rng = np.random.default_rng(seed)
    grid = RadialGrid.uniform(40.0, 2049, N)
    r = np.asarray(grid.r)
    for _ in range(count):
        k = int(rng.integers(1, 4))
        vals = np.zeros_like(r)
        for _ in range(k):
            width = float(np.exp(rng.uniform(np.log(0.3), np.log(4.0))))
            centre = float(rng.uniform(0.0, 3.0)) * (k > 1)
            amp = float(rng.uniform(-1.0, 1.0)) if k > 1 else 1.0
            kind = int(rng.integers(0, 3))
            x = np.abs(r - centre) / width
            if kind == 0:
                vals += amp * np.exp(-x * x)
            elif kind == 1:
                vals += amp / np.cosh(x) ** 2
            else:
                vals += amp * (1.0 + x * x) ** -3
        if not np.any(vals):
            vals = np.exp(-r * r)
        yield grid.fn(vals)


@lru_cache(maxsize=64)
def _rho_hat_cached(N, q, p, alpha, m, samples, seed) -> float:
    params = ProblemParams(N=N, q=q, p=p, alpha=alpha, m=m)
    if alpha == 0:
        return math.inf
    if not classify_regime(params).is_intermediate:
        return 0.0
    thetas = np.geomspace(1e-5, 1e5, 2001)
    amps = np.geomspace(1e-2, 1.0, 9)
    best = math.inf
    for v in _random_profiles(N, samples, seed):
        v = project_sphere(v, m)
        best = min(best, _rho_for_norms(norms(v, params), params, thetas, amps))
    return best


def estimate_rho_hat(params: ProblemParams, samples: int = 200, seed: int = 0) -> float:
    """Empirical radius of the small-K region.

    Every sampled profile scaled to ``c * u_theta`` with mass at most m and
    ``K <= rho_hat`` satisfies ``E >= K/(2q)`` and ``Q >= K/2``.  Dilations and
    amplitudes are scanned in closed form from the norms.  Outside the
    intermediate regime no such radius exists and 0 is returned.
    """
    if samples < 1:
        raise ParameterError("samples must be positive")
    return _rho_hat_cached(params.N, params.q, params.p, params.alpha, params.m, samples, seed)


# ---------------------------------------------------------------------------
# seeds and grids


def _gaussian(grid: RadialGrid, width: float) -> RadialFn:
    return grid.sample(lambda r: np.exp(-(r / width) ** 2))


def _fiber_theta(u: RadialFn, params: ProblemParams) -> float:
    """Dilation putting u at the bottom of its fiber (closed form when available)."""
    if params.alpha > 0 and classify_regime(params).is_intermediate:
        return fiber_argmin(u, params)[0]
    return fiber_energy_argmin(u, params, lo=1e-8, hi=1e8)[0]


def natural_length(params: ProblemParams) -> float:
    """Width of the fiber-optimal Gaussian of mass m (unit Gaussian divided by theta)."""
    grid = RadialGrid.uniform(12.0, 4097, params.N)
    u = project_sphere(_gaussian(grid, 1.0), params.m)
    return 1.0 / _fiber_theta(u, params)


def default_grid(params: ProblemParams, opts: MinimizeOptions) -> RadialGrid:
    if opts.r_max is not None:
        return RadialGrid.uniform(opts.r_max, opts.n, params.N)
    return RadialGrid.uniform(16.0 * natural_length(params), opts.n, params.N)


def seed_profiles(params: ProblemParams, grid: RadialGrid, count: int) -> list[RadialFn]:
    """Gaussians at widths log-spaced over [0.25, 8] times the fiber-optimal width.

    All Gaussians lie on one dilation orbit, so the fiber optimization fixes the
    reference width and the multistart spreads around it.  Widths are clipped
    to keep at least 8 cells inside the core and the tail inside the grid.
    """
    base = natural_length(params)
    factors = np.geomspace(0.25, 8.0, count) if count > 1 else np.array([1.0])
    lo = 8.0 * float(np.max(grid.h[:8]))
    hi = grid.r_max / 5.0
    seeds = []
    for f in factors:
        w = float(np.clip(f * base, lo, hi))
        seeds.append(project_sphere(_gaussian(grid, w), params.m))
    return seeds


# ---------------------------------------------------------------------------
# global and local minimization


def _vanishing(nm: Norms, E: float, params: ProblemParams, tol_neg: float, rho_hat: float,
               tail: float) -> bool:
    if E < -tol_neg:
        return False
    Q = q_from_norms(nm, params)
    return (nm.K < 1e-3 * rho_hat or Q >= 0.5 * nm.K or nm.K < tol_neg
            or tail > 1e-2)


def _finish(u: RadialFn, trace: _Trace, params: ProblemParams, opts: MinimizeOptions,
            constraint: str, rho_hat: float, extra: dict) -> MinimizeResult:
    rep = report(u, params)
    tol_neg = opts.tol_neg * params.m
    tail = u.tail_ratio()
    nm = Norms(rep.grad2, rep.gradq, rep.lp, rep.mass)
    if constraint == "Global" and _vanishing(nm, rep.E, params, tol_neg, rho_hat, tail):
        status = Status.VANISHING
    elif trace.converged:
        status = Status.CONVERGED
    else:
        status = Status.NOT_CONVERGED
    v = u.values
    single_sign = bool(np.all(v >= -1e-10 * np.abs(v).max()) or np.all(v <= 1e-10 * np.abs(v).max()))
    diag = dict(K=rep.K, Q=rep.Q, q_residual=rep.q_residual,
                pohozaev_residual=rep.pohozaev_residual, tail_ratio=tail,
                domain_too_small=bool(tail > 1e-6), single_sign=single_sign,
                newton_steps=trace.newton_steps, stalled=trace.stalled, rho_hat=rho_hat,
                tol_neg=tol_neg)
    diag.update(extra)
    return MinimizeResult(u=u, energy=rep.E, lam=rep.lam, grad_tangent_norm=trace.resid,
                          iterations=trace.iterations,
                          converged=bool(trace.converged and status is Status.CONVERGED),
                          constraint=constraint, status=status, diagnostics=diag)


def _pick_best(cands: list[tuple[int, _Trace]], params: ProblemParams, tol: float):
    """Lowest energy; energies within tol are ordered by smaller K, then seed index."""
    emin = min(t.value for _, t in cands)
    close = [(norms(t.u, params).K, i, t) for i, t in cands if t.value <= emin + tol]
    close.sort(key=lambda x: (x[0], x[1]))
    return close[0][1], close[0][2]


def global_minimize(params: ProblemParams, opts: MinimizeOptions | None = None,
                    grid: RadialGrid | None = None, seeds: list[RadialFn] | None = None
                    ) -> MinimizeResult:
    """Multistart projected descent for ``e_alpha(m) = inf E over S_m``.

    When the infimum is not attained (energy pinned at 0 while the iterates
    spread out) the result carries ``Status.VANISHING`` instead of a failure.
    """
    opts = opts or MinimizeOptions()
    if not params.alpha > 0:
        raise ParameterError("global_minimize needs alpha > 0")
    require_coercive(params)
    grid = grid or default_grid(params, opts)
    rho_hat = estimate_rho_hat(params)
    tol_neg = opts.tol_neg * params.m
    seeds = seeds if seeds is not None else seed_profiles(params, grid, opts.restarts)

    def stop(u, f):
        if f < -tol_neg or u.tail_ratio() < 1e-3:
            return False
        nm = norms(u, params)
        return q_from_norms(nm, params) >= 0.5 * nm.K

    obj, shift, hess = _energy_objective(params), _energy_shift(params), _lagrangian_hessian(params)
    traces = []
    for i, s in enumerate(seeds):
        tr = _descend(s, obj, params.m, params.q, opts, shift, hessian=hess, stop=stop)
        traces.append((i, tr))
    idx, best = _pick_best(traces, params, tol_neg)
    extra = dict(seed_index=idx, restart_energies=[t.value for _, t in traces], extended=0)
    result = _finish(best.u, best, params, opts, "Global", rho_hat, extra)
    if opts.r_max is None and result.status is Status.CONVERGED:
        result = _refit(result, params, opts, rho_hat, extra)
    return result


def _support_extent(u: RadialFn, rel: float = 1e-10) -> float:
    a = np.abs(u.values)
    idx = np.flatnonzero(a > rel * a.max())
    return float(u.grid.r[idx[-1]])


def _refit(result: MinimizeResult, params: ProblemParams, opts: MinimizeOptions, rho_hat: float,
           extra: dict) -> MinimizeResult:
    """Re-solve on a grid sized to the converged profile.

    The radius is set where |u| falls to 1e-10 of its peak (times 1.25), so the
    nodes are spent on the profile rather than on an empty tail; the domain
    grows instead when the profile still touches the truncation radius.
    """

    obj, shift, hess = _energy_objective(params), _energy_shift(params), _lagrangian_hessian(params)
    for rounds in range(1, 5):
        u = result.u
        r_new = 1.25 * _support_extent(u)
        if result.diagnostics["tail_ratio"] > 1e-6:
            r_new = max(r_new, 2.0 * u.grid.r_max)
        if abs(r_new - u.grid.r_max) <= 0.2 * u.grid.r_max:
            break
        grid = RadialGrid.uniform(r_new, opts.n, params.N)
        tr = _descend(resample(u, grid), obj, params.m, params.q, opts, shift, hessian=hess)
        cand = _finish(tr.u, tr, params, opts, "Global", rho_hat, dict(extra, refits=rounds))
        if cand.status is not Status.CONVERGED:
            break
        result = cand
    return result


def dilate_onto(u: RadialFn, theta: float, grid: RadialGrid) -> RadialFn:
    """``theta^{N/2} u(theta r)`` sampled on another grid (zero beyond the support of u)."""

    spline = CubicSpline(u.grid.r, u.values, bc_type=((1, 0.0), "not-a-knot"))
    x = theta * np.asarray(grid.r)
    inside = x <= u.grid.r_max
    vals = np.zeros(grid.n)
    vals[inside] = spline(x[inside])
    return grid.fn(theta ** (u.grid.N / 2.0) * vals)


def threshold_seed(params: ProblemParams, grid: RadialGrid, opts: MinimizeOptions) -> RadialFn:
    """Minimizer of J, dilated to the bottom of its fiber at the current alpha.

    Its shape is that of the minimizers at alpha = alpha_0, so for alpha near the
    threshold it lies in the basin of the local minimizer.
    """
    qres = minimize_quotient(params, replace(opts, r_max=None), m=params.m)
    theta = fiber_argmin(qres.u, params)[0]
    return project_sphere(dilate_onto(qres.u, theta, grid), params.m)


def local_minimize(params: ProblemParams, rho: float, opts: MinimizeOptions | None = None,
                   grid: RadialGrid | None = None, seeds: list[RadialFn] | None = None
                   ) -> MinimizeResult:
    """Descent restricted to ``{K > rho/2}`` by rejecting steps that leave it."""
    opts = opts or MinimizeOptions()
    if not rho > 0:
        raise ParameterError("rho must be positive")
    if not params.alpha > 0:
        raise ParameterError("local_minimize needs alpha > 0")
    require_intermediate(params)
    grid = grid or default_grid(params, opts)
    if seeds is None:
        seeds = [threshold_seed(params, grid, opts)] + seed_profiles(params, grid, opts.restarts)
        seeds = [s for s in seeds if norms(s, params).K > rho]
    else:
        seeds = [project_sphere(s, params.m) for s in seeds]
        seeds = [s for s in seeds if norms(s, params).K > rho]
    if not seeds:
        raise MinimizeError(f"no seed with K > rho = {rho:g}")

    def admissible(u):
        return norms(u, params).K > 0.5 * rho

    def hugging(u, f):
        # the iterate has slid onto the wall K = rho/2 and can only creep along it
        return norms(u, params).K < 0.6 * rho

    obj, shift, hess = _energy_objective(params), _energy_shift(params), _lagrangian_hessian(params)
    traces = []
    for i, s in enumerate(seeds):
        tr = _descend(s, obj, params.m, params.q, opts, shift, admissible=admissible, hessian=hess,
                      stop=hugging)
        K = norms(tr.u, params).K
        if K > 0.5 * rho * 1.05 and tr.converged:
            traces.append((i, tr))
    if not traces:
        raise MinimizeError(f"no local minimizer found at this rho ({rho:g}): "
                            "every seed collapsed onto the boundary K = rho/2")
    idx, best = _pick_best(traces, params, opts.tol_neg * params.m)
    return _finish(best.u, best, params, opts, f"LocalAboveRho({rho!r})", estimate_rho_hat(params),
                   dict(seed_index=idx, restart_energies=[t.value for _, t in traces]))


# ---------------------------------------------------------------------------
# the quotient J and the threshold alpha_0


def _log_quotient_objective(params: ProblemParams) -> Objective:
    kq, kp = quotient_exponents(params)

    def obj(u: RadialFn):
        nm = norms(u, params)
        dg2, dgq, dlp = term_gradients(u, params)
        val = math.log(nm.grad2) + kq * math.log(nm.gradq) - kp * math.log(nm.lp)
        grad = dg2 / nm.grad2 + kq * dgq / nm.gradq - kp * dlp / nm.lp
        return val, grad
    return obj


def _log_quotient_hessian(params: ProblemParams, reg: float = 1e-3):
    """Hessian of the Lagrangian of log J on S_m as banded part plus three rank-one terms.

    A small multiple of the Sobolev metric is added because dilations are an
    exact null direction of J.
    """
    kq, kp = quotient_exponents(params)
    q, p = params.q, params.p
    degree = 2.0 + q * kq - p * kp

    def hess(u: RadialFn):
        nm = norms(u, params)
        g = u.grid
        d = u.derivative()
        base = g.cell_measure / g.h ** 2
        kappa = base * (2.0 / nm.grad2 + kq * q * (q - 1.0) * np.abs(d) ** (q - 2.0) / nm.gradq)
        ab = np.zeros((3, g.n))
        ab[1, 1:] += kappa
        ab[1, :-1] += kappa
        ab[0, 1:] = -kappa
        ab[2, :-1] = -kappa
        ab[1] -= kp * p * (p - 1.0) * g.weights * np.abs(u.values) ** (p - 2.0) / nm.lp
        # multiplier of the mass constraint, fixed by the homogeneity degree of log J
        ab[1] -= degree / nm.mass * g.weights
        ab += reg / nm.K * _metric(u, q, nm.K / nm.mass)
        dg2, dgq, dlp = term_gradients(u, params)
        U = np.stack([dg2, dgq, dlp], axis=1)
        S = np.array([-1.0 / nm.grad2 ** 2, -kq / nm.gradq ** 2, kp / nm.lp ** 2])
        return ab, U, S
    return hess


def _unit_shift(u: RadialFn) -> float:
    # J is dilation invariant; a metric with mass weight ~ K/m keeps steps scale-free
    g = u.grid
    d = u.derivative()
    K = float(g.cell_measure @ (d * d))
    return max(K / lp_norm_pow(u, 2.0), 1e-12)


def _decreasing_seeds(grid: RadialGrid) -> list[RadialFn]:
    shapes = [
        lambda r: np.exp(-r * r),
        lambda r: 1.0 / np.cosh(r) ** 2,
        lambda r: 1.0 / np.cosh(r),
        lambda r: (1.0 + r * r) ** -4,
        lambda r: np.exp(-r ** 4),
    ]
    return [grid.sample(f) for f in shapes]


@dataclass
class QuotientResult:
    d: float
    u: RadialFn
    converged: bool
    iterations: int
    grad_tangent_norm: float


def minimize_quotient(params: ProblemParams, opts: MinimizeOptions | None = None,
                      m: float | None = None, grid: RadialGrid | None = None) -> QuotientResult:
    """Minimize J over S_m from several decreasing seeds; returns the best.

    J is dilation invariant in the continuum but not on a grid, where
    concentrating a profile lowers the discrete J a little.  Search directions
    are therefore also kept tangent to the level set of ``||u||_p^p``, which
    removes the dilation drift (the normalization ``||u||_p = 1`` up to scale).
    """
    opts = opts or MinimizeOptions()
    require_intermediate(params)
    m = params.m if m is None else m
    grid = grid or RadialGrid.uniform(opts.r_max or 16.0, opts.n, params.N)
    obj = _log_quotient_objective(params)
    hess = _log_quotient_hessian(params)

    def fix_scale(u):
        return [term_gradients(u, params)[2]]

    best = None
    for s in _decreasing_seeds(grid):
        tr = _descend(s, obj, m, params.q, opts, _unit_shift, hessian=hess, constraints=fix_scale)
        if not np.isfinite(tr.value):
            continue
        if best is None or tr.value < best.value:
            best = tr
    if best is None:
        raise MinimizeError("quotient descent diverged from every seed")
    d = math.exp(best.value)
    if not d > 0:
        raise MinimizeError(f"d estimate {d} is not positive")
    return QuotientResult(d=d, u=best.u, converged=best.converged, iterations=best.iterations,
                          grad_tangent_norm=best.resid)


def estimate_d1(params: ProblemParams, opts: MinimizeOptions | None = None) -> float:
    """Estimate ``d(1) = inf J`` over S_1."""
    return minimize_quotient(params, opts, m=1.0).d


def estimate_d(params: ProblemParams, m: float, opts: MinimizeOptions | None = None) -> float:
    """Estimate ``d(m)`` by minimizing J directly under ``||u||_2^2 = m``."""
    return minimize_quotient(params, opts, m=m).d


def _negative(params: ProblemParams, opts: MinimizeOptions) -> tuple[bool, MinimizeResult]:
    res = global_minimize(params, opts)
    return res.energy < -opts.tol_neg * params.m, res


def alpha0_bisect(params: ProblemParams, opts: MinimizeOptions | None = None,
                  alpha_start: float | None = None, rel_width: float = 1e-3,
                  max_expand: int = 40) -> float:
    """Bisection on alpha for the sign change of the global minimum energy.

    The predicate is ``global_minimize(alpha).energy < -tol_neg``.  The bracket
    starts at ``alpha_start`` (default: the current ``params.alpha``) and is
    doubled or halved until it straddles the sign change.
    """
    opts = opts or MinimizeOptions()
    require_intermediate(params)
    a = alpha_start or params.alpha or 1.0
    neg, _ = _negative(params.replace(alpha=a), opts)
    lo = hi = None
    for _ in range(max_expand):
        if neg:
            hi = a
            a = a / 2.0
        else:
            lo = a
            a = a * 2.0
        if lo is not None and hi is not None:
            break
        neg, _ = _negative(params.replace(alpha=a), opts)
    if lo is None or hi is None:
        raise MinimizeError("alpha_0 bracket not found after expansion")
    while hi - lo > rel_width * hi:
        mid = 0.5 * (lo + hi)
        if _negative(params.replace(alpha=mid), opts)[0]:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)


def threshold_estimates(params: ProblemParams, opts: MinimizeOptions | None = None):
    """Both alpha_0 estimators for ``params.m``: (ThresholdReport, d-minimizer)."""

    opts = opts or MinimizeOptions()
    qres = minimize_quotient(params, opts, m=1.0)
    rep = threshold_report(qres.d, params)
    bis = alpha0_bisect(params, opts, alpha_start=rep.alpha0_formula)
    rep.alpha0_bisect = bis
    return rep, qres


# ---------------------------------------------------------------------------
# Gagliardo-Nirenberg ratio


def gn_ratio(u: RadialFn, params: ProblemParams, r: float) -> float:
    """``||u||_p / (||grad u||_r^nu ||u||_2^(1-nu))`` with ``nu = nu_{p,r}``."""
    v = nu(params.N, params.p, r)
    lp = lp_norm_pow(u, params.p) ** (1.0 / params.p)
    gr = grad_norm_pow(u, r) ** (1.0 / r)
    l2 = lp_norm_pow(u, 2.0) ** 0.5
    return lp / (gr ** v * l2 ** (1.0 - v))


def _neg_log_gn_objective(params: ProblemParams, r: float) -> Objective:
    v = nu(params.N, params.p, r)
    p = params.p
    rp = params.replace(q=r) if r > 2 else params

    def obj(u: RadialFn):
        lp = lp_norm_pow(u, p)
        gr = grad_norm_pow(u, r)
        dg2, dgq, dlp = term_gradients(u, rp)
        dgr = dg2 if r == 2 else dgq
        val = -(math.log(lp) / p - v / r * math.log(gr))
        grad = -(dlp / (p * lp) - v / r * dgr / gr)
        return val, grad
    return obj


def estimate_gn_constant(params: ProblemParams, r: float, opts: MinimizeOptions | None = None,
                         samples: int = 64) -> float:
    """Empirical lower bound for the Gagliardo-Nirenberg constant C_r.

    Random profiles are scored first; the best few are then improved by ascent
    on the (dilation and amplitude invariant) ratio over the unit sphere.
    """
    opts = opts or MinimizeOptions()
    if r not in (2.0, params.q):
        raise ParameterError("r must be 2 or q")
    if not params.p < sobolev_exponent(params.N, r):
        raise ParameterError("estimate_gn_constant needs p < r*")
    grid = RadialGrid.uniform(opts.r_max or 30.0, opts.n, params.N)
    cands = _decreasing_seeds(grid)
    cands += [resample(v, grid) for v in _random_profiles(params.N, samples, opts.seed)]
    best = max(gn_ratio(c, params, r) for c in cands)
    top = sorted(cands, key=lambda c: -gn_ratio(c, params, r))[:4]
    obj = _neg_log_gn_objective(params, r)

    def fix_scale(u):
        return [term_gradients(u, params)[2]]

    for c in top:
        tr = _descend(c, obj, 1.0, max(r, 2.0 + 1e-12), opts, _unit_shift, constraints=fix_scale)
        best = max(best, gn_ratio(tr.u, params, r))
    return best


# ---------------------------------------------------------------------------
# mountain pass


@dataclass
class MountainPass:
    level: float
    sigma_a: float
    sigma_b: float
    t_star: float
    interior: bool
    energies: np.ndarray = field(repr=False)


def _path_energies(a: RadialFn, b: RadialFn, params: ProblemParams, ts: np.ndarray) -> np.ndarray:
    out = np.empty(ts.size)
    for k, t in enumerate(ts):
        out[k] = energy_from_norms(norms(project_sphere((1.0 - t) * a + t * b, params.m), params), params)
    return out


def mountain_pass_path(params: ProblemParams, u_low: RadialFn, u_high: RadialFn,
                       opts: MinimizeOptions | None = None, rho: float | None = None,
                       n_t: int = 201, box: float = 0.5) -> MountainPass:
    """Best path of the family ``project((1-t) sigma_a*u_low + t sigma_b*u_high)``."""
    opts = opts or MinimizeOptions()
    rho = estimate_rho_hat(params) if rho is None else rho
    u_low = project_sphere(u_low, params.m)
    u_high = project_sphere(u_high, params.m)
    K_low, K_high = norms(u_low, params).K, norms(u_high, params).K
    if not (K_low < rho < K_high):
        raise MinimizeError(
            f"not a mountain-pass configuration: need K(u_low)={K_low:.4g} < rho={rho:.4g} "
            f"< K(u_high)={K_high:.4g}")
    ts = np.linspace(0.0, 1.0, n_t)
    cache = {}

    def level(x):
        key = (round(float(x[0]), 12), round(float(x[1]), 12))
        if key in cache:
            return cache[key][0]
        sa, sb = float(np.clip(x[0], -box, box)), float(np.clip(x[1], -box, box))
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", ScalingWarning)
            try:
                a = sigma_star(u_low, sa)
                b = sigma_star(u_high, sb)
            except ValueError:
                cache[key] = (math.inf, None)
                return math.inf
        if not (norms(a, params).K < rho < norms(b, params).K):
            cache[key] = (math.inf, None)
            return math.inf
        e = _path_energies(a, b, params, ts)
        k = int(np.argmax(e))
        if k == 0 or k == ts.size - 1:
            # the maximum sits on an endpoint: not a path over the barrier
            cache[key] = (math.inf, None)
            return math.inf
        cache[key] = (float(e.max()), (sa, sb, e))
        return float(e.max())

    level(np.zeros(2))
    sp_minimize(level, np.zeros(2), method="Nelder-Mead",
                      options=dict(xatol=1e-3, fatol=1e-10, maxfev=120,
                                   initial_simplex=[[0, 0], [0.25, 0], [0, 0.25]]))
    finite = [(v[0], v[1]) for v in cache.values() if v[1] is not None]
    if not finite:
        raise MinimizeError("not a mountain-pass configuration: no admissible path in the family")
    val, (sa, sb, e) = min(finite, key=lambda z: z[0])
    k = int(np.argmax(e))
    return MountainPass(level=val, sigma_a=sa, sigma_b=sb, t_star=float(ts[k]),
                        interior=bool(0 < k < ts.size - 1), energies=e)


def mountain_pass_estimate(params: ProblemParams, u_low: RadialFn, u_high: RadialFn,
                           opts: MinimizeOptions | None = None, rho: float | None = None) -> float:
    """Upper bound on the mountain-pass level joining u_low (small K) to u_high (large K)."""
    mp = mountain_pass_path(params, u_low, u_high, opts, rho)
    if not mp.interior:
        raise MinimizeError("not a mountain-pass configuration: path maximum sits at an endpoint")
    return mp.level


def mountain_pass_endpoints(u_high: RadialFn, params: ProblemParams, rho: float,
                            factor: float = 0.25, max_nodes: int = 16385
                            ) -> tuple[RadialFn, RadialFn]:
    """Return ``(u_low, u_high)`` on one common grid, u_low a dilation with ``K < factor*rho``.

    The grid is widened by ``1/theta`` so the spread-out copy still fits, with
    the spacing of the original grid kept where the node budget allows.
    """
    u_high = project_sphere(u_high, params.m)
    nm = norms(u_high, params)
    tab = gn_exponents(params)
    theta = 1.0
    while theta * theta * nm.grad2 + theta ** tab.a_grad_q * nm.gradq >= factor * rho:
        theta *= 0.8
    g = u_high.grid
    n = min(max_nodes, int((g.n - 1) / theta) + 1)
    big = RadialGrid.uniform(g.r_max / theta, n, g.N)
    spline = CubicSpline(g.r, u_high.values, bc_type=((1, 0.0), "not-a-knot"))
    x = np.minimum(theta * np.asarray(big.r), g.r_max)
    low = big.fn(theta ** (g.N / 2.0) * spline(x))
    return project_sphere(low, params.m), project_sphere(resample(u_high, big), params.m)


def local_sweep(params: ProblemParams, alphas, opts: MinimizeOptions | None = None,
                rho: float | None = None) -> list[tuple[float, MinimizeResult | None]]:
    """Follow the local-minimizer branch through decreasing alpha by continuation.

    The first alpha is solved from the default seeds, each later one from the
    previous minimizer.  Entries after the branch is lost are ``None``; the
    last solved alpha is an empirical lower edge of the window of local minima.
    """
    opts = opts or MinimizeOptions()
    out: list[tuple[float, MinimizeResult | None]] = []
    prev = None
    for a in sorted(alphas, reverse=True):
        p = params.replace(alpha=float(a))
        r_loc = estimate_rho_hat(p) if rho is None else rho
        try:
            if prev is None:
                res = local_minimize(p, r_loc, opts)
            else:
                res = local_minimize(p, r_loc, opts, grid=prev.u.grid, seeds=[prev.u])
        except MinimizeError:
            res = None
        out.append((float(a), res))
        if res is not None:
            prev = res
    return out
