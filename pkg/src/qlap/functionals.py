"""Energy, Pohozaev-type functionals and first variations on radial grids."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from .params import ProblemParams, gn_exponents
from .radial import RadialFn, grad_norm_pow, lp_norm_pow


class FunctionalError(ValueError):
    pass


@dataclass(frozen=True)
class Norms:
    """The four integrals every functional is built from."""

    grad2: float
    gradq: float
    lp: float
    mass: float

    @property
    def K(self) -> float:
        return self.grad2 + self.gradq


def _finite(name: str, value: float) -> float:
    if not math.isfinite(value):
        raise FunctionalError(f"{name} evaluated to {value}")
    return float(value)


def norms(u: RadialFn, params: ProblemParams) -> Norms:
    return Norms(
        grad2=_finite("||grad u||_2^2", grad_norm_pow(u, 2.0)),
        gradq=_finite("||grad u||_q^q", grad_norm_pow(u, params.q)),
        lp=_finite("||u||_p^p", lp_norm_pow(u, params.p)),
        mass=_finite("||u||_2^2", lp_norm_pow(u, 2.0)),
    )


def energy_from_norms(nm: Norms, params: ProblemParams) -> float:
    return 0.5 * nm.grad2 + nm.gradq / params.q - params.alpha * nm.lp / params.p


def q_from_norms(nm: Norms, params: ProblemParams) -> float:
    N, q, p, a = params.N, params.q, params.p, params.alpha
    return (nm.grad2 + ((N + 2.0) * q / 2.0 - N) / q * nm.gradq
            - a * N / p * (p / 2.0 - 1.0) * nm.lp)


def pohozaev_from_norms(nm: Norms, params: ProblemParams, lam: float) -> float:
    N, q, p, a = params.N, params.q, params.p, params.alpha
    return ((N - 2.0) / 2.0 * nm.grad2 + (N - q) / q * nm.gradq
            + N * lam / 2.0 * nm.mass - N * a / p * nm.lp)


def multiplier_from_norms(nm: Norms, params: ProblemParams) -> float:
    if not nm.mass > 0:
        raise FunctionalError("Lagrange multiplier undefined for zero mass")
    return (params.alpha * nm.lp - nm.K) / nm.mass


def energy(u: RadialFn, params: ProblemParams) -> float:
    """``E(u) = ||grad u||_2^2/2 + ||grad u||_q^q/q - alpha ||u||_p^p/p``."""
    return _finite("E", energy_from_norms(norms(u, params), params))


def q_functional(u: RadialFn, params: ProblemParams) -> float:
    """Derivative of ``theta -> E(u_theta)`` at theta = 1; vanishes on solutions."""
    return _finite("Q", q_from_norms(norms(u, params), params))


def pohozaev(u: RadialFn, params: ProblemParams, lam: float) -> float:
    return _finite("P", pohozaev_from_norms(norms(u, params), params, lam))


def lagrange_multiplier(u: RadialFn, params: ProblemParams) -> float:
    """lambda obtained by testing the equation against u itself."""
    return _finite("lambda", multiplier_from_norms(norms(u, params), params))


def _spread(flux: np.ndarray, n: int) -> np.ndarray:
    out = np.zeros(n)
    out[1:] += flux
    out[:-1] -= flux
    return out


def energy_gradient(u: RadialFn, params: ProblemParams) -> np.ndarray:
    """Euclidean gradient of the discrete energy with respect to the nodal values."""
    g = u.grid
    d = u.derivative()
    flux = (d + np.abs(d) ** (params.q - 2.0) * d) * (g.cell_measure / g.h)
    out = _spread(flux, g.n)
    v = u.values
    out -= params.alpha * g.weights * np.abs(v) ** (params.p - 2.0) * v
    return out


def term_gradients(u: RadialFn, params: ProblemParams) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Euclidean gradients of grad2, gradq and lp separately."""
    g = u.grid
    d = u.derivative()
    ch = g.cell_measure / g.h
    q, p = params.q, params.p
    dg2 = _spread(2.0 * d * ch, g.n)
    dgq = _spread(q * np.abs(d) ** (q - 2.0) * d * ch, g.n)
    v = u.values
    dlp = p * g.weights * np.abs(v) ** (p - 2.0) * v
    return dg2, dgq, dlp


def first_variation(u: RadialFn, params: ProblemParams) -> RadialFn:
    """Representer of dE(u) in the quadrature inner product ``<f, g> = sum(w f g)``.

    This is the discrete counterpart of ``-Lap u - Lap_q u - alpha |u|^{p-2} u``
    and is the exact gradient of the discrete energy, so directional
    derivatives agree with finite differences to rounding.
    """
    grad = energy_gradient(u, params)
    return u.with_values(grad / u.grid.weights)


def inner(f: RadialFn, g: RadialFn) -> float:
    return float(np.dot(f.grid.weights, f.values * g.values))


def quotient_exponents(params: ProblemParams) -> tuple[float, float]:
    """Exponents (k_q, k_p) with ``J = grad2 * gradq^k_q / lp^k_p``."""
    tab = gn_exponents(params)
    a, b = tab.a_grad_q, tab.b_lp
    if a == b:
        raise FunctionalError("J undefined: q(1+delta_q) equals p*delta_p")
    return (b - 2.0) / (a - b), (a - 2.0) / (a - b)


def quotient_from_norms(nm: Norms, params: ProblemParams) -> float:
    kq, kp = quotient_exponents(params)
    if not (nm.lp > 0 and nm.gradq > 0):
        raise FunctionalError("J undefined: needs ||u||_p > 0 and ||grad u||_q > 0")
    return nm.grad2 * nm.gradq ** kq / nm.lp ** kp


def quotient_J(u: RadialFn, params: ProblemParams) -> float:
    return _finite("J", quotient_from_norms(norms(u, params), params))


@dataclass(frozen=True)
class EnergyReport:
    E: float
    K: float
    Q: float
    grad2: float
    gradq: float
    mass: float
    lp: float
    lam: float
    pohozaev: float

    def to_record(self, params: ProblemParams | None = None) -> dict:
        rec = asdict(self)
        rec["lambda"] = rec.pop("lam")
        if params is not None:
            rec["params"] = params.as_dict()
        return rec

    def to_json(self, params: ProblemParams | None = None) -> str:
        return json.dumps(self.to_record(params), sort_keys=True)

    @classmethod
    def from_record(cls, rec: dict) -> "EnergyReport":
        fields = {k: rec[k] for k in ("E", "K", "Q", "grad2", "gradq", "mass", "lp", "pohozaev")}
        return cls(lam=rec["lambda"], **fields)

    @property
    def q_residual(self) -> float:
        return abs(self.Q) / self.K if self.K > 0 else math.inf

    @property
    def pohozaev_residual(self) -> float:
        scale = self.K + abs(self.lam) * self.mass
        return abs(self.pohozaev) / scale if scale > 0 else math.inf


def report(u: RadialFn, params: ProblemParams, lam: float | None = None) -> EnergyReport:
    nm = norms(u, params)
    if lam is None:
        lam = multiplier_from_norms(nm, params)
    return EnergyReport(
        E=energy_from_norms(nm, params),
        K=nm.K,
        Q=q_from_norms(nm, params),
        grad2=nm.grad2,
        gradq=nm.gradq,
        mass=nm.mass,
        lp=nm.lp,
        lam=float(lam),
        pohozaev=pohozaev_from_norms(nm, params, lam),
    )
