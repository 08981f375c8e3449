"""Normalized solutions of -Lap u - Lap_q u + lambda u = alpha |u|^{p-2} u on radial grids."""

from .params import (
    UNBOUNDED,
    CertificateKind,
    ParameterError,
    ProblemParams,
    RegimeKind,
    classify_regime,
    decay_iteration,
    gn_exponents,
    liouville_certificate,
    mass_critical_exponents,
)
from .radial import RadialFn, RadialGrid, grad_norm_pow, integrate, lp_norm_pow, rearrange_decreasing
from .functionals import (
    EnergyReport,
    energy,
    first_variation,
    lagrange_multiplier,
    pohozaev,
    q_functional,
    quotient_J,
    report,
)
from .scaling import ThresholdReport, alpha0_from_d, fiber_argmin, fiber_psi, theta_scale
from .minimize import (
    MinimizeOptions,
    MinimizeResult,
    Status,
    alpha0_bisect,
    estimate_d1,
    global_minimize,
    local_minimize,
    mountain_pass_estimate,
)
from .shoot import ShootConfig, ShootResult, decay_fit, find_ground_state, ode_rhs, shoot

__all__ = [
    "UNBOUNDED", "CertificateKind", "ParameterError", "ProblemParams", "RegimeKind",
    "classify_regime", "decay_iteration", "gn_exponents", "liouville_certificate",
    "mass_critical_exponents", "RadialFn", "RadialGrid", "grad_norm_pow", "integrate",
    "lp_norm_pow", "rearrange_decreasing", "EnergyReport", "energy", "first_variation",
    "lagrange_multiplier", "pohozaev", "q_functional", "quotient_J", "report",
    "ThresholdReport", "alpha0_from_d", "fiber_argmin", "fiber_psi", "theta_scale",
    "MinimizeOptions", "MinimizeResult", "Status", "alpha0_bisect", "estimate_d1",
    "global_minimize", "local_minimize", "mountain_pass_estimate",
    "ShootConfig", "ShootResult", "decay_fit", "find_ground_state", "ode_rhs", "shoot",
]
