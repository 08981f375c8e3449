from __future__ import annotations

import json
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlap.params import ParameterError, ProblemParams
from qlap.radial import lp_norm_pow
from qlap.shoot import (
    GroundStateNotFound,
    Kind,
    ShootConfig,
    TailError,
    decay_fit,
    find_ground_state,
    first_integral,
    fit_tail,
    ode_rhs,
    rk4_fixed,
    scan_brackets,
    shoot,
    to_radial,
    zero_mass_solution,
)

P1 = ProblemParams(N=1, q=3, p=4.5, alpha=1.0)


@pytest.fixture(scope="module")
def ground_1d():
    return find_ground_state(P1, 1.0)


def test_ode_rhs_oracle():
    # at u' = 0 the radial term vanishes: u'' = lambda u - alpha u^{p-1}
    assert ode_rhs(0.5, 2.0, 0.0, P1, 1.0) == pytest.approx(2.0 - 2.0 ** 3.5)
    with pytest.raises(ValueError):
        ode_rhs(0.0, 1.0, 0.0, P1, 1.0)


def test_first_integral_oracle():
    # F = v^2/2 + (q-1)/q |v|^q - lambda u^2/2 + alpha/p |u|^p
    F = first_integral(1.0, 2.0, P1, 1.0)
    assert F == pytest.approx(2.0 + 2 / 3 * 8 - 0.5 + 1 / 4.5)


def test_exact_one_dimensional_amplitude(ground_1d):
    exact = (P1.p / 2.0) ** (1 / (P1.p - 2))
    assert ground_1d.u0 == pytest.approx(exact, rel=1e-8)
    assert ground_1d.decaying
    assert ground_1d.pohozaev_residual < 1e-4
    assert ground_1d.extras["multiplier_rel_error"] < 1e-4


def test_classification_around_ground_state(ground_1d):
    u0 = ground_1d.u0
    above = shoot(ShootConfig(lam=1.0, u0=1.01 * u0, r_max=40.0), P1)
    below = shoot(ShootConfig(lam=1.0, u0=0.99 * u0, r_max=40.0), P1)
    assert above.classification.kind is Kind.CROSSING
    assert below.classification.kind is Kind.DIVERGING
    assert below.classification.reason == "turned"


def test_rk4_fourth_order():
    params = ProblemParams(N=1, q=3, p=4.5)
    ref = rk4_fixed(params, 1.0, 2.0, 2.0, 6400)[0]
    e1 = abs(rk4_fixed(params, 1.0, 2.0, 2.0, 100)[0] - ref)
    e2 = abs(rk4_fixed(params, 1.0, 2.0, 2.0, 200)[0] - ref)
    # asymptotic ratio is 16; anything above 12 rules out third order
    assert e1 / e2 > 12


def test_bracket_labels_stable_under_tolerance():
    base, labels = scan_brackets(P1, 1.0, ShootConfig(lam=1.0, tol_step=1e-12))
    assert len(base) == 1 and base[0][0] < 1.3831618672 < base[0][1]
    for f in (0.9, 1.1):
        again, relabel = scan_brackets(P1, 1.0, ShootConfig(lam=1.0, tol_step=1e-12 * f))
        assert again == base and relabel == labels


def test_mapped_profile_keeps_mass(ground_1d):
    u = to_radial(ground_1d)
    assert lp_norm_pow(u, 2) == pytest.approx(ground_1d.l2_mass, rel=1e-4)


def test_records_are_json(ground_1d, tmp_path):
    rec = json.loads(ground_1d.to_json())
    assert rec["classification"] == "Decaying"
    text = ground_1d.trajectory_csv(tmp_path / "t.csv")
    assert text.splitlines()[0] == "r,u,du,F"


def test_decay_fit_needs_decaying():
    res = shoot(ShootConfig(lam=1.0, u0=3.0, r_max=20.0), P1)
    with pytest.raises(TailError):
        decay_fit(res)


def test_fit_tail_power_law_and_exponential():
    r = np.geomspace(1, 1e4, 400)
    s, c, w = fit_tail(r, 5 * r ** -3.0)
    assert s == pytest.approx(-3.0, abs=1e-10)
    assert c == pytest.approx(math.log(5))
    assert fit_tail(np.linspace(1, 60, 400), np.exp(-np.linspace(1, 60, 400)), floor=1e-40).super_polynomial
    with pytest.raises(TailError):
        fit_tail(np.linspace(1, 2, 50), np.ones(50))


def test_zero_mass_refuses_ineligible():
    with pytest.raises((ParameterError, GroundStateNotFound)):
        zero_mass_solution(ProblemParams(N=3, q=3, p=4))


@given(N=st.integers(2, 5), u0=st.floats(0.3, 3.0), lam=st.sampled_from([0.0, 0.5, 1.0]))
def test_first_integral_never_increases(N, u0, lam):
    res = shoot(ShootConfig(lam=lam, u0=u0, r_max=15.0), ProblemParams(N=N, q=3, p=4.5))
    rise = np.max(res.F - np.minimum.accumulate(res.F))
    assert rise <= 1e-8 * max(abs(res.F[0]), res.F_scale)


@given(u0=st.floats(0.3, 3.0), lam=st.floats(0.2, 2.0))
def test_first_integral_conserved_in_one_dimension(u0, lam):
    res = shoot(ShootConfig(lam=lam, u0=u0, r_max=15.0), P1)
    assert res.F_drift < 1e-8


@given(u0=st.floats(0.2, 5.0))
def test_shoot_starts_at_u0(u0):
    res = shoot(ShootConfig(lam=1.0, u0=u0, r_max=5.0), ProblemParams(N=3, q=3, p=4))
    assert res.u[0] == pytest.approx(u0, rel=1e-9)
    # series start: u'(eps) = c eps with c = (lambda u0 - alpha u0^(p-1)) / N
    c = (u0 - u0 ** 3) / 3
    assert 0 < res.r[0] <= 5e-6
    assert res.v[0] == pytest.approx(c * res.r[0], rel=1e-9, abs=1e-300)
