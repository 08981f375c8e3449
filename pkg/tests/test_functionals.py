from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlap.functionals import (
    EnergyReport,
    FunctionalError,
    energy,
    first_variation,
    inner,
    lagrange_multiplier,
    multiplier_from_norms,
    norms,
    pohozaev_from_norms,
    q_from_norms,
    quotient_exponents,
    quotient_J,
    report,
)
from qlap.params import ProblemParams
from qlap.radial import RadialGrid
from qlap.scaling import dilation_energy, theta_scale
from qlap.verify import fd_gradient_error, random_profile

seeds = st.integers(0, 2 ** 32 - 1)


def _intermediate(N, t):
    q = 3.0
    p2, pq = 2 + 4 / N, q * (1 + 2 / N)
    return ProblemParams(N=N, q=q, p=p2 + t * (pq - p2), alpha=2.0)


def test_energy_of_zero():
    g = RadialGrid.uniform(5.0, 65, 2)
    assert energy(g.fn(np.zeros(65)), ProblemParams(N=2, q=3, p=4)) == 0.0


def test_energy_of_linear_profile_oracle():
    # u = 1 - r on [0, 1] in one dimension: grad2 = 2, gradq = 2, ||u||_p^p = 2/(p+1)
    g = RadialGrid.uniform(1.0, 4097, 1)
    u = g.sample(lambda r: 1 - r)
    params = ProblemParams(N=1, q=3, p=4, alpha=1.5)
    assert energy(u, params) == pytest.approx(1 + 2 / 3 - 1.5 * 0.4 / 4, rel=1e-7)


def test_quotient_exponents_oracle():
    # (N,q,p) = (1,3,7.5): a = 3.5, b = 2.75
    kq, kp = quotient_exponents(ProblemParams(N=1, q=3, p=7.5))
    assert kq == pytest.approx(0.75 / 0.75)
    assert kp == pytest.approx(1.5 / 0.75)


def test_multiplier_needs_mass():
    g = RadialGrid.uniform(5.0, 65, 1)
    with pytest.raises(FunctionalError):
        lagrange_multiplier(g.fn(np.zeros(65)), ProblemParams(N=1, q=3, p=4))


@given(seed=seeds, N=st.integers(1, 3))
def test_first_variation_matches_finite_differences(seed, N):
    rng = np.random.default_rng(seed)
    params = ProblemParams(N=N, q=float(rng.uniform(2.5, 4)), p=float(rng.uniform(2.5, 5)),
                           alpha=float(rng.uniform(0.5, 3)))
    u = random_profile(RadialGrid.uniform(12.0, 513, N), rng)
    assert fd_gradient_error(u, params, rng) < 1e-6


@given(seed=seeds, N=st.integers(1, 3), t=st.floats(0.05, 0.95))
def test_pohozaev_equals_minus_q_at_multiplier(seed, N, t):
    params = _intermediate(N, t)
    u = random_profile(RadialGrid.uniform(15.0, 257, N), np.random.default_rng(seed))
    nm = norms(u, params)
    lam = multiplier_from_norms(nm, params)
    assert abs(pohozaev_from_norms(nm, params, lam) + q_from_norms(nm, params)) <= 1e-10 * nm.K


@given(seed=seeds, N=st.integers(1, 3))
def test_testing_with_u_gives_nehari_combination(seed, N):
    params = ProblemParams(N=N, q=3, p=4, alpha=1.3)
    u = random_profile(RadialGrid.uniform(10.0, 257, N), np.random.default_rng(seed))
    nm = norms(u, params)
    assert inner(first_variation(u, params), u) == pytest.approx(nm.K - params.alpha * nm.lp, rel=1e-9)


@given(seed=seeds, s=st.floats(-0.3, 0.3))
def test_dilation_energy_matches_resampled_profile(seed, s):
    params = ProblemParams(N=2, q=3, p=4.5, alpha=1.0)
    g = RadialGrid.uniform(30.0, 4097, 2)
    u = random_profile(g, np.random.default_rng(seed))
    direct = energy(theta_scale(u, math.exp(s)), params)
    assert direct == pytest.approx(dilation_energy(norms(u, params), params, s), rel=1e-3, abs=1e-6)


@given(seed=seeds, theta=st.floats(0.7, 1.4), c=st.floats(0.5, 2.0))
def test_quotient_is_dilation_invariant(seed, theta, c):
    params = ProblemParams(N=1, q=3, p=7.5)
    g = RadialGrid.uniform(40.0, 4097, 1)
    u = random_profile(g, np.random.default_rng(seed))
    J = quotient_J(u, params)
    assert quotient_J(theta_scale(u, theta), params) == pytest.approx(J, rel=1e-3)


def test_report_round_trip():
    params = ProblemParams(N=1, q=3, p=4.5, alpha=2.0)
    u = RadialGrid.uniform(10.0, 257, 1).sample(lambda r: np.exp(-r * r))
    rep = report(u, params)
    again = EnergyReport.from_record(rep.to_record(params))
    assert again == rep
    assert rep.pohozaev_residual == pytest.approx(abs(rep.Q) / (rep.K + abs(rep.lam) * rep.mass))
