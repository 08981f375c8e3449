from __future__ import annotations

import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from qlap.params import (
    UNBOUNDED,
    CertificateKind,
    ParameterError,
    ProblemParams,
    RegimeKind,
    classify_regime,
    decay_iteration,
    delta,
    gn_exponents,
    liouville_certificate,
    mass_critical_exponents,
    nu,
    require_coercive,
    require_intermediate,
    sobolev_exponent,
    zero_mass_eligible,
)


# hand-computed oracles
def test_critical_exponents_oracle():
    assert mass_critical_exponents(1, 3.0) == (6.0, 9.0)
    assert mass_critical_exponents(3, 3.0) == pytest.approx((2 + 4 / 3, 5.0))


def test_sobolev_exponent_oracle():
    assert sobolev_exponent(3, 2.0) == 6.0
    assert sobolev_exponent(5, 4.0) == 20.0
    assert sobolev_exponent(2, 2.0) is UNBOUNDED
    assert sobolev_exponent(1, 3.0) > 1e300


def test_gn_exponents_oracle():
    tab = gn_exponents(ProblemParams(N=1, q=3, p=7.5))
    # delta_q = 1/6, delta_p = 11/30
    assert tab.delta_q == pytest.approx(1 / 6)
    assert tab.delta_p == pytest.approx(11 / 30)
    assert tab.a_grad_q == pytest.approx(3.5)
    assert tab.b_lp == pytest.approx(2.75)
    # 2* is unbounded in one dimension, so both GN exponents exist
    assert tab.nu_p2 == pytest.approx(0.5 * 5.5 / 7.5)
    assert tab.nu_pq == pytest.approx(3 / 7 * 5.5 / 7.5)
    assert gn_exponents(ProblemParams(N=3, q=3, p=7.0)).nu_p2 is None


def test_nu_formula_and_domain():
    assert nu(3, 4.0, 2.0) == pytest.approx(3 * 2 / (2 * 5 - 6) * 0.5)
    with pytest.raises(ParameterError):
        nu(3, 4.0, 1.0)


@pytest.mark.parametrize("N,q,p,kind", [
    (1, 3, 4.5, RegimeKind.SUBCRITICAL),
    (1, 3, 6.0, RegimeKind.MASS_CRITICAL_LOWER),
    (1, 3, 7.5, RegimeKind.INTERMEDIATE),
    (1, 3, 9.0, RegimeKind.MASS_CRITICAL_UPPER),
    (1, 3, 10.0, RegimeKind.SUPERCRITICAL),
])
def test_classify_regime(N, q, p, kind):
    assert classify_regime(ProblemParams(N=N, q=q, p=p)).kind is kind


def test_require_guards():
    with pytest.raises(ParameterError, match="Subcritical"):
        require_intermediate(ProblemParams(N=1, q=3, p=4.5))
    require_coercive(ProblemParams(N=1, q=3, p=4.5))
    with pytest.raises(ParameterError):
        require_coercive(ProblemParams(N=1, q=3, p=9.0))


@pytest.mark.parametrize("kw", [dict(N=0, q=3, p=4), dict(N=1, q=2, p=4), dict(N=1, q=3, p=2),
                                dict(N=1, q=3, p=4, m=0), dict(N=1, q=3, p=4, alpha=-1),
                                dict(N=1.5, q=3, p=4), dict(N=1, q=3, p=math.inf)])
def test_problem_params_validation(kw):
    with pytest.raises(ParameterError):
        ProblemParams(**kw)


def test_zero_mass_eligibility():
    assert zero_mass_eligible(5, 4.0, 4.0)
    assert not zero_mass_eligible(3, 4.0, 3.0)  # p below 2* = 6
    assert not zero_mass_eligible(2, 4.0, 3.0)


def test_liouville_cases():
    assert liouville_certificate(3, 4.0, 3.0).kind is CertificateKind.POHOZAEV
    assert liouville_certificate(5, 4.0, 4.0).kind is CertificateKind.NOT_CERTIFIED
    assert liouville_certificate(4, 5.0, 3.9).certified


def test_decay_iteration_oracle():
    tr = decay_iteration(5, 3.5)
    assert tr.values == [1.5, 1.75, 2.375, 3.9375]
    assert tr.steps == 3
    assert tr.final == 3.9375
    with pytest.raises(ParameterError):
        decay_iteration(5, 3.0)  # p below 2* = 10/3
    with pytest.raises(ParameterError):
        decay_iteration(2, 5.0)


@given(N=st.integers(1, 6), q=st.floats(2.05, 8.0))
def test_critical_exponent_ordering(N, q):
    p2, pq = mass_critical_exponents(N, q)
    assert pq > p2 * (q / 2) - 1e-12
    # inside the window the fiber exponents satisfy 2 < b < a
    p = 0.5 * (p2 + pq)
    tab = gn_exponents(ProblemParams(N=N, q=q, p=p))
    assert 2 < tab.b_lp < tab.a_grad_q


@given(N=st.integers(3, 8), t=st.floats(0.01, 0.99))
def test_decay_iteration_terminates_at_target(N, t):
    two_star = 2 * N / (N - 2)
    p = two_star + t * 4
    tr = decay_iteration(N, p)
    assert tr.values[0] == (N - 2) / 2
    assert tr.final >= N - 2
    assert all(b > a for a, b in zip(tr.values, tr.values[1:]))
    assert len(tr.values) == tr.steps + 1


@given(N=st.integers(1, 6), s=st.floats(2.0, 10.0))
def test_delta_identity(N, s):
    assert s * delta(N, s) == pytest.approx(N * (s - 2) / 2)
