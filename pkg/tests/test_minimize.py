from __future__ import annotations

import json

import numpy as np
import pytest

from qlap.functionals import norms, q_from_norms
from qlap.minimize import (
    MinimizeError,
    MinimizeOptions,
    Status,
    estimate_d1,
    estimate_gn_constant,
    estimate_rho_hat,
    global_minimize,
    gn_ratio,
    local_sweep,
    minimize_quotient,
    mountain_pass_estimate,
    project_sphere,
)
from qlap.params import ParameterError, ProblemParams
from qlap.radial import RadialGrid, lp_norm_pow, load_csv
from qlap.scaling import alpha0_for_profile, alpha0_from_d

SUB = ProblemParams(N=1, q=3, p=4.5, alpha=50.0, m=1.0)
MID = ProblemParams(N=1, q=3, p=7.5, alpha=1.0, m=1.0)


@pytest.fixture(scope="module")
def sub_min():
    return global_minimize(SUB)


def test_options_validation():
    with pytest.raises(ParameterError):
        MinimizeOptions(step_shrink=1.5)
    with pytest.raises(ParameterError):
        MinimizeOptions(n=4)
    assert MinimizeOptions(tol_grad=1e-6).tol_neg == pytest.approx(1e-5)


def test_project_sphere():
    g = RadialGrid.uniform(8.0, 129, 2)
    u = project_sphere(g.sample(lambda r: np.exp(-r)), 3.0)
    assert lp_norm_pow(u, 2) == pytest.approx(3.0, rel=1e-13)
    with pytest.raises(MinimizeError):
        project_sphere(g.fn(np.zeros(129)), 1.0)


def test_global_minimizer_is_a_constrained_critical_point(sub_min):
    res = sub_min
    assert res.status is Status.CONVERGED
    assert lp_norm_pow(res.u, 2) == pytest.approx(1.0, rel=1e-10)
    assert res.energy < 0 and res.lam > 0
    assert res.diagnostics["q_residual"] < 1e-3
    assert res.diagnostics["pohozaev_residual"] < 1e-3
    # radially decreasing and nonnegative
    v = res.u.values
    assert np.all(v >= -1e-10 * v.max())
    assert np.all(np.diff(v) <= 1e-10 * v.max())


def test_minimizer_round_trip(sub_min, tmp_path):
    js, cs = sub_min.save(tmp_path / "run", SUB)
    rec = json.loads(open(js).read())
    assert rec["status"] == "Converged" and rec["params"]["alpha"] == 50.0
    assert np.array_equal(load_csv(cs).values, sub_min.u.values)


def test_vanishing_infimum_is_reported():
    res = global_minimize(MID.replace(alpha=1e-3))
    assert res.status is Status.VANISHING


def test_global_minimize_guards():
    with pytest.raises(ParameterError):
        global_minimize(ProblemParams(N=1, q=3, p=10.0, alpha=1.0))
    with pytest.raises(ParameterError):
        global_minimize(ProblemParams(N=1, q=3, p=4.5, alpha=0.0))


def test_quotient_minimum_beats_every_profile():
    qres = minimize_quotient(MID)
    g = RadialGrid.uniform(16.0, 1025, 1)
    for f in (lambda r: np.exp(-r * r), lambda r: 1 / np.cosh(r), lambda r: (1 + r * r) ** -2):
        assert alpha0_for_profile(project_sphere(g.sample(f), 1.0), MID) >= alpha0_from_d(qres.d, MID) * (1 - 1e-6)


def test_d_scale_free_in_alpha():
    assert estimate_d1(MID) == pytest.approx(estimate_d1(MID.replace(alpha=7.0)), rel=1e-12)


def test_rho_hat_certifies_small_K_region():
    rho = estimate_rho_hat(MID.replace(alpha=14.0))
    assert rho > 0
    assert estimate_rho_hat(SUB) == 0.0
    g = RadialGrid.uniform(40.0, 2049, 1)
    u = project_sphere(g.sample(lambda r: np.exp(-r * r / 50)), 1.0)
    nm = norms(u, MID.replace(alpha=14.0))
    if nm.K <= rho:
        assert q_from_norms(nm, MID.replace(alpha=14.0)) >= 0.5 * nm.K


def test_gn_constant_oracle():
    # in one dimension with r = 2, p = 4 the sharp constant is 3^(-1/8)
    params = ProblemParams(N=1, q=3, p=4)
    c = estimate_gn_constant(params, 2.0)
    assert c <= 3 ** -0.125 * (1 + 1e-3)
    assert c >= 3 ** -0.125 * (1 - 1e-3)
    g = RadialGrid.uniform(30.0, 1025, 1)
    assert gn_ratio(g.sample(lambda r: np.exp(-r * r)), params, 2.0) < c


def test_mountain_pass_rejects_endpoint_maximum():
    g = RadialGrid.uniform(20.0, 513, 1)
    u = g.sample(lambda r: np.exp(-r * r))
    with pytest.raises(MinimizeError):
        mountain_pass_estimate(MID.replace(alpha=20.0), u, u, rho=1e-6)


def test_local_sweep_keeps_order_and_loses_branch():
    params = MID.replace(m=1.0)
    sweep = local_sweep(params, [13.0, 14.55, 14.3])
    assert [a for a, _ in sweep] == [14.55, 14.3, 13.0]
    assert sweep[0][1] is not None and sweep[0][1].energy > 0
    assert sweep[-1][1] is None
