import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosegp.condensate import (
    coupling,
    fbec,
    fluctuation_free_energy,
    large_deviation_fraction,
    log_erfcx_neg,
    moment,
    moment_ratios,
    solve_condensate_mu,
    upsilon,
)
from bosegp.errors import ContractError
from bosegp.oracle import condensate_quadrature

# mpmath (30 digits) integrals of y^k exp(-y^2 + 2 eta y), split at the peak
UPSILON_REF = {
    -10.0: 0.08775783851938331,
    -2.5: 0.31255517761303908,
    0.0: 1.0,
    1.5: 2.7122889085331053,
    30.0: 53.173615527165481,
}

# mpmath integrals of exp(-beta (h x^2 - mu x)) at beta = 0.7, h = 0.3, mu = 1.1
MPMATH_CASE = dict(beta=0.7, h=0.3, mu=1.1)
MPMATH_LOGZ = 1.933650347029585
MPMATH_MOMENTS = [1.0, 2.1776650549169508, 6.3733383149667907, 22.054287172281739, 85.956704922755502]
MPMATH_ENTROPY = 1.595249300886559


@pytest.mark.parametrize("eta", sorted(UPSILON_REF))
def test_upsilon_against_mpmath(eta):
    assert upsilon(eta) == pytest.approx(UPSILON_REF[eta], rel=1e-13)


def test_upsilon_monotone_and_limits():
    etas = np.linspace(-300.0, 300.0, 2001)
    ups = np.array([upsilon(e) for e in etas])
    assert np.all(np.diff(ups) > 0)
    assert ups[0] == pytest.approx(math.sqrt(math.pi) / (2 * 300.0), rel=1e-4)
    assert ups[-1] == pytest.approx(math.sqrt(math.pi) * 300.0, rel=1e-4)


def test_no_overflow_for_large_eta():
    for eta in (-5000.0, -1000.0, 1000.0, 5000.0):
        r = moment_ratios(eta, 4)
        assert np.all(np.isfinite(r)) and np.all(r > 0)
        assert math.isfinite(log_erfcx_neg(eta))


def test_mpmath_case():
    c = MPMATH_CASE
    s = math.sqrt(c["beta"] * c["h"])
    eta = c["mu"] * math.sqrt(c["beta"] / (4 * c["h"]))
    model = solve_condensate_mu(c["beta"], c["h"], moment_ratios(eta, 1)[1] / s)
    assert model.mu == pytest.approx(c["mu"], rel=1e-12)
    assert model.log_Z == pytest.approx(MPMATH_LOGZ, rel=1e-13)
    assert model.entropy == pytest.approx(MPMATH_ENTROPY, rel=1e-12)
    for k in range(5):
        assert moment(k, model) == pytest.approx(MPMATH_MOMENTS[k], rel=1e-13)


@given(
    st.floats(min_value=-2.0, max_value=1.0),
    st.floats(min_value=-3.0, max_value=1.0),
    st.floats(min_value=-2.0, max_value=4.0),
)
@settings(max_examples=30, deadline=None)
def test_round_trip_mean(log_beta, log_h, log_M):
    beta, h, M = 10**log_beta, 10**log_h, 10**log_M
    model = solve_condensate_mu(beta, h, M)
    assert model.moments(1)[1] == pytest.approx(M, rel=1e-11)


@given(
    st.floats(min_value=-1.5, max_value=1.0),
    st.floats(min_value=-2.0, max_value=1.0),
    st.floats(min_value=-1.0, max_value=2.5),
)
@settings(max_examples=15, deadline=None)
def test_closed_forms_against_quadrature(log_beta, log_h, log_M):
    beta, h, M = 10**log_beta, 10**log_h, 10**log_M
    model = solve_condensate_mu(beta, h, M)
    q = condensate_quadrature(beta, h, model.mu, kmax=4)
    m = model.moments(4)
    for k in range(5):
        assert m[k] == pytest.approx(q.moments[k], rel=1e-9)
    assert model.log_Z == pytest.approx(q.log_Z, rel=1e-9, abs=1e-12)
    assert model.entropy == pytest.approx(q.entropy, rel=1e-9, abs=1e-12)


def test_zero_coupling_branch():
    beta, M = 0.4, 25.0
    model = solve_condensate_mu(beta, 0.0, M)
    assert model.free_energy == pytest.approx(-(math.log(M) + 1) / beta, rel=1e-15)
    assert model.mu == pytest.approx(-1 / (beta * M), rel=1e-15)
    assert model.variance == M**2
    assert list(model.moments(3)) == [1.0, M, 2 * M**2, 6 * M**3]
    assert fbec(beta, M, 1.0, 0.0) == model.free_energy


def test_small_coupling_approaches_exponential():
    beta, M = 0.4, 25.0
    model = solve_condensate_mu(beta, 1e-10, M)
    assert model.free_energy == pytest.approx(-(math.log(M) + 1) / beta, rel=1e-6)


def test_variance_positive_and_below_exponential():
    for M in (0.5, 10.0, 1e4):
        model = solve_condensate_mu(1.0, 0.01, M)
        assert 0 < model.variance < M * M


def test_large_mass_free_energy():
    # F ~ h M^2 + ln(beta h / pi) / (2 beta) once eta >> 1
    beta, h, M = 2.0, 0.5, 1e3
    model = solve_condensate_mu(beta, h, M)
    expected = h * M * M + math.log(beta * h / math.pi) / (2 * beta)
    assert model.free_energy == pytest.approx(expected, rel=1e-12)


def test_fluctuation_energy_limits():
    beta, h = 1.0, 0.5
    for M in (10.0, 30.0, 100.0):
        fl = fluctuation_free_energy(solve_condensate_mu(beta, h, M))
        assert abs(fl.lhs - fl.rhs_4) < 1e-6
        assert fl.rhs_16 - fl.rhs_4 == pytest.approx(math.log(2.0) / beta, rel=1e-14)


def test_fluctuation_regime_flag():
    model = solve_condensate_mu(1.0, 0.5, 1e5)
    assert fluctuation_free_energy(model, N=1e5).in_regime
    assert not fluctuation_free_energy(model, N=1e7).in_regime


def test_large_deviation_fraction_limits():
    model = solve_condensate_mu(1.0, 0.01, 50.0)
    assert large_deviation_fraction(model, 0.0) == pytest.approx(1.0, rel=1e-12)
    fr = [large_deviation_fraction(model, x) for x in (10.0, 50.0, 100.0, 200.0)]
    assert all(np.diff(fr) < 0) and fr[-1] < 1e-6


def test_large_deviation_fraction_against_quadrature():
    from scipy import integrate

    beta, h = 1.0, 0.01
    model = solve_condensate_mu(beta, h, 20.0)
    w = lambda x: (1 + x) * math.exp(-beta * (h * x * x - model.mu * x) - 10.0)
    full = integrate.quad(w, 0, np.inf, epsabs=0, epsrel=1e-13)[0]
    part = integrate.quad(w, 30.0, np.inf, epsabs=0, epsrel=1e-13)[0]
    assert large_deviation_fraction(model, 30.0) == pytest.approx(part / full, rel=1e-9)


def test_coupling_and_contracts():
    assert coupling(0.25, 2.0) == pytest.approx(math.pi / 8.0)
    with pytest.raises(ContractError):
        solve_condensate_mu(1.0, -0.1, 1.0)
    with pytest.raises(ContractError):
        solve_condensate_mu(1.0, 0.1, 0.0)
    with pytest.raises(ContractError):
        moment(-1, solve_condensate_mu(1.0, 0.1, 1.0))
