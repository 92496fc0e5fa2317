import math

import pytest

from bosegp.errors import ContractError
from bosegp.free_energy import (
    GasParameters,
    corollary_bound,
    error_scale,
    hierarchy,
    solve_scattering,
    upper_bound,
)
from bosegp.ideal_gas import critical_beta, ideal_gas
from bosegp.scattering import PotentialSpec

from conftest import A_SQUARE_WELL


@pytest.fixture(scope="module")
def sol6(scattering_cache):
    return scattering_cache(1e6)


def params(kappa, N=1e6, v=None):
    return GasParameters(N=N, kappa=kappa, potential=v or PotentialSpec.square_well(2.0, 1.0))


def test_parameters_derive_beta_and_kappa():
    p = GasParameters(N=1e5, kappa=2.0, potential=PotentialSpec.zero())
    assert p.beta == pytest.approx(2 * critical_beta(1e5, 1.0), rel=1e-15)
    q = GasParameters(N=1e5, beta=p.beta, potential=PotentialSpec.zero())
    assert q.kappa == pytest.approx(2.0, rel=1e-15)
    assert p.ell == 0.25


def test_parameter_contracts():
    with pytest.raises(ContractError):
        GasParameters(N=1e5)
    with pytest.raises(ContractError):
        GasParameters(N=1e5, kappa=1.0, beta=1.0)
    with pytest.raises(ContractError):
        GasParameters(N=1e5, kappa=-1.0)
    with pytest.raises(ContractError):
        GasParameters(N=1e5, kappa=1.0, ell=0.6)
    with pytest.raises(ContractError):
        solve_scattering(GasParameters(N=1e5, kappa=1.0))


def test_zero_potential_reduces_to_ideal_gas():
    p = GasParameters(N=1e5, kappa=2.0, potential=PotentialSpec.zero())
    b = upper_bound(p)
    ideal = ideal_gas(p.beta, p.N, p.L)
    assert b.interaction == 0.0 and b.bogo_corr == 0.0
    assert b.branch == "ideal"
    assert b.total == ideal.F0_plus + ideal.F0_bec
    assert b.total == pytest.approx(ideal.F0, rel=1e-15)


def test_reference_interaction_term(sol6):
    b = upper_bound(params(2.0), sol6)
    assert b.a == pytest.approx(A_SQUARE_WELL, abs=1e-12)
    assert b.interaction == pytest.approx(8 * math.pi * A_SQUARE_WELL * 1e6, rel=1e-12)
    assert b.interaction == pytest.approx(5.99e6, rel=1e-3)


def test_total_is_exact_assembly(sol6):
    b = upper_bound(params(2.0), sol6)
    assert b.total == b.F0_plus + b.interaction + min(b.Fbec, b.F0_bec) + b.bogo_corr
    assert b.bogo_corr <= 0
    assert b.error_scale == pytest.approx(1e6 ** (7 / 12), rel=1e-14)


@pytest.mark.parametrize("kappa,branch", [(0.3, "ideal"), (0.5, "ideal"), (0.8, "ideal"),
                                          (1.5, "interacting"), (2.0, "interacting"), (4.0, "interacting")])
def test_branch_selection(sol6, kappa, branch):
    assert upper_bound(params(kappa), sol6).branch == branch


def test_hierarchy_at_reference(sol6):
    h = hierarchy(upper_bound(params(2.0), sol6))
    assert h.ordered
    r_F, r_int, _ = h.ratios
    assert r_F > 100 and r_int > 100


def test_corollary_below_critical(sol6):
    p = params(0.5)
    c = corollary_bound(p, sol6)
    ideal = ideal_gas(p.beta, p.N, p.L)
    assert c.form == "below"
    assert c.total == pytest.approx(ideal.F0 + 8 * math.pi * A_SQUARE_WELL * 1e6, rel=1e-14)
    assert c.error_scale == pytest.approx(1e3, rel=1e-14)


def test_corollary_above_critical_matches_theorem(sol6):
    p = params(2.0)
    thm = upper_bound(p, sol6)
    c = corollary_bound(p, sol6)
    assert c.form == "above"
    # both agree within the remainder of the large-mass expansion
    assert abs(c.total - thm.total) <= 1e-6 * thm.error_scale


def test_corollary_routes_near_critical(sol6):
    c = corollary_bound(params(1.02), sol6)
    assert c.form == "critical" and c.near_critical
    thm = upper_bound(params(1.02), sol6)
    assert c.total == thm.total


def test_corollary_large_kappa_coefficient(sol6):
    c = corollary_bound(params(50.0), sol6)
    rho = 1e6
    coeff = (c.total - c.F0_plus - c.log_term - c.bogo_corr) / (4 * math.pi * c.a_N * rho**2)
    assert coeff == pytest.approx(2 - (c.rho0 / rho) ** 2, rel=1e-12)
    assert coeff == pytest.approx(1.0, abs=0.01)


def test_total_nondecreasing_in_strength():
    # within a fixed branch (kappa = 2 stays interacting)
    totals = []
    for v0 in (0.5, 1.0, 2.0, 4.0):
        p = GasParameters(N=1e5, kappa=2.0, potential=PotentialSpec.square_well(v0, 1.0))
        totals.append(upper_bound(p).total)
    assert all(b >= a for a, b in zip(totals, totals[1:]))


def test_error_scale():
    assert error_scale(1e6, 2.0) == pytest.approx(1e6 ** (7 / 12) / 4, rel=1e-15)
