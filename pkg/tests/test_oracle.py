import math

import numpy as np
import pytest

from bosegp import bogoliubov as bg
from bosegp.errors import ContractError, ResolutionError
from bosegp.oracle import (
    condensate_quadrature,
    diagonal_contraction,
    lhy_quadrature,
    quadrature,
    truncated_fock_pair,
    wick_2pdm,
)

from test_bogoliubov import ALPHA_REF, GAMMA_REF


def test_quadrature_semi_infinite():
    r = quadrature(lambda x: np.exp(-x) * x**3, 0.0, math.inf)
    assert r.value == pytest.approx(6.0, rel=1e-13)


def test_quadrature_oscillatory_weight():
    # int_0^inf e^{-x} sin(2x) dx = 2/5
    r = quadrature(lambda x: math.exp(-x), 0.0, math.inf, weight="sin", wvar=2.0)
    assert r.value == pytest.approx(0.4, rel=1e-12)


def test_quadrature_rejects_nonfinite():
    with pytest.raises(ResolutionError):
        quadrature(lambda x: math.nan, 0.0, 1.0)


def test_fock_pair_reference_point():
    r = truncated_fock_pair(1.0, 0.0, 1.0, 1.5, 1.0, n_max=60)
    assert not r.inconclusive
    assert r.gamma == pytest.approx(GAMMA_REF, rel=1e-10)
    assert r.alpha == pytest.approx(ALPHA_REF, rel=1e-10)
    assert r.E0_pair == pytest.approx(-0.5, abs=1e-10)
    # spectrum E0 + eps (n_p + n_-p): -0.5, 1.5 (twice), 3.5 (three times), ...
    assert np.allclose(r.spectrum_head[:6], [-0.5, 1.5, 1.5, 3.5, 3.5, 3.5], atol=1e-9)


def test_fock_dense_and_block_agree():
    d = truncated_fock_pair(2.0, -0.1, 1.0, 0.7, 0.8, n_max=25, dense=True)
    b = truncated_fock_pair(2.0, -0.1, 1.0, 0.7, 0.8, n_max=25)
    assert np.allclose(d.spectrum_head, b.spectrum_head, atol=1e-11)
    assert d.gamma == pytest.approx(b.gamma, rel=1e-10)
    assert d.alpha == pytest.approx(b.alpha, rel=1e-10)


def test_fock_dense_size_limit():
    with pytest.raises(ContractError):
        truncated_fock_pair(1.0, 0.0, 1.0, 0.5, 1.0, n_max=40, dense=True)


def test_fock_truncation_flagged_when_too_small():
    # strongly squeezed, hot pair: 10 quanta are nowhere near enough
    r = truncated_fock_pair(1.0, 0.0, 1.0, 5.0, 0.05, n_max=10)
    assert r.inconclusive


@pytest.mark.parametrize("g_ratio", [0.0, 0.3, 1.0, 2.0])
def test_fock_matches_closed_forms(g_ratio):
    p2, mu0, rho0, beta = 1.7, -0.2, 1.3, 0.9
    Wp = g_ratio * (p2 - mu0) / rho0
    r = truncated_fock_pair(p2, mu0, rho0, Wp, beta)
    gamma, alpha = bg.occupations(p2, mu0, rho0, Wp, beta)
    assert r.gamma == pytest.approx(float(gamma), rel=1e-9, abs=1e-12)
    assert r.alpha == pytest.approx(float(alpha), rel=1e-9, abs=1e-12)
    assert r.E0_pair == pytest.approx(2 * bg.ground_shift(p2, mu0, rho0, Wp), rel=1e-9, abs=1e-12)


def _window():
    keys = [(0, 0, 0)] + [k for k in [(1, 0, 0), (-1, 0, 0), (0, 1, 0), (0, -1, 0), (1, 1, 0), (-1, -1, 0)]]
    gamma = {k: 0.1 * (1 + abs(k[0]) + 2 * abs(k[1])) for k in keys if any(k)}
    alpha = {k: -0.05 * (1 + abs(k[0]) + abs(k[1])) for k in keys if any(k)}
    return keys, gamma, alpha


def test_wick_condensate_block():
    keys, gamma, alpha = _window()
    z = (0, 0, 0)
    assert wick_2pdm(z, z, z, z, gamma, alpha, 3.0, 17.0) == 17.0
    u = (1, 0, 0)
    assert wick_2pdm(z, u, z, u, gamma, alpha, 3.0, 17.0) == pytest.approx(3.0 * gamma[u])
    assert wick_2pdm(z, z, u, (-1, 0, 0), gamma, alpha, 3.0, 17.0) == pytest.approx(3.0 * alpha[u])


def test_wick_momentum_conservation():
    keys, gamma, alpha = _window()
    assert wick_2pdm((1, 0, 0), (0, 1, 0), (1, 0, 0), (1, 1, 0), gamma, alpha, 3.0, 17.0) == 0


def test_wick_missing_key():
    keys, gamma, alpha = _window()
    with pytest.raises(ContractError):
        wick_2pdm((5, 0, 0), (5, 0, 0), (5, 0, 0), (5, 0, 0), gamma, alpha, 3.0, 17.0)


def test_diagonal_contraction_small_window():
    keys, gamma, alpha = _window()
    brute, book = diagonal_contraction(keys, gamma, alpha, 3.0, 17.0)
    assert brute == pytest.approx(book, rel=1e-14)
    # independent hand count
    sg = sum(gamma.values())
    sg2 = sum(x * x for x in gamma.values())
    sa2 = sum(x * x for x in alpha.values())
    assert book == pytest.approx(17.0 + 6.0 * sg + sg * sg + sg2 + sa2, rel=1e-14)


def test_condensate_quadrature_exponential_case():
    beta, mu = 1.0, -0.1
    q = condensate_quadrature(beta, 1e-300, mu)
    assert math.exp(q.log_Z) == pytest.approx(10.0, rel=1e-9)
    assert q.moments[1] == pytest.approx(10.0, rel=1e-9)


def test_lhy_quadrature_value():
    # -(1 / (2 beta (2 pi)^3)) 4 pi int p^2 (A/p^2 - ln(1 + A/p^2)) dp with A = 16 pi x
    beta, x = 1.0, 0.2
    A = 16 * math.pi * x
    ref = -(1 / (2 * beta * (2 * math.pi) ** 3)) * 4 * math.pi * (math.pi / 3) * A**1.5
    assert lhy_quadrature(beta, x).value == pytest.approx(ref, rel=1e-10)


def test_condensate_quadrature_far_peak():
    # eta = 1000: the density is a narrow Gaussian far from the origin
    from bosegp.condensate import moment_ratios, solve_condensate_mu

    beta, h, eta = 0.05, 7.0, 1000.0
    M = moment_ratios(eta, 1)[1] / math.sqrt(beta * h)
    model = solve_condensate_mu(beta, h, M)
    q = condensate_quadrature(beta, h, model.mu)
    assert q.moments[1] == pytest.approx(M, rel=1e-11)
    assert q.log_Z == pytest.approx(model.log_Z, rel=1e-11)
    assert q.entropy == pytest.approx(model.entropy, rel=1e-9)
