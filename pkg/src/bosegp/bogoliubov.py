"""Bogoliubov theory at positive temperature: coefficients, dispersions,
occupations, the ground-state shift, the free-energy correction sum and the
grand-potential expansion.

All mode functions are vectorized over ``p2`` (arrays of ``|p|^2``).
"""
from __future__ import annotations

import math
from typing import NamedTuple

import numpy as np

from .errors import ContractError, PositivityError, ResolutionError
from .lattice import MomentumLattice, MomentumSets, build_lattice, lattice_sum, region_mask
from .oracle import lhy_quadrature

# Shells kept explicitly in the correction sum; beyond them the continuum
# integral is used.
CORRECTION_SHELLS = 200


def _check(p2, mu0, rho0, Wp):
    p2 = np.asarray(p2, dtype=float)
    Wp = np.asarray(Wp, dtype=float)
    if np.any(Wp < 0):
        raise PositivityError("convolved potential is negative on a Bogoliubov mode")
    if mu0 > 0:
        raise ContractError("mu0 must be nonpositive")
    if rho0 < 0:
        raise ContractError("rho0 must be nonnegative")
    if np.any(p2 - mu0 <= 0):
        raise ContractError("need p^2 - mu0 > 0")
    return p2, Wp


def bogo_coeffs(p2, mu0: float, rho0: float, Wp):
    """Coefficients ``(u, v)`` of the Bogoliubov transformation.

    With ``r = (p^2 - mu0) / (p^2 - mu0 + 2 rho0 Wp)``,
    ``u = (r^(-1/4) + r^(1/4)) / 2`` and ``v = (r^(1/4) - r^(-1/4)) / 2``,
    written as ``cosh`` / ``-sinh`` of ``ln(1 + x) / 4`` with
    ``x = 2 rho0 Wp / (p^2 - mu0)``, so ``u^2 - v^2 = 1`` holds to rounding.
    """
    p2, Wp = _check(p2, mu0, rho0, Wp)
    t = 0.25 * np.log1p(2.0 * rho0 * Wp / (p2 - mu0))
    return np.cosh(t), -np.sinh(t)


def dispersion(p2, mu0: float, rho0: float, Wp):
    """``eps(p) = sqrt(p^2 - mu0) sqrt(p^2 - mu0 + 2 Wp rho0)``."""
    p2, Wp = _check(p2, mu0, rho0, Wp)
    return np.sqrt(p2 - mu0) * np.sqrt(p2 - mu0 + 2.0 * Wp * rho0)


def dispersion_tilde(p2, mu0: float, rho0: float, a_N: float):
    """Scattering-length form ``sqrt(p^2 - mu0) sqrt(p^2 - mu0 + 16 pi a_N rho0)``."""
    return dispersion(p2, mu0, rho0, 8.0 * math.pi * a_N)


def bose(x):
    """``1 / (e^x - 1)``."""
    with np.errstate(over="ignore"):
        return 1.0 / np.expm1(x)


def occupations(p2, mu0: float, rho0: float, Wp, beta: float, in_B=True):
    """One-body occupation ``gamma(p)`` and pairing amplitude ``alpha(p)``.

    On P_B (``in_B`` true) ``gamma = (u^2 + v^2) n + v^2`` and
    ``alpha = u v (2 n + 1)`` with ``n = 1/(e^{beta eps} - 1)``; elsewhere the
    free Bose factor at ``p^2 - mu0`` and no pairing. ``alpha`` is the real
    representative; the condensate phase is factored out. ``in_B`` may be an
    array mask.
    """
    if not beta > 0:
        raise ContractError("beta must be positive")
    p2, Wp = _check(p2, mu0, rho0, Wp)
    in_B = np.broadcast_to(np.asarray(in_B, dtype=bool), np.broadcast(p2, Wp).shape)
    W_eff = np.where(in_B, Wp, 0.0)
    u, v = bogo_coeffs(p2, mu0, rho0, W_eff)
    n = bose(beta * dispersion(p2, mu0, rho0, W_eff))
    gamma = (u * u + v * v) * n + v * v
    alpha = np.where(in_B, u * v * (2.0 * n + 1.0), 0.0)
    return gamma, alpha


def ground_shift(p2, mu0: float, rho0: float, Wp, mult=None) -> float:
    """``E0 = -(1/2) sum_{p in P_B} [p^2 - mu0 + rho0 W(p) - eps(p)]``.

    ``p2``/``Wp`` list the modes (``mult`` optional multiplicities). Each
    summand is written as ``(rho0 W)^2 / (p^2 - mu0 + rho0 W + eps)`` to avoid
    cancellation.
    """
    p2, Wp = _check(p2, mu0, rho0, Wp)
    eps = dispersion(p2, mu0, rho0, Wp)
    g = rho0 * Wp
    terms = -0.5 * g * g / (p2 - mu0 + g + eps)
    if mult is not None:
        terms = terms * np.asarray(mult, dtype=float)
    return float(np.sum(terms))


def _correction_summand(x):
    """``x - ln(1 + x)``, with a series for small ``x``."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-3
    series = x * x * (0.5 - x * (1.0 / 3.0 - x * (0.25 - x * (0.2 - x / 6.0))))
    with np.errstate(invalid="ignore"):
        direct = x - np.log1p(x)
    return np.where(small, series, direct)


def continuum_tail(A: float, P: float) -> float:
    """``int_{|p| > P} [A/p^2 - ln(1 + A/p^2)] dp`` over R^3."""
    if A == 0:
        return 0.0
    y = A / (P * P)
    if y < 0.05:
        n = np.arange(2, 40)
        coef = 2.0 / (3.0 * (2 * n - 3)) - 1.0 / (3.0 * n)
        s = math.fsum((-1.0) ** n * y**n * coef)
        return 4.0 * math.pi * P**3 * s
    sA = math.sqrt(A)
    return 4.0 * math.pi * (
        (2.0 / 3.0) * A * sA * (0.5 * math.pi - math.atan(P / sA))
        - A * P / 3.0
        + (P**3 / 3.0) * math.log1p(y)
    )


class CorrectionSum(NamedTuple):
    value: float
    tail_estimate: float
    tail_bound: float


def bogo_correction_sum(
    beta: float,
    a_N: float,
    rho0: float,
    L: float = 1.0,
    lattice: MomentumLattice | None = None,
    shells: int = CORRECTION_SHELLS,
) -> CorrectionSum:
    """``-(1/(2 beta)) sum_{p != 0} [A/p^2 - ln(1 + A/p^2)]`` with ``A = 16 pi a_N rho0``.

    The lattice is summed explicitly up to ``|k| = shells`` (or over
    ``lattice``); the rest is replaced by its continuum integral
    ``(L/2pi)^3 int``. ``tail_bound`` is the certified integral majorant of
    the omitted lattice terms, so the true value lies within
    ``tail_bound / (2 beta)`` of the explicit part.
    """
    if a_N < 0 or rho0 < 0:
        raise ContractError("need a_N >= 0 and rho0 >= 0")
    if not beta > 0:
        raise ContractError("beta must be positive")
    A = 16.0 * math.pi * a_N * rho0
    if A == 0:
        return CorrectionSum(0.0, 0.0, 0.0)
    if lattice is None:
        lattice = build_lattice(L, 2.0 * math.pi * shells / L)
    L = lattice.L
    summand = lambda p2: _correction_summand(A / p2)
    majorant = lambda r: _correction_summand(A / np.maximum(np.asarray(r, dtype=float) ** 2, 1e-300))
    s = lattice_sum(summand, lattice, tail_majorant=majorant)
    est = (L / (2.0 * math.pi)) ** 3 * continuum_tail(A, lattice.p_max)
    if not math.isfinite(s.tail_bound):
        raise ResolutionError("correction-sum tail is not finite")
    pref = -0.5 / beta
    return CorrectionSum(pref * (s.value + est), pref * est, -pref * s.tail_bound)


class GrandPotentialExpansion(NamedTuple):
    lhs: float
    rhs_terms: tuple
    gap: float
    envelope: float


def grand_potential_expansion(
    beta: float,
    mu0: float,
    a_N: float,
    rho0: float,
    lattice: MomentumLattice,
    sets: MomentumSets,
    N0: float | None = None,
) -> GrandPotentialExpansion:
    """Both sides of the upper bound for the P_B part of the Bogoliubov grand potential.

    ``lhs = beta^-1 sum_{P_B} ln(1 - e^{-beta eps~})``; the right side is the
    free P_B sum, ``8 pi a_N rho0 sum_{P_B} n(p^2 - mu0)`` and the full
    correction sum. ``gap = rhs - lhs`` and ``envelope`` is the error scale
    ``(N0/N)^2 [N^dB / L^2 + 1/(beta N^dB) + L^2/(beta^2 N0)]`` without its
    unspecified constant.
    """
    mask = region_mask(lattice, "B", sets)
    if sets.r_B > lattice.p_max:
        raise ResolutionError("lattice does not cover P_B")
    p2 = lattice.p2[mask]
    mult = lattice.mult[mask].astype(float)
    eps_t = dispersion_tilde(p2, mu0, rho0, a_N)
    lhs = float(np.sum(mult * np.log(-np.expm1(-beta * eps_t)))) / beta
    free = float(np.sum(mult * np.log(-np.expm1(-beta * (p2 - mu0))))) / beta
    inter = 8.0 * math.pi * a_N * rho0 * float(np.sum(mult * bose(beta * (p2 - mu0))))
    corr = bogo_correction_sum(beta, a_N, rho0, L=sets.L).value
    rhs = (free, inter, corr)
    gap = math.fsum(rhs) - lhs
    N, L, dB = sets.N, sets.L, sets.delta_B
    N0 = rho0 * L**3 if N0 is None else N0
    env = (N0 / N) ** 2 * (N**dB / L**2 + 1.0 / (beta * N**dB) + (L**2 / (beta**2 * N0) if N0 > 0 else 0.0))
    return GrandPotentialExpansion(lhs, rhs, gap, env)


class PhiDecomposition(NamedTuple):
    direct: float
    terms: tuple
    residual: float


def phi_bog_decomposition(
    beta: float, mu0: float, a_N: float, rho0: float, N: float, lattice: MomentumLattice
) -> PhiDecomposition:
    """Grand potential of the scattering-length Bogoliubov Hamiltonian over all of Lambda_+^*.

    ``direct = beta^-1 sum ln(1 - e^{-beta eps~(p)})`` is compared with the
    free sum, ``8 pi a_N L^3 (rho - rho0) rho0`` and the correction sum;
    ``residual = direct - sum(terms)``. The exponent follows the decaying sign
    ``-beta eps~``. ``lattice`` must resolve the Bose factor.
    """
    L = lattice.L
    p2 = lattice.p2
    mult = lattice.mult.astype(float)
    eps_t = dispersion_tilde(p2, mu0, rho0, a_N)
    direct = float(np.sum(mult * np.log(-np.expm1(-beta * eps_t)))) / beta
    free = float(np.sum(mult * np.log(-np.expm1(-beta * (p2 - mu0))))) / beta
    rho = N / L**3
    inter = 8.0 * math.pi * a_N * L**3 * (rho - rho0) * rho0
    corr = bogo_correction_sum(beta, a_N, rho0, L=L).value
    terms = (free, inter, corr)
    return PhiDecomposition(direct, terms, direct - math.fsum(terms))


class LHYResult(NamedTuple):
    closed_form: float
    quadrature: float
    quadrature_error: float


def lhy_integral(beta: float, a: float, rho0: float) -> LHYResult:
    """Thermodynamic-limit correction per volume, closed form and quadrature.

    ``-(1/(2 beta (2 pi)^3)) int [16 pi a rho0 / p^2 - ln(1 + 16 pi a rho0 / p^2)] dp
    = -(16 sqrt(pi) / (3 beta)) (a rho0)^(3/2)``.
    """
    ar = a * rho0
    if ar < 0:
        raise ContractError("a * rho0 must be nonnegative")
    closed = -(16.0 * math.sqrt(math.pi) / (3.0 * beta)) * ar**1.5
    q = lhy_quadrature(beta, ar)
    return LHYResult(closed, q.value, q.error)
