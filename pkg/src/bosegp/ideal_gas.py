"""Noninteracting Bose gas on the torus: critical temperature, chemical
potential, condensate occupation and the two ideal free-energy pieces.

The chemical potential is handled through ``t = -beta * mu0 > 0`` so that every
Bose factor is ``1 / expm1(beta p^2 + t)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import ContractError, ResolutionError
from .lattice import MomentumLattice, build_lattice, lattice_sum

ZETA_3_2 = 2.612375348685488

# beta * p_max^2 for Bose-factor sums; the last shell is suppressed by e^-50.
BOSE_CUTOFF = 50.0


@dataclass(frozen=True)
class IdealGasState:
    beta: float
    N: float
    L: float
    mu0: float
    N0: float
    rho0: float
    beta_c: float
    residual: float
    tail_bound: float
    F0_bec: float | None = None
    F0_plus: float | None = None

    @property
    def kappa(self) -> float:
        return self.beta / self.beta_c

    @property
    def rho(self) -> float:
        return self.N / self.L**3

    @property
    def F0(self) -> float:
        return self.F0_bec + self.F0_plus


def critical_beta(N: float, L: float) -> float:
    """Inverse critical temperature ``(1/4 pi) (N / (L^3 zeta(3/2)))^(-2/3)``."""
    if not (N >= 1 and L > 0):
        raise ContractError("need N >= 1 and L > 0")
    return (N / (L**3 * ZETA_3_2)) ** (-2.0 / 3.0) / (4.0 * math.pi)


def default_p_max(beta: float, L: float, cutoff: float = BOSE_CUTOFF) -> float:
    """Truncation radius for Bose-factor sums.

    The integral tail bound starts ``sqrt(3) 2 pi / L`` below ``p_max``, so the
    radius is pushed out by that amount past ``beta p^2 = cutoff``.
    """
    return math.sqrt(cutoff / beta) + 2.0 * math.sqrt(3.0) * math.pi / L


def _bose_lattice_terms(lattice: MomentumLattice, beta: float):
    x = beta * lattice.p2
    return x, lattice.mult.astype(float)


def _occupation(t: float, x: np.ndarray, mult: np.ndarray) -> float:
    return 1.0 / math.expm1(t) + float(np.sum(mult / np.expm1(x + t)))


def _occupation_slope(t: float, x: np.ndarray, mult: np.ndarray) -> float:
    s = math.sinh(t / 2.0)
    return -1.0 / (4.0 * s * s) - float(np.sum(mult / (4.0 * np.sinh((x + t) / 2.0) ** 2)))


def solve_mu0(
    beta: float,
    N: float,
    lattice: MomentumLattice | None = None,
    L: float | None = None,
    tol: float = 1e-10,
) -> IdealGasState:
    """Chemical potential of the ideal gas: ``sum_{p in Lambda^*} 1/(e^{beta(p^2 - mu0)} - 1) = N``.

    The sum includes ``p = 0``. The root is bracketed in ``log t`` and found by
    bisection, then polished with Newton steps. Raises
    :class:`ResolutionError` if the lattice tail is not small against
    ``tol * N``.
    """
    if not beta > 0:
        raise ContractError(f"beta must be positive, got {beta}")
    if not N > 0:
        raise ContractError(f"N must be positive, got {N}")
    if lattice is None:
        if L is None:
            raise ContractError("pass a lattice or a box side L")
        lattice = build_lattice(L, default_p_max(beta, L))
    L = lattice.L
    x, mult = _bose_lattice_terms(lattice, beta)
    g = lambda t: _occupation(t, x, mult) - N

    # The zero mode alone reaches N at t = ln(1 + 1/N), so the root is above it.
    t_lo = math.log1p(1.0 / N)
    if g(t_lo) < 0:
        raise ResolutionError("bracket failure at the lower end; lattice sum is inconsistent")
    t_hi = 2.0 * t_lo
    for _ in range(200):
        if g(t_hi) < 0:
            break
        t_lo, t_hi = t_hi, 2.0 * t_hi
    else:
        raise ResolutionError("could not bracket the chemical potential")

    lo, hi = math.log(t_lo), math.log(t_hi)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if g(math.exp(mid)) > 0:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-13:
            break
    t = math.exp(0.5 * (lo + hi))
    for _ in range(3):
        step = g(t) / _occupation_slope(t, x, mult)
        if math.isfinite(step) and t - step > 0:
            t -= step

    def majorant(r):
        with np.errstate(over="ignore"):
            return 1.0 / np.expm1(beta * np.asarray(r) ** 2 + t)

    tail = lattice_sum(lambda p2: 0.0 * p2, lattice, tail_majorant=majorant, tail_scale=1.0 / math.sqrt(beta)).tail_bound
    if tail > tol * N:
        raise ResolutionError(
            f"Bose-factor tail {tail:.3e} exceeds {tol:.1e} * N; increase p_max"
        )
    residual = abs(g(t)) / N
    N0 = 1.0 / math.expm1(t)
    return IdealGasState(
        beta=beta,
        N=N,
        L=L,
        mu0=-t / beta,
        N0=N0,
        rho0=N0 / L**3,
        beta_c=critical_beta(max(N, 1.0), L),
        residual=residual,
        tail_bound=tail,
    )


def free_energy_ideal(state: IdealGasState, lattice: MomentumLattice) -> tuple[float, float]:
    """Condensate and excited-state parts of the ideal grand potential.

    ``F0_bec = ln(1 - e^{beta mu0}) / beta + mu0 N0`` and
    ``F0_plus = sum_{p != 0} ln(1 - e^{-beta(p^2 - mu0)}) / beta + mu0 (N - N0)``.
    """
    beta, t = state.beta, -state.beta * state.mu0
    F0_bec = math.log(-math.expm1(-t)) / beta + state.mu0 * state.N0
    summand = lambda p2: np.log(-np.expm1(-(beta * p2 + t)))
    majorant = lambda r: -np.log(-np.expm1(-(beta * np.asarray(r) ** 2 + t)))
    s = lattice_sum(summand, lattice, tail_majorant=majorant, tail_scale=1.0 / math.sqrt(beta))
    if s.tail_bound > 1e-10 * max(abs(s.value), 1e-300) and s.tail_bound > 1e-300:
        raise ResolutionError(f"log-sum tail {s.tail_bound:.3e} too large; increase p_max")
    F0_plus = s.value / beta + state.mu0 * (state.N - state.N0)
    return F0_bec, F0_plus


def ideal_gas(
    beta: float, N: float, L: float = 1.0, lattice: MomentumLattice | None = None, tol: float = 1e-10
) -> IdealGasState:
    """Solve for ``mu0`` and fill in both ideal free-energy pieces."""
    if lattice is None:
        lattice = build_lattice(L, default_p_max(beta, L))
    state = solve_mu0(beta, N, lattice, tol=tol)
    F0_bec, F0_plus = free_energy_ideal(state, lattice)
    return replace(state, F0_bec=F0_bec, F0_plus=F0_plus)
