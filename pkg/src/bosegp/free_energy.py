"""Assembly of the free-energy upper bound and its simplified branch forms."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

from .bogoliubov import bogo_correction_sum
from .condensate import coupling, solve_condensate_mu
from .errors import ContractError
from .ideal_gas import IdealGasState, critical_beta, ideal_gas
from .lattice import MomentumSets
from .scattering import PotentialSpec, ScatteringSolution, solve_neumann

# |kappa - 1| below this is treated as critical: both branches are reported
# and the simplified forms are not used.
CRITICAL_WINDOW = 0.05


@dataclass(frozen=True)
class GasParameters:
    """System inputs. Exactly one of ``beta`` / ``kappa`` is given; the other is derived."""

    N: float
    L: float = 1.0
    beta: float | None = None
    kappa: float | None = None
    potential: PotentialSpec | None = None
    ell: float | None = None
    delta_B: float = 1.0 / 12.0
    delta_L: float = 1.0 / 12.0
    delta_H: float = 5.0 / 12.0

    def __post_init__(self):
        if (self.beta is None) == (self.kappa is None):
            raise ContractError("give exactly one of beta and kappa")
        if not (self.N >= 1 and self.L > 0):
            raise ContractError("need N >= 1 and L > 0")
        bc = critical_beta(self.N, self.L)
        if self.beta is None:
            if not self.kappa > 0:
                raise ContractError("kappa must be positive")
            object.__setattr__(self, "beta", self.kappa * bc)
        else:
            if not self.beta > 0:
                raise ContractError("beta must be positive")
            object.__setattr__(self, "kappa", self.beta / bc)
        if self.ell is None:
            object.__setattr__(self, "ell", self.L / 4.0)
        if not self.ell < self.L / 2:
            raise ContractError(f"ell={self.ell} must be smaller than L/2")

    @property
    def beta_c(self) -> float:
        return critical_beta(self.N, self.L)

    @property
    def sets(self) -> MomentumSets:
        return MomentumSets(self.N, self.L, self.delta_B, self.delta_L, self.delta_H)


@dataclass(frozen=True)
class FreeEnergyBreakdown:
    kappa: float
    beta: float
    beta_c: float
    N: float
    L: float
    mu0: float
    N0: float
    rho0: float
    a: float
    a_N: float
    F0_plus: float
    F0_bec: float
    Fbec_raw: float
    Fbec: float
    branch: str
    interaction: float
    bogo_corr: float
    bogo_tail_bound: float
    total: float
    error_scale: float
    log_term: float
    near_critical: bool
    form: str = "theorem"

    def __post_init__(self):
        for name, value in asdict(self).items():
            if not isinstance(value, (str, bool)):
                object.__setattr__(self, name, float(value))

    def as_dict(self) -> dict:
        return asdict(self)

    @property
    def condensate_term(self) -> float:
        return min(self.Fbec, self.F0_bec)


def error_scale(N: float, L: float, exponent: float = 7.0 / 12.0) -> float:
    """Size of the unquantified remainder, ``L^-2 N^exponent``."""
    return N**exponent / L**2


def solve_scattering(params: GasParameters) -> ScatteringSolution:
    if params.potential is None:
        raise ContractError("a potential is required")
    return solve_neumann(params.potential, params.ell, params.N, params.L)


def upper_bound(
    params: GasParameters,
    sol: ScatteringSolution | None = None,
    ideal: IdealGasState | None = None,
) -> FreeEnergyBreakdown:
    """All terms of the upper bound and their sum.

    ``total = F0_plus + 8 pi a_N L^3 rho^2 + min(F^BEC - 8 pi a_N L^3 rho0^2, F0_bec) + correction``
    where ``F^BEC`` is evaluated at the ideal-gas condensate occupation
    ``N0``. The remainder scale ``L^-2 N^(7/12)`` is reported, never added.
    """
    if sol is None:
        sol = solve_scattering(params)
    if ideal is None:
        ideal = ideal_gas(params.beta, params.N, params.L)
    beta, N, L = params.beta, params.N, params.L
    a, a_N = sol.a, sol.a / N
    rho = N / L**3
    rho0 = ideal.rho0
    interaction = 8.0 * math.pi * a_N * L**3 * rho**2
    model = solve_condensate_mu(beta, coupling(a_N, L), ideal.N0)
    Fbec_raw = model.free_energy
    Fbec = Fbec_raw - 8.0 * math.pi * a_N * L**3 * rho0**2
    branch = "interacting" if Fbec < ideal.F0_bec else "ideal"
    corr = bogo_correction_sum(beta, a_N, rho0, L=L)
    total = ideal.F0_plus + interaction + min(Fbec, ideal.F0_bec) + corr.value
    log_term = math.log(4.0 * beta * a_N / L**3) / (2.0 * beta) if a_N > 0 else -math.inf
    return FreeEnergyBreakdown(
        kappa=params.kappa,
        beta=beta,
        beta_c=params.beta_c,
        N=N,
        L=L,
        mu0=ideal.mu0,
        N0=ideal.N0,
        rho0=rho0,
        a=a,
        a_N=a_N,
        F0_plus=ideal.F0_plus,
        F0_bec=ideal.F0_bec,
        Fbec_raw=Fbec_raw,
        Fbec=Fbec,
        branch=branch,
        interaction=interaction,
        bogo_corr=corr.value,
        bogo_tail_bound=corr.tail_bound,
        total=total,
        error_scale=error_scale(N, L),
        log_term=log_term,
        near_critical=abs(params.kappa - 1.0) < CRITICAL_WINDOW,
    )


def corollary_bound(
    params: GasParameters,
    sol: ScatteringSolution | None = None,
    ideal: IdealGasState | None = None,
) -> FreeEnergyBreakdown:
    """Simplified bound above or below the critical point.

    For ``kappa > 1``: ``F0_plus + 4 pi a_N L^3 (2 rho^2 - rho0^2) + ln(4 beta a_N / L^3)/(2 beta) + correction``.
    For ``kappa < 1``: ``F0 + 8 pi a_N L^3 rho^2`` with remainder scale ``L^-2 N^(1/2)``.
    Within the critical window the full bound is returned with
    ``form == "critical"``.
    """
    thm = upper_bound(params, sol, ideal)
    if thm.near_critical:
        return _replace(thm, form="critical")
    L, a_N = thm.L, thm.a_N
    rho = thm.N / L**3
    if params.kappa > 1:
        inter = 4.0 * math.pi * a_N * L**3 * (2.0 * rho**2 - thm.rho0**2)
        total = thm.F0_plus + inter + thm.log_term + thm.bogo_corr
        return _replace(thm, total=total, form="above")
    total = thm.F0_plus + thm.F0_bec + thm.interaction
    return _replace(thm, total=total, bogo_corr=0.0, form="below", error_scale=error_scale(thm.N, L, 0.5))


def _replace(b: FreeEnergyBreakdown, **kw) -> FreeEnergyBreakdown:
    d = b.as_dict()
    d.update(kw)
    return FreeEnergyBreakdown(**d)


@dataclass(frozen=True)
class Hierarchy:
    """Magnitudes of the bound's terms in their expected descending order."""

    F0_plus: float
    interaction: float
    log_term: float
    bogo_corr: float

    @property
    def ordered(self) -> bool:
        """``|F0_plus| > interaction > max(|log term|, |correction|)``."""
        return self.F0_plus > self.interaction > max(self.log_term, self.bogo_corr)

    @property
    def ratios(self) -> tuple[float, float, float]:
        """``(F0_plus / interaction, interaction / correction, log term / correction)``."""
        return (
            self.F0_plus / self.interaction,
            self.interaction / self.bogo_corr,
            self.log_term / self.bogo_corr,
        )


def hierarchy(b: FreeEnergyBreakdown) -> Hierarchy:
    return Hierarchy(abs(b.F0_plus), abs(b.interaction), abs(b.log_term), abs(b.bogo_corr))
