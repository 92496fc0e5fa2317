"""Single-mode condensate theory with density ``exp(-beta (h x^2 - mu x))`` on ``x = |z|^2 >= 0``.

With the complex measure ``dx dy / pi`` every radial integral over ``C``
reduces to an integral over ``x >= 0``. In the variable ``y = s x`` with
``s = sqrt(beta h)`` the weight becomes ``exp(-y^2 + 2 eta y)`` where
``eta = mu sqrt(beta / (4 h))``. All closed forms go through

    J_k(eta) = int_0^inf y^k exp(-y^2 + 2 eta y) dy,
    J_0 = (sqrt(pi)/2) erfcx(-eta),
    J_{k+1} = eta J_k + (k/2) J_{k-1}   (k >= 1),

and are evaluated in log space, so nothing overflows for ``|eta|`` in the
thousands.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special

from .errors import ContractError, ResolutionError

SQRT_PI = math.sqrt(math.pi)
LOG_HALF_SQRT_PI = math.log(SQRT_PI / 2.0)

# Below this eta the moment ratios come from a backward continued fraction.
CF_THRESHOLD = -2.0


def log_erfcx_neg(eta: float) -> float:
    """``ln(exp(eta^2) erfc(-eta))`` without overflow."""
    if eta <= 0.0:
        return math.log(special.erfcx(-eta))
    return eta * eta + math.log(special.erfc(-eta))


def _inv_sqrt_pi_E(eta: float) -> float:
    """``1 / (sqrt(pi) exp(eta^2) erfc(-eta))``."""
    return math.exp(-math.log(SQRT_PI) - log_erfcx_neg(eta))


def moment_ratios(eta: float, kmax: int) -> np.ndarray:
    """``R_k = J_k / J_0`` for ``k = 0..kmax``."""
    R = np.empty(kmax + 1)
    R[0] = 1.0
    if kmax == 0:
        return R
    if eta >= CF_THRESHOLD:
        R[1] = eta + _inv_sqrt_pi_E(eta)
        for k in range(1, kmax):
            R[k + 1] = eta * R[k] + 0.5 * k * R[k - 1]
        return R
    # rho_k = J_k / J_{k-1} = (k/2) / (rho_{k+1} - eta), the minimal solution
    K = kmax + 80 + int(8 * abs(eta))
    rho = 0.0
    ratios = {}
    for k in range(K, 0, -1):
        rho = 0.5 * k / (rho - eta)
        if k <= kmax:
            ratios[k] = rho
    for k in range(1, kmax + 1):
        R[k] = R[k - 1] * ratios[k]
    return R


def upsilon(eta: float) -> float:
    """``(1 + sqrt(pi) eta e^{eta^2} erfc(-eta)) / (e^{eta^2} erfc(-eta))``, i.e. ``sqrt(pi) R_1``.

    Strictly increasing from 0 (``eta -> -inf``) to infinity.
    """
    return SQRT_PI * moment_ratios(eta, 1)[1]


def _upsilon_slope(eta: float) -> float:
    R = moment_ratios(eta, 2)
    return 2.0 * SQRT_PI * _centered_second(eta, R)


def _centered_second(eta: float, R) -> float:
    """``R_2 - R_1^2`` without cancellation."""
    if eta >= CF_THRESHOLD:
        return 0.5 - R[1] * _inv_sqrt_pi_E(eta)
    return R[1] * (R[2] / R[1] - R[1])


@dataclass(frozen=True)
class CondensateModel:
    """Gibbs density of the condensate with coupling ``h`` and mean ``M``.

    ``h = 0`` is the exact exponential distribution with ``mu = -1/(beta M)``.
    """

    beta: float
    h: float
    M: float
    mu: float
    eta_scaled: float
    residual: float

    @property
    def s(self) -> float:
        return math.sqrt(self.beta * self.h)

    @property
    def log_Z(self) -> float:
        """``ln int_0^inf exp(-beta (h x^2 - mu x)) dx``."""
        if self.h == 0:
            return math.log(self.M)
        return -math.log(self.s) + LOG_HALF_SQRT_PI + log_erfcx_neg(self.eta_scaled)

    def moments(self, kmax: int) -> np.ndarray:
        """``<x^k>`` for ``k = 0..kmax``."""
        if self.h == 0:
            return np.array([math.factorial(k) * self.M**k for k in range(kmax + 1)])
        R = moment_ratios(self.eta_scaled, kmax)
        return R / self.s ** np.arange(kmax + 1)

    @property
    def variance(self) -> float:
        """``Var(|z|^2)``."""
        if self.h == 0:
            return self.M**2
        R = moment_ratios(self.eta_scaled, 2)
        return _centered_second(self.eta_scaled, R) / (self.beta * self.h)

    @property
    def entropy(self) -> float:
        """``-int g ln g`` with respect to ``dx dy / pi``."""
        if self.h == 0:
            return 1.0 + math.log(self.M)
        m = self.moments(2)
        return self.beta * (self.h * m[2] - self.mu * m[1]) + self.log_Z

    @property
    def free_energy(self) -> float:
        """``-ln Z / beta + mu M``."""
        if self.h == 0:
            return -(math.log(self.M) + 1.0) / self.beta
        return -self.log_Z / self.beta + self.mu * self.M


def solve_condensate_mu(beta: float, h: float, M: float, rtol: float = 1e-13) -> CondensateModel:
    """Chemical potential for which the condensate density has mean ``M``.

    Solves ``upsilon(eta) = sqrt(pi beta h) M`` by bisection inside an
    asymptotic bracket followed by Newton polish; ``mu = 2 eta sqrt(h / beta)``.
    """
    if not (beta > 0 and M > 0):
        raise ContractError("need beta > 0 and M > 0")
    if h < 0:
        raise ContractError("coupling h must be nonnegative")
    if h == 0:
        return CondensateModel(beta, 0.0, M, -1.0 / (beta * M), -math.inf, 0.0)
    s = math.sqrt(beta * h)
    T = s * M  # target for R_1
    r1 = lambda e: moment_ratios(e, 1)[1]
    # R_1 ~ eta for large eta, ~ 1/(2|eta|) for very negative eta
    guess = T if T >= 1.0 / SQRT_PI else -0.5 / T
    width = max(1.0, abs(guess))
    lo, hi = guess - width, guess + width
    for _ in range(200):
        if r1(lo) < T:
            break
        lo -= width
        width *= 2
    for _ in range(200):
        if r1(hi) > T:
            break
        hi += width
        width *= 2
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if r1(mid) < T:
            lo = mid
        else:
            hi = mid
        if hi - lo <= 1e-10 * max(1.0, abs(mid)):
            break
    eta = 0.5 * (lo + hi)
    for _ in range(4):
        R = moment_ratios(eta, 2)
        slope = 2.0 * _centered_second(eta, R)
        if slope <= 0:
            break
        step = (R[1] - T) / slope
        eta -= step
        if abs(step) <= 1e-16 * max(1.0, abs(eta)):
            break
    residual = abs(r1(eta) - T) / T
    if residual > 1e3 * rtol:
        raise ResolutionError(f"condensate inversion stalled with relative residual {residual:.2e}")
    mu = 2.0 * eta * math.sqrt(h / beta)
    return CondensateModel(beta, h, M, mu, eta, residual)


def coupling(a_N: float, L: float) -> float:
    """``h = 4 pi a_N / L^3``."""
    return 4.0 * math.pi * a_N / L**3


def moment(k: int, model: CondensateModel) -> float:
    """``<|z|^(2k)>``."""
    if k < 0:
        raise ContractError("moment order must be nonnegative")
    return float(model.moments(k)[k])


def fbec(beta: float, M: float, L: float, a_N: float) -> float:
    """Condensate free energy ``-beta^-1 ln int exp(-beta(h|z|^4 - mu|z|^2)) dz + mu M``."""
    if a_N < 0:
        raise ContractError("a_N must be nonnegative")
    return solve_condensate_mu(beta, coupling(a_N, L), M).free_energy


def condensate_entropy(model: CondensateModel) -> float:
    return model.entropy


@dataclass(frozen=True)
class FluctuationEnergy:
    lhs: float
    rhs_4: float
    rhs_16: float
    in_regime: bool


def fluctuation_free_energy(model: CondensateModel, N: float | None = None, eps: float = 0.0) -> FluctuationEnergy:
    """``h Var(|z|^2) - S / beta`` together with the two candidate limits.

    ``rhs_4 = ln(beta h / pi) / (2 beta)`` is the large-mass limit of the
    left side; ``rhs_16`` adds ``ln(4) / (2 beta)``. ``in_regime`` reports
    whether ``M >= N^(5/6 + eps)`` (always true when ``N`` is not given).
    """
    lhs = model.h * model.variance - model.entropy / model.beta
    if model.h > 0:
        base = math.log(model.beta * model.h / math.pi)
        rhs_4 = base / (2 * model.beta)
        rhs_16 = (base + math.log(4.0)) / (2 * model.beta)
    else:
        rhs_4 = rhs_16 = -math.inf
    in_regime = True if N is None else model.M >= N ** (5.0 / 6.0 + eps)
    return FluctuationEnergy(lhs, rhs_4, rhs_16, bool(in_regime))


def large_deviation_fraction(model: CondensateModel, x_cut: float) -> float:
    """``int_{x >= x_cut} (1 + x) g / int (1 + x) g`` in closed form."""
    if model.h == 0:
        M = model.M
        return math.exp(-x_cut / M) * (1 + M + x_cut) / (1 + M)
    s, eta = model.s, model.eta_scaled
    c = s * x_cut
    # log of int_c^inf exp(-y^2 + 2 eta y) dy and the boundary term
    w = c - eta
    if w >= 0:
        log_T0 = LOG_HALF_SQRT_PI + math.log(special.erfcx(w)) - w * w + eta * eta
    else:
        log_T0 = LOG_HALF_SQRT_PI + math.log(special.erfc(w)) + eta * eta
    log_B = -c * c + 2 * eta * c
    # T1 = eta T0 + exp(log_B)/2, tail of (1 + x) = (1 + y/s)
    T0 = 1.0
    T1 = eta + 0.5 * math.exp(log_B - log_T0)
    tail = T0 + T1 / s  # in units of exp(log_T0)
    R1 = moment_ratios(eta, 1)[1]
    full = 1.0 + R1 / s  # in units of J_0
    log_J0 = LOG_HALF_SQRT_PI + log_erfcx_neg(eta)
    return math.exp(log_T0 - log_J0) * tail / full
