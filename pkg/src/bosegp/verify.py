"""Verification suites: module invariants and oracle comparisons on a run configuration.

Each suite returns a list of :class:`Check` records with the measured value
and the threshold it was compared against. Random parameter draws use the
configuration's ``seed``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import bogoliubov as bg
from .condensate import coupling, fluctuation_free_energy, solve_condensate_mu, upsilon
from .config import RunConfig
from .errors import ContractError
from .free_energy import upper_bound
from .ideal_gas import critical_beta, ideal_gas, solve_mu0
from .lattice import (
    MomentumSets,
    build_lattice,
    count_representations,
    enumerate_shells_bruteforce,
    lattice_sum,
    riemann_sum_bound,
)
from .oracle import condensate_quadrature, diagonal_contraction, truncated_fock_pair, wick_2pdm
from .scattering import ScatteringSolution, scattering_length, solve_neumann


@dataclass(frozen=True)
class Check:
    suite: str
    name: str
    passed: bool
    value: float
    threshold: float

    def as_dict(self) -> dict:
        return {
            "suite": self.suite,
            "name": self.name,
            "passed": bool(self.passed),
            "value": float(self.value),
            "threshold": float(self.threshold),
        }


def _le(suite, name, value, threshold) -> Check:
    return Check(suite, name, bool(value <= threshold), value, threshold)


def _rel(a, b) -> float:
    return abs(a - b) / max(abs(b), 1e-300)


# ---------------------------------------------------------------------------
# Shared setups
# ---------------------------------------------------------------------------


def fock_draws(rng: np.random.Generator, n: int):
    """Random Bogoliubov pair parameters ``(p2, mu0, rho0, Wp, beta)``.

    ``beta eps`` is drawn in ``[0.5, 10]`` and ``rho0 Wp <= 2 (p^2 - mu0)``.
    """
    out = []
    for _ in range(n):
        p2 = rng.uniform(0.5, 5.0)
        mu0 = -rng.uniform(0.0, 0.5)
        D0 = p2 - mu0
        g = rng.uniform(0.0, 2.0) * D0
        rho0 = rng.uniform(0.5, 2.0)
        Wp = g / rho0
        eps = math.sqrt(D0 * (D0 + 2 * g))
        beta = rng.uniform(0.5, 10.0) / eps
        out.append((p2, mu0, rho0, Wp, beta))
    return out


def fock_comparison(p2, mu0, rho0, Wp, beta, n_max=60):
    """Deviations of the truncated-Fock oracle from the closed forms.

    Returns ``(gamma_dev, alpha_dev, E0_dev, inconclusive)`` with deviations
    measured as ``|x - y| / max(1, |y|)``.
    """
    res = truncated_fock_pair(p2, mu0, rho0, Wp, beta, n_max=n_max)
    gamma, alpha = bg.occupations(p2, mu0, rho0, Wp, beta)
    # one pair (p, -p) carries twice the per-mode ground shift
    E0 = 2.0 * bg.ground_shift(p2, mu0, rho0, Wp)
    mix = lambda x, y: abs(x - y) / max(1.0, abs(y))
    return mix(res.gamma, float(gamma)), mix(res.alpha, float(alpha)), mix(res.E0_pair, E0), res.inconclusive


@dataclass(frozen=True)
class WickWindow:
    keys: list
    gamma: dict
    alpha: dict
    M0: float
    fourth_moment: float


def wick_window(N, kappa, potential, L=1.0, radius=4, delta_B=0.3, sol: ScatteringSolution | None = None):
    """Occupation tables of the trial state on the window ``|k| <= radius`` (integer ``k``).

    Modes in P_B carry the Bogoliubov ``gamma``/``alpha`` with the solved
    ``W(p)``; the other modes carry the free Bose factor. The condensate
    enters through ``M0 = <|z|^2>`` and ``<|z|^4>`` of the Gibbs density at the
    ideal condensate occupation.
    """
    beta = kappa * critical_beta(N, L)
    if sol is None:
        sol = solve_neumann(potential, L / 4.0, N, L)
    ideal = solve_mu0(beta, N, L=L)
    sets = MomentumSets(N, L, delta_B=delta_B)
    model = solve_condensate_mu(beta, coupling(sol.a_N, L), ideal.N0)
    m = model.moments(2)
    r = int(radius)
    grid = np.arange(-r, r + 1)
    keys = [(i, j, k) for i in grid for j in grid for k in grid if i * i + j * j + k * k <= r * r]
    unit2 = (2.0 * math.pi / L) ** 2
    W_cache: dict[int, float] = {}
    gamma, alpha = {}, {}
    for key in keys:
        n2 = key[0] ** 2 + key[1] ** 2 + key[2] ** 2
        if n2 == 0:
            continue
        p2 = n2 * unit2
        in_B = p2 <= sets.r_B**2
        if in_B and n2 not in W_cache:
            W_cache[n2] = sol.W(math.sqrt(p2))
        Wp = W_cache.get(n2, 0.0) if in_B else 0.0
        g, a = bg.occupations(p2, ideal.mu0, ideal.rho0, Wp, beta, in_B=in_B)
        gamma[tuple(int(x) for x in key)] = float(g)
        alpha[tuple(int(x) for x in key)] = float(a)
    return WickWindow([tuple(int(x) for x in k) for k in keys], gamma, alpha, float(m[1]), float(m[2]))


def wick_symmetry_defect(win: WickWindow, rng: np.random.Generator, n: int = 200, phase: bool = True) -> float:
    """Largest violation of the exchange and adjoint symmetries on random index quadruples.

    With ``phase`` the pairing amplitudes get a random (even) phase so the
    adjoint symmetry is exercised with complex values.
    """
    alpha = win.alpha
    if phase:
        alpha = {}
        for k, a in win.alpha.items():
            canon = max(k, tuple(-x for x in k))
            theta = ((7 * canon[0] + 13 * canon[1] + 31 * canon[2]) % 97) * 2.0 * math.pi / 97.0
            alpha[k] = a * complex(math.cos(theta), math.sin(theta))
    keys = win.keys
    # quadruples are drawn so that many are on the nonzero pattern
    worst = 0.0
    G = lambda a, b, c, d: wick_2pdm(a, b, c, d, win.gamma, alpha, win.M0, win.fourth_moment)
    z = (0, 0, 0)
    for i in range(n):
        u = keys[rng.integers(len(keys))]
        v = keys[rng.integers(len(keys))]
        mode = i % 4
        if mode == 0:
            q = (u, v, u, v)
        elif mode == 1:
            nu = tuple(-x for x in u)
            q = (u, nu, v, tuple(-x for x in v))
        elif mode == 2:
            q = (z, u, z, u) if i % 8 == 2 else (z, z, u, tuple(-x for x in u))
        else:
            q = (u, v, v, u)
        u1, v1, u2, v2 = q
        base = G(u1, v1, u2, v2)
        for other in (G(v1, u1, u2, v2), G(u1, v1, v2, u2), np.conj(G(u2, v2, u1, v1))):
            worst = max(worst, abs(other - base))
    return worst


# ---------------------------------------------------------------------------
# Suites
# ---------------------------------------------------------------------------


def suite_lattice(cfg: RunConfig, rng) -> list[Check]:
    s = "lattice"
    counts = count_representations(200)
    brute = enumerate_shells_bruteforce(200)
    mism = sum(int(counts[n] != brute.get(n, 0)) for n in range(1, 201))
    checks = [_le(s, "shell counts vs brute force (n <= 200)", mism, 0)]
    lat = build_lattice(2.0 * math.pi, 30.0)
    val = lattice_sum(lambda p2: np.exp(-p2), lat).value
    theta = math.fsum(math.exp(-k * k) for k in range(-40, 41))
    checks.append(_le(s, "Gaussian sum vs theta function", _rel(val, theta**3 - 1.0), 1e-12))
    for j, width in enumerate(rng.uniform(0.3, 3.0, size=3)):
        f = lambda r, w=width: np.exp(-np.asarray(r, dtype=float) ** 2 / w)
        bound = riemann_sum_bound(f, 0.0, 2.0 * math.pi)
        exact = lattice_sum(lambda p2, w=width: np.exp(-p2 / w), build_lattice(2.0 * math.pi, 40.0)).value
        checks.append(Check(s, f"Riemann bound dominates sum #{j}", bound >= exact, bound - exact, 0.0))
    return checks


def suite_ideal_gas(cfg: RunConfig, rng) -> list[Check]:
    s = "ideal_gas"
    micro = solve_mu0(1.0, 1.0, L=1.0)
    checks = [_le(s, "mu0 = -ln 2 at beta = N = L = 1", abs(micro.mu0 + math.log(2.0)), 1e-14)]
    p = cfg.params()
    st = ideal_gas(p.beta, p.N, p.L, tol=cfg.sum_tail)
    checks.append(_le(s, "particle-number residual", st.residual, cfg.root_residual))
    F_lo = ideal_gas(0.9 * p.beta, p.N, p.L, tol=cfg.sum_tail).F0
    F_hi = ideal_gas(1.1 * p.beta, p.N, p.L, tol=cfg.sum_tail).F0
    # dF/dbeta = S / beta^2 >= 0
    checks.append(Check(s, "F0 nondecreasing in beta", F_lo <= st.F0 <= F_hi, F_hi - F_lo, 0.0))
    return checks


def suite_scattering(cfg: RunConfig, rng) -> list[Check]:
    s = "scattering"
    checks = []
    pot = cfg.potential
    if pot.kind == "square_well" and pot.v0 > 0:
        k = math.sqrt(pot.v0 / 2.0)
        exact = pot.R - math.tanh(k * pot.R) / k
        checks.append(_le(s, "square-well scattering length", abs(scattering_length(pot) - exact), 1e-8))
    sol = solve_neumann(pot, cfg.ell, cfg.N, cfg.L)
    if sol.a > 0:
        checks.append(_le(s, "N W(0) / (8 pi a) - 1", abs(cfg.N * sol.W(0.0) / (8 * math.pi * sol.a) - 1), 10.0 / cfg.N))
        unit = 2.0 * math.pi / cfg.L
        worst = max(sol.identity_residual(unit * math.sqrt(n)) for n in (1, 2, 3, 5, 9, 17, 50, 200))
        checks.append(_le(s, "scattering identity residual", worst, 1e-6))
        sets = MomentumSets(cfg.N, cfg.L, cfg.delta_B, cfg.delta_L, cfg.delta_H)
        moms = [unit * math.sqrt(n) for n in range(1, int((sets.r_B / unit) ** 2) + 1)]
        try:
            sol.check_positivity(moms)
            ok = True
        except ContractError:
            ok = False
        checks.append(Check(s, "W(p) >= 0 on P_B", ok, len(moms), 0.0))
    return checks


def suite_condensate(cfg: RunConfig, rng) -> list[Check]:
    s = "condensate"
    etas = np.linspace(-50.0, 50.0, 401)
    ups = np.array([upsilon(e) for e in etas])
    checks = [Check(s, "upsilon strictly increasing", bool(np.all(np.diff(ups) > 0)), float(np.min(np.diff(ups))), 0.0)]
    worst_rt, worst_q = 0.0, 0.0
    for _ in range(5):
        beta = 10 ** rng.uniform(-2, 1)
        h = 10 ** rng.uniform(-3, 1)
        M = 10 ** rng.uniform(-1, 3)
        model = solve_condensate_mu(beta, h, M)
        worst_rt = max(worst_rt, _rel(model.moments(1)[1], M))
        q = condensate_quadrature(beta, h, model.mu, kmax=4)
        m = model.moments(4)
        worst_q = max(worst_q, max(_rel(m[k], q.moments[k]) for k in range(5)), _rel(model.log_Z, q.log_Z))
    checks.append(_le(s, "mean round trip", worst_rt, 1e-10))
    checks.append(_le(s, "closed forms vs quadrature", worst_q, 1e-9))
    p = cfg.params()
    st = solve_mu0(p.beta, p.N, L=p.L)
    if p.kappa > 1 and cfg.potential.integral() > 0:
        sol = solve_neumann(cfg.potential, cfg.ell, cfg.N, cfg.L)
        model = solve_condensate_mu(p.beta, coupling(sol.a_N, p.L), st.N0)
        fl = fluctuation_free_energy(model, N=p.N)
        checks.append(_le(s, "fluctuation energy vs large-mass limit (beta-scaled)", p.beta * abs(fl.lhs - fl.rhs_4), 1e-2))
    return checks


def suite_bogoliubov(cfg: RunConfig, rng) -> list[Check]:
    s = "bogoliubov"
    p = cfg.params()
    sol = solve_neumann(cfg.potential, cfg.ell, cfg.N, cfg.L)
    st = solve_mu0(p.beta, p.N, L=p.L)
    lat = build_lattice(p.L, math.sqrt(50.0 / p.beta))
    p2 = lat.p2
    u, v = bg.bogo_coeffs(p2, st.mu0, st.rho0, 8 * math.pi * sol.a_N)
    checks = [_le(s, "u^2 - v^2 = 1 (scattering-length coefficients)", float(np.max(np.abs(u * u - v * v - 1))), 1e-12)]
    Wp = np.array([sol.W(math.sqrt(x)) for x in p2[:50]])
    u, v = bg.bogo_coeffs(p2[:50], st.mu0, st.rho0, Wp)
    checks.append(_le(s, "u^2 - v^2 = 1 (solved W(p))", float(np.max(np.abs(u * u - v * v - 1))), 1e-12))
    gamma, alpha = bg.occupations(p2[:50], st.mu0, st.rho0, Wp, p.beta)
    pointwise = float(np.max(alpha * alpha - gamma * (gamma + 1)))
    checks.append(_le(s, "|alpha|^2 <= gamma (gamma + 1)", pointwise, 1e-9 * float(np.max(gamma * (gamma + 1)))))
    checks.append(Check(s, "gamma >= 0", bool(np.all(gamma >= 0)), float(np.min(gamma)), 0.0))
    worst = 0.0
    for d in fock_draws(rng, 5):
        g, a, e, inc = fock_comparison(*d)
        if inc:
            worst = math.inf
        worst = max(worst, g, a, e)
    checks.append(_le(s, "truncated-Fock oracle vs closed forms", worst, 1e-7))
    corr = bg.bogo_correction_sum(p.beta, sol.a_N, st.rho0, L=p.L)
    checks.append(Check(s, "correction sum <= 0", corr.value <= 0, corr.value, 0.0))
    lhy = bg.lhy_integral(1.0, 0.37, 1.9)
    checks.append(_le(s, "LHY integral closed form vs quadrature", _rel(lhy.quadrature, lhy.closed_form), 1e-6))
    return checks


def suite_oracle(cfg: RunConfig, rng) -> list[Check]:
    s = "oracle"
    p = cfg.params()
    win = wick_window(p.N, p.kappa, cfg.potential, L=p.L, radius=2)
    brute, book = diagonal_contraction(win.keys, win.gamma, win.alpha, win.M0, win.fourth_moment)
    checks = [_le(s, "diagonal contraction vs moment bookkeeping", _rel(brute, book), 1e-10)]
    checks.append(_le(s, "Wick symmetries", wick_symmetry_defect(win, rng, n=100), 0.0))
    dense = truncated_fock_pair(1.0, 0.0, 1.0, 1.5, 1.0, n_max=20, dense=True)
    blocks = truncated_fock_pair(1.0, 0.0, 1.0, 1.5, 1.0, n_max=20)
    checks.append(_le(s, "dense vs block Fock spectra", float(np.max(np.abs(dense.spectrum_head - blocks.spectrum_head))), 1e-10))
    return checks


def suite_free_energy(cfg: RunConfig, rng) -> list[Check]:
    s = "free_energy"
    p = cfg.params()
    b = upper_bound(p)
    assembled = b.F0_plus + b.interaction + min(b.Fbec, b.F0_bec) + b.bogo_corr
    checks = [_le(s, "total reassembles from its terms", abs(assembled - b.total), 0.0)]
    checks.append(Check(s, "correction <= 0", b.bogo_corr <= 0, b.bogo_corr, 0.0))
    finite = all(math.isfinite(x) for x in (b.F0_plus, b.F0_bec, b.Fbec, b.interaction, b.total))
    checks.append(Check(s, "all terms finite", finite, b.total, 0.0))
    if not b.near_critical and b.a > 0:
        expected = "interacting" if p.kappa > 1 else "ideal"
        checks.append(Check(s, f"branch is {expected}", b.branch == expected, p.kappa, 1.0))
    return checks


SUITES = {
    "lattice": suite_lattice,
    "ideal_gas": suite_ideal_gas,
    "scattering": suite_scattering,
    "condensate": suite_condensate,
    "bogoliubov": suite_bogoliubov,
    "oracle": suite_oracle,
    "free_energy": suite_free_energy,
}


def run_suite(cfg: RunConfig, name: str) -> list[Check]:
    """Run one suite, or every suite for ``name == "all"``."""
    if name != "all" and name not in SUITES:
        raise KeyError(name)
    names = list(SUITES) if name == "all" else [name]
    checks = []
    for n in names:
        rng = np.random.default_rng(cfg.seed)
        checks.extend(SUITES[n](cfg, rng))
    return checks
