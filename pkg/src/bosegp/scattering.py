"""Zero-energy scattering and the finite-ball Neumann problem.

Everything is solved in the scaled variable ``y = N x`` where the potential
``v`` has its natural O(1) range and the ball has radius ``R_b = N * ell``.
With ``u(y) = y f(y)`` the radial equation reads

    u'' = (v(y) / 2 - lam) u,   u(0) = 0,

and the Neumann conditions ``f(R_b) = 1``, ``f'(R_b) = 0`` become
``u(R_b) = R_b`` and ``R_b u'(R_b) = u(R_b)``. The eigenvalue of the
unscaled problem is ``lambda_N = N^2 lam``.

Inside the support of ``v`` the equation is integrated numerically; outside
it is solved in closed form.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from .errors import ContractError, PositivityError, ResolutionError
from .oracle import quadrature

RTOL = 1e-12
ATOL = 1e-14
QUAD_TOL = 1e-11


@dataclass(frozen=True)
class PotentialSpec:
    """Radial, nonnegative, compactly supported potential ``v(r)``.

    Use :meth:`square_well`, :meth:`tabulated` or :meth:`zero` to build one.
    Tabulated values are interpolated linearly (first-order accurate) and
    vanish beyond the last grid point.
    """

    kind: str
    v0: float = 0.0
    R: float = 0.0
    r_grid: tuple = field(default=(), repr=False)
    v_grid: tuple = field(default=(), repr=False)

    @classmethod
    def square_well(cls, v0: float, R: float) -> "PotentialSpec":
        if v0 < 0:
            raise ContractError(f"square well depth must be nonnegative, got {v0}")
        if not R > 0:
            raise ContractError(f"square well radius must be positive, got {R}")
        return cls("square_well", v0=float(v0), R=float(R))

    @classmethod
    def zero(cls) -> "PotentialSpec":
        return cls("square_well", v0=0.0, R=1.0)

    @classmethod
    def tabulated(cls, r, v) -> "PotentialSpec":
        r = np.asarray(r, dtype=float)
        v = np.asarray(v, dtype=float)
        if r.ndim != 1 or r.shape != v.shape or len(r) < 2:
            raise ContractError("tabulated potential needs matching 1-d grids of length >= 2")
        if np.any(np.diff(r) <= 0) or r[0] < 0:
            raise ContractError("radial grid must be nonnegative and strictly increasing")
        if np.any(v < 0):
            raise ContractError("potential has negative samples")
        return cls("tabulated", R=float(r[-1]), r_grid=tuple(r), v_grid=tuple(v))

    @classmethod
    def from_file(cls, path) -> "PotentialSpec":
        """Two-column CSV ``r, v(r)``; lines starting with ``#`` are skipped."""
        data = np.loadtxt(path, delimiter=",", comments="#", ndmin=2)
        return cls.tabulated(data[:, 0], data[:, 1])

    @property
    def support(self) -> float:
        return self.R

    @property
    def is_zero(self) -> bool:
        if self.kind == "square_well":
            return self.v0 == 0.0
        return not any(self.v_grid)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if self.kind == "square_well":
            return np.where(r <= self.R, self.v0, 0.0)
        return np.interp(r, self.r_grid, self.v_grid, left=self.v_grid[0], right=0.0)

    def integral(self) -> float:
        """``int_{R^3} v``."""
        if self.kind == "square_well":
            return 4.0 * math.pi * self.v0 * self.R**3 / 3.0
        r, v = np.asarray(self.r_grid), np.asarray(self.v_grid)
        # exact for the piecewise-linear interpolant, plus the constant part below r[0]
        r0, r1, v0 = r[:-1], r[1:], v[:-1]
        slope = np.diff(v) / np.diff(r)
        cubes = (r1**3 - r0**3) / 3.0
        seg = v0 * cubes + slope * ((r1**4 - r0**4) / 4.0 - r0 * cubes)
        return 4.0 * math.pi * (math.fsum(seg) + v[0] * r[0] ** 3 / 3.0)

    def breakpoints(self) -> list[float]:
        if self.kind == "tabulated":
            return [x for x in self.r_grid if 0 < x < self.R]
        return []


def _rhs(lam, pot):
    def rhs(y, s):
        u, du, _ = s
        vy = float(pot(y))
        return [du, (0.5 * vy - lam) * u, y * vy * u]
    return rhs


def _interior(pot: PotentialSpec, lam: float):
    """Integrate ``[u, u', int y v u]`` from 0 to the support edge."""
    R = pot.support
    # pieces between tabulation nodes keep the linear interpolant smooth
    edges = [0.0] + pot.breakpoints() + [R]
    state = [0.0, 1.0, 0.0]
    sols = []
    for lo, hi in zip(edges[:-1], edges[1:]):
        sol = integrate.solve_ivp(
            _rhs(lam, pot), (lo, hi), state, method="DOP853",
            rtol=RTOL, atol=ATOL, max_step=R / 200.0, dense_output=True,
        )
        if not sol.success:
            raise ResolutionError(f"radial integration failed: {sol.message}")
        sols.append(sol)
        state = sol.y[:, -1]
    return state, sols


def scattering_length(v: PotentialSpec) -> float:
    """Scattering length: the zero-energy solution is ``u = c (r - a)`` beyond the support."""
    if v.is_zero:
        return 0.0
    (u, du, _), _ = _interior(v, 0.0)
    return v.support - u / du


def _exterior(A, B, lam, rho):
    """``u`` and ``u'`` at distance ``rho`` past the support for ``u(R) = A``, ``u'(R) = B``."""
    k = math.sqrt(lam)
    kr = k * rho
    s = rho * np.sinc(kr / math.pi)  # sin(k rho) / k, finite at k = 0
    c = np.cos(kr)
    return A * c + B * s, -lam * A * s + B * c


@dataclass(frozen=True)
class ScatteringSolution:
    """Solution of the Neumann problem for ``v_N = N^2 v(N .)`` on the ball of radius ``ell``.

    ``lam`` is the eigenvalue in scaled coordinates; ``lambda_N = N^2 lam``.
    The interior profile is scaled so that ``f(ell) = 1``.
    """

    potential: PotentialSpec
    ell: float
    N: float
    a: float
    lam: float
    scale: float
    u_R: float
    du_R: float
    W0_integral: float
    _interior_sols: tuple = field(repr=False, default=())

    @property
    def a_N(self) -> float:
        return self.a / self.N

    @property
    def lambda_N(self) -> float:
        return self.N**2 * self.lam

    @property
    def R_ball(self) -> float:
        return self.N * self.ell

    # -- scaled profile -------------------------------------------------
    def u(self, y):
        """Normalized ``u(y) = y f(y)`` in scaled coordinates (``f = 1`` past the ball)."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        out = np.empty_like(y)
        R = self.potential.support
        inside = y <= R
        if np.any(inside):
            out[inside] = self.scale * self._u_interior_raw(y[inside])
        mid = (~inside) & (y <= self.R_ball)
        if np.any(mid):
            out[mid] = self.scale * _exterior(self.u_R, self.du_R, self.lam, y[mid] - R)[0]
        far = y > self.R_ball
        out[far] = y[far]
        return out

    def one_minus_f_times_y(self, y):
        """``y - u(y)``, evaluated without cancellation past the support."""
        y = np.atleast_1d(np.asarray(y, dtype=float))
        R = self.potential.support
        out = y - self.u(y)
        ext = (y > R) & (y <= self.R_ball)
        if np.any(ext):
            rho = y[ext] - R
            A, B = self.scale * self.u_R, self.scale * self.du_R
            k = math.sqrt(self.lam)
            s = rho * np.sinc(k * rho / math.pi)
            one_minus_cos = 2.0 * np.sin(0.5 * k * rho) ** 2
            # rho - sin(k rho)/k via series when k rho is small
            kr = k * rho
            rho_minus_s = np.where(
                kr < 1e-2,
                rho * kr**2 / 6.0 * (1 - kr**2 / 20.0 + kr**4 / 840.0),
                rho - s,
            )
            out[ext] = (R - A) + rho * (1.0 - B) + A * one_minus_cos + B * rho_minus_s
        return out

    def _u_interior_raw(self, y):
        out = np.empty_like(y)
        for sol in self._interior_sols:
            lo, hi = sol.t[0], sol.t[-1]
            m = (y >= lo) & (y <= hi)
            if np.any(m):
                out[m] = sol.sol(y[m])[0]
        return out

    def f_profile(self, r):
        """``f_N(r)`` in box units; equal to 1 for ``r >= ell``."""
        r = np.atleast_1d(np.asarray(r, dtype=float))
        y = self.N * r
        out = np.ones_like(y)
        m = (y > 0) & (y < self.R_ball)
        out[m] = self.u(y[m]) / y[m]
        z = y == 0
        if np.any(z):
            out[z] = self.scale  # u'(0) = 1 in the raw normalization
        return out

    # -- Fourier data ---------------------------------------------------
    def _sine_integral(self, fn, q, lo, hi):
        if hi <= lo:
            return 0.0
        return quadrature(fn, lo, hi, tol=QUAD_TOL, weight="sin", wvar=q).value

    def _interior_points(self):
        return [0.0] + self.potential.breakpoints() + [self.potential.support]

    def W(self, p: float) -> float:
        """``(v_N f_N)^(p) = int v_N f_N e^{-ipx} dx``, the convolution of the Fourier coefficients."""
        if self.potential.is_zero:
            return 0.0
        q = abs(p) / self.N
        if q == 0.0:
            return self.W0_integral / self.N
        vu = lambda y: float(self.potential(y)) * float(self.u(y)[0])
        pts = self._interior_points()
        total = math.fsum(self._sine_integral(vu, q, lo, hi) for lo, hi in zip(pts[:-1], pts[1:]))
        return 4.0 * math.pi / (self.N * q) * total

    def _sine_ball(self, fn, q):
        pts = self._interior_points()
        parts = [self._sine_integral(fn, q, lo, hi) for lo, hi in zip(pts[:-1], pts[1:])]
        parts.append(self._sine_integral(fn, q, self.potential.support, self.R_ball))
        return math.fsum(parts)

    def eta(self, p: float) -> float:
        """``eta_p = -(1 - f_N)^(p)``; real and even in ``p``."""
        if self.potential.is_zero:
            return 0.0
        q = abs(p) / self.N
        g = lambda y: float(self.one_minus_f_times_y(y)[0])
        if q == 0.0:
            pts = self._interior_points() + [self.R_ball]
            val = math.fsum(
                quadrature(lambda y: y * g(y), lo, hi, tol=QUAD_TOL).value
                for lo, hi in zip(pts[:-1], pts[1:])
            )
            return -4.0 * math.pi * val / self.N**3
        return -4.0 * math.pi / (self.N**3 * q) * self._sine_ball(g, q)

    def identity_terms(self, p: float) -> tuple[float, float, float]:
        """The three pieces of the momentum-space form of the Neumann equation at ``p != 0``.

        Returns ``(p^2 eta_p, W(p) / 2, -lambda_N (f_N 1_ball)^(p))``; their sum
        vanishes when the equation and both boundary conditions hold.
        """
        q = abs(p) / self.N
        if q == 0:
            raise ContractError("the identity is evaluated at nonzero momentum")
        kin = p * p * self.eta(p)
        half_W = 0.5 * self.W(p)
        uq = lambda y: float(self.u(y)[0])
        ball = self.lam * 4.0 * math.pi / (self.N * q) * self._sine_ball(uq, q)
        return kin, half_W, -ball

    def identity_residual(self, p: float) -> float:
        """Relative residual of :meth:`identity_terms`."""
        terms = self.identity_terms(p)
        return abs(math.fsum(terms)) / max(abs(t) for t in terms)

    def check_positivity(self, momenta) -> None:
        """Raise :class:`PositivityError` if ``W`` is negative at any of ``momenta``."""
        for p in momenta:
            w = self.W(p)
            if w < 0:
                raise PositivityError(f"W({p}) = {w} < 0; the Bogoliubov modes are unstable")


def solve_neumann(v: PotentialSpec, ell: float, N: float, L: float | None = None) -> ScatteringSolution:
    """Ground state of ``-Delta f + v_N f / 2 = lambda_N f`` on ``|x| <= ell`` with Neumann data.

    Solved by shooting: the mismatch ``R_b u'(R_b) - u(R_b)`` equals the
    scattering length (times a positive constant) at ``lam = 0`` and changes
    sign at the ground-state eigenvalue, which is bracketed and refined with
    Brent's method.
    """
    if not (ell > 0 and N > 0):
        raise ContractError("need ell > 0 and N > 0")
    if L is not None and not ell < L / 2:
        raise ContractError(f"ell={ell} must be smaller than L/2={L / 2}")
    R = v.support
    Rb = N * ell
    if not R < Rb:
        raise ContractError(f"support of v_N (radius {R / N}) must lie inside the ball of radius {ell}")
    if v.is_zero:
        return ScatteringSolution(v, ell, N, 0.0, 0.0, 1.0, R, 1.0, 0.0, ())

    a = scattering_length(v)

    def mismatch(lam):
        (uR, duR, _), _ = _interior(v, lam)
        u_b, du_b = _exterior(uR, duR, lam, Rb - R)
        return (Rb * du_b - u_b) / abs(uR)

    g0 = mismatch(0.0)
    if not g0 > 0:
        raise ResolutionError(f"Neumann mismatch at lam=0 is {g0}; expected a positive value")
    hi = 3.0 * a / Rb**3
    for _ in range(100):
        if mismatch(hi) < 0:
            break
        hi *= 2.0
    else:
        raise ResolutionError("could not bracket the Neumann eigenvalue")
    lam, info = optimize.brentq(mismatch, 0.0, hi, xtol=1e-300, rtol=1e-15, maxiter=200, full_output=True)
    if not info.converged:
        raise ResolutionError(f"Neumann eigenvalue iteration did not converge: {info.flag}")
    (uR, duR, Iv), sols = _interior(v, lam)
    u_b, _ = _exterior(uR, duR, lam, Rb - R)
    scale = Rb / u_b
    if not (u_b > 0 and uR > 0):
        raise ResolutionError("profile has a node; not the ground state")
    return ScatteringSolution(
        potential=v,
        ell=ell,
        N=N,
        a=a,
        lam=lam,
        scale=scale,
        u_R=uR,
        du_R=duR,
        W0_integral=4.0 * math.pi * scale * Iv,
        _interior_sols=tuple(sols),
    )


def v_conv_f(sol: ScatteringSolution, p: float) -> float:
    return sol.W(p)


def eta_fourier(sol: ScatteringSolution, p: float) -> float:
    return sol.eta(p)
