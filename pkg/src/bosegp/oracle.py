"""Brute-force verifiers: adaptive quadrature, truncated two-mode Fock space
diagonalization, and the Wick assembly of the two-particle density matrix.

Nothing here uses the closed forms of the other modules; the functions are
meant to be compared against them.
"""
from __future__ import annotations

import math
import warnings
from typing import Callable, Mapping, NamedTuple

import numpy as np
from scipy import integrate, linalg

from .errors import ContractError, ResolutionError


class QuadResult(NamedTuple):
    value: float
    error: float


def _quad_piece(fn, a, b, tol, limit, epsabs=0.0, **kw):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        out = integrate.quad(fn, a, b, epsabs=epsabs, epsrel=tol, limit=limit, full_output=1, **kw)
    value, err, info = out[0], out[1], out[2]
    if not (math.isfinite(value) and math.isfinite(err)):
        raise ResolutionError(
            f"quadrature diverged on [{a}, {b}] (value={value}, error={err}, "
            f"evaluations={info.get('neval')})"
        )
    # a message is only attached when QUADPACK reports a problem
    if len(out) > 3 and err > 10 * max(tol * abs(value), epsabs):
        raise ResolutionError(
            f"quadrature did not converge on [{a}, {b}]: value={value}, error={err}, "
            f"subintervals={info.get('last')}, evaluations={info.get('neval')}: {out[3]}"
        )
    return value, err


def quadrature(
    fn: Callable[[float], float],
    a: float,
    b: float,
    tol: float = 1e-12,
    scale: float | None = None,
    points=None,
    limit: int = 200,
    **kw,
) -> QuadResult:
    """Adaptive Gauss-Kronrod integration of ``fn`` over ``[a, b]`` (``b`` may be inf).

    Semi-infinite ranges are split into geometrically growing panels of base
    width ``scale`` until the panels stop contributing, and the remainder is
    mapped to a finite interval. Raises :class:`ResolutionError` when a panel
    fails to reach ``tol`` relative accuracy or diverges. Extra keywords
    (``weight``, ``wvar``) go to :func:`scipy.integrate.quad`.
    """
    if not math.isinf(b):
        if points is not None:
            kw["points"] = points
        return QuadResult(*_quad_piece(fn, a, b, tol, limit, **kw))
    if b < 0 or math.isinf(a):
        raise ContractError("only [a, inf) with finite a is supported")
    s = scale if scale is not None and scale > 0 else 1.0
    edges = [a]
    if points is not None:
        edges += sorted(x for x in points if x > a)
    total, err = 0.0, 0.0
    lo = a
    for hi in edges[1:]:
        v, e = _quad_piece(fn, lo, hi, tol, limit, **kw)
        total, err, lo = total + v, err + e, hi
    width = s
    for _ in range(200):
        hi = lo + width
        v, e = _quad_piece(fn, lo, hi, tol, limit, **kw)
        total, err, lo = total + v, err + e, hi
        if abs(v) <= 1e-3 * tol * abs(total) or (v == 0.0 and total == 0.0):
            break
        width *= 2.0
    else:
        raise ResolutionError(f"integral over [{a}, inf) does not settle; last panel {v}")
    # QUADPACK's Fourier routine needs an absolute target on infinite ranges
    epsabs = max(tol * abs(total), 1e-300) if kw.get("weight") in ("sin", "cos") else 0.0
    v, e = _quad_piece(fn, lo, math.inf, tol, limit, epsabs=epsabs, **kw)
    return QuadResult(total + v, err + e)


# ---------------------------------------------------------------------------
# Truncated Fock space for one (p, -p) pair
# ---------------------------------------------------------------------------

class FockPairResult(NamedTuple):
    gamma: float
    alpha: float
    E0_pair: float
    spectrum_head: np.ndarray
    tail_estimate: float
    inconclusive: bool


def _pair_blocks(D, g, n_max):
    """Eigen-decompose the pair Hamiltonian block by block.

    ``H = D (n_p + n_-p) + g (a_p^* a_-p^* + a_p a_-p)`` conserves
    ``d = n_p - n_-p``; in the block ``d >= 0`` the basis is
    ``|m + d, m>`` for ``m = 0..n_max - d``.
    """
    blocks = []
    for d in range(n_max + 1):
        m = np.arange(n_max - d + 1, dtype=float)
        diag = D * (2 * m + d)
        off = g * np.sqrt((m[1:] + d) * m[1:])
        if len(m) == 1:
            w, V = diag.copy(), np.ones((1, 1))
        else:
            w, V = linalg.eigh_tridiagonal(diag, off)
        blocks.append((d, m, w, V))
    return blocks


def _pair_dense(D, g, n_max):
    """Dense Hamiltonian on all pairs (n, m), n, m <= n_max. Small n_max only."""
    dim = (n_max + 1) ** 2
    H = np.zeros((dim, dim))
    idx = lambda n, m: n * (n_max + 1) + m
    for n in range(n_max + 1):
        for m in range(n_max + 1):
            H[idx(n, m), idx(n, m)] = D * (n + m)
            if n < n_max and m < n_max:
                amp = g * math.sqrt((n + 1) * (m + 1))
                H[idx(n + 1, m + 1), idx(n, m)] = amp
                H[idx(n, m), idx(n + 1, m + 1)] = amp
    return H


def truncated_fock_pair(
    p2: float,
    mu0: float,
    rho0: float,
    Wp: float,
    beta: float,
    n_max: int = 60,
    tol: float = 1e-8,
    n_head: int = 6,
    dense: bool = False,
) -> FockPairResult:
    """Thermal state of one Bogoliubov pair, by exact diagonalization.

    The Hamiltonian ``(p^2 - mu0 + rho0 Wp)(n_p + n_-p) + rho0 Wp (a_p^* a_-p^* + h.c.)``
    is built on occupations ``n_p, n_-p <= n_max`` with the condensate phase
    fixed real. Returns ``<a_p^* a_p>``, ``<a_p a_-p>``, the lowest eigenvalue
    and the lowest ``n_head`` eigenvalues. ``tail_estimate`` bounds the effect
    of the truncation on the expectations; if it exceeds ``tol`` the result is
    flagged ``inconclusive``.

    The default path diagonalizes the tridiagonal blocks of fixed
    ``n_p - n_-p``; ``dense=True`` diagonalizes the full matrix instead
    (``n_max <= 30``).
    """
    if n_max < 10:
        raise ContractError("n_max must be at least 10")
    if Wp < 0 or rho0 < 0:
        raise ContractError("need Wp >= 0 and rho0 >= 0")
    if not (beta > 0 and p2 - mu0 > 0):
        raise ContractError("need beta > 0 and p^2 - mu0 > 0")
    D = p2 - mu0 + rho0 * Wp
    g = rho0 * Wp
    eps = math.sqrt((p2 - mu0) * (p2 - mu0 + 2 * g))

    if dense:
        if n_max > 30:
            raise ContractError("dense diagonalization limited to n_max <= 30")
        w, V = linalg.eigh(_pair_dense(D, g, n_max))
        E0 = float(w[0])
        bw = np.exp(-beta * (w - E0))
        Z = math.fsum(bw)
        n_idx = np.repeat(np.arange(n_max + 1), n_max + 1)
        m_idx = np.tile(np.arange(n_max + 1), n_max + 1)
        prob = V * V
        gamma = float(bw @ (n_idx @ prob)) / Z
        # <a_p a_-p>: maps (n, m) -> (n-1, m-1)
        ab = np.zeros_like(w)
        for n in range(1, n_max + 1):
            for m in range(1, n_max + 1):
                src, dst = n * (n_max + 1) + m, (n - 1) * (n_max + 1) + (m - 1)
                ab += math.sqrt(n * m) * V[dst] * V[src]
        alpha = float(bw @ ab) / Z
        edge = (n_idx == n_max) | (m_idx == n_max)
        edge_weight = float(bw @ prob[edge].sum(axis=0)) / Z
        head = w[:n_head].copy()
    else:
        blocks = _pair_blocks(D, g, n_max)
        E0 = min(float(b[2][0]) for b in blocks)
        weights, gam_parts, alp_parts, edge_parts, all_w = [], [], [], [], []
        for d, m, w, V in blocks:
            bw = np.exp(-beta * (w - E0))
            mult = 1.0 if d == 0 else 2.0  # block -d is the mirror image
            prob = V * V
            # n_p expectation: block d has n_p = m + d; mirror block has n_p = m
            n_p = (m + d) @ prob if d == 0 else (2 * m + d) @ prob / 2.0
            ab = (np.sqrt((m[1:] + d) * m[1:])[:, None] * V[:-1] * V[1:]).sum(axis=0)
            weights.append(mult * bw)
            gam_parts.append(mult * bw * n_p)
            alp_parts.append(mult * bw * ab)
            edge_parts.append(mult * bw * prob[-1])
            all_w.append(np.repeat(w, 2) if d else w)
        Z = math.fsum(np.concatenate(weights))
        gamma = math.fsum(np.concatenate(gam_parts)) / Z
        alpha = math.fsum(np.concatenate(alp_parts)) / Z
        edge_weight = math.fsum(np.concatenate(edge_parts)) / Z
        head = np.sort(np.concatenate(all_w))[:n_head]

    # Weight that leaks past the cut: the edge population, times the largest
    # occupation it can carry, plus the thermal tail of a free pair above n_max.
    q = math.exp(-beta * eps)
    thermal = (n_max + 1) * q ** (n_max + 1) / (1.0 - q) ** 2 if q < 1 else math.inf
    tail = edge_weight * (n_max + 1) + thermal
    return FockPairResult(
        gamma=gamma,
        alpha=alpha,
        E0_pair=E0,
        spectrum_head=head,
        tail_estimate=tail,
        inconclusive=bool(tail > tol),
    )


# ---------------------------------------------------------------------------
# Two-particle density matrix of the quasi-free trial state
# ---------------------------------------------------------------------------

def _key(k) -> tuple:
    return tuple(int(x) for x in k)


def _neg(k: tuple) -> tuple:
    return tuple(-x for x in k)


def _lookup(table: Mapping, k: tuple) -> complex:
    if not any(k):
        return 0.0
    try:
        return table[k]
    except KeyError:
        raise ContractError(f"momentum {k} missing from occupation table") from None


def wick_2pdm(u1, v1, u2, v2, gamma: Mapping, alpha: Mapping, M0: float, fourth_moment: float) -> complex:
    """``Tr[a_u1^* a_v1^* a_u2 a_v2 Gamma_0]`` for the condensate-times-quasi-free state.

    Momenta are integer lattice vectors; ``gamma`` and ``alpha`` map nonzero
    vectors (tuples) to the one-body occupation and the pairing amplitude.
    ``M0`` and ``fourth_moment`` are ``<|z|^2>`` and ``<|z|^4>`` of the
    condensate distribution. Zero momenta carry no quasi-free occupation.
    """
    u1, v1, u2, v2 = _key(u1), _key(v1), _key(u2), _key(v2)
    z = tuple(0 for _ in u1)
    d = lambda a, b: a == b
    g = lambda k: _lookup(gamma, k)
    al = lambda k: _lookup(alpha, k)
    terms = []
    if u1 == v1 == u2 == v2 == z:
        terms.append(fourth_moment)
    if d(v1, v2) and u1 == z and u2 == z:
        terms.append(M0 * g(v1))
    if d(u1, u2) and v1 == z and v2 == z:
        terms.append(M0 * g(u1))
    if d(u1, v2) and v1 == z and u2 == z:
        terms.append(M0 * g(u1))
    if d(v1, u2) and u1 == z and v2 == z:
        terms.append(M0 * g(v1))
    if d(u2, _neg(v2)) and u1 == z and v1 == z:
        terms.append(M0 * al(u2))
    if d(u1, _neg(v1)) and u2 == z and v2 == z:
        terms.append(M0 * np.conj(al(u1)))
    if d(u1, u2) and d(v1, v2):
        terms.append(g(u1) * g(v1))
    if d(u1, v2) and d(v1, u2):
        terms.append(g(u1) * g(v1))
    if d(u1, _neg(v1)) and d(u2, _neg(v2)):
        terms.append(np.conj(al(u1)) * al(u2))
    re = math.fsum(float(np.real(t)) for t in terms)
    im = math.fsum(float(np.imag(t)) for t in terms)
    return complex(re, im)


def diagonal_contraction(keys, gamma: Mapping, alpha: Mapping, M0: float, fourth_moment: float):
    """``sum_{u, v} Gamma(u, v, u, v)`` over a momentum window, term by term.

    ``keys`` lists the window (the zero vector included). Returns the brute
    sum and the independent moment bookkeeping
    ``<|z|^4> + 2 M0 sum(gamma) + sum(gamma)^2 + sum(gamma^2) + sum(|alpha|^2)``.
    """
    keys = [_key(k) for k in keys]
    brute = math.fsum(
        wick_2pdm(u, v, u, v, gamma, alpha, M0, fourth_moment).real for u in keys for v in keys
    )
    nz = [k for k in keys if any(k)]
    sg = math.fsum(float(gamma[k]) for k in nz)
    sg2 = math.fsum(float(gamma[k]) ** 2 for k in nz)
    sa2 = math.fsum(abs(alpha[k]) ** 2 for k in nz if _neg(k) in alpha)
    book = math.fsum([fourth_moment, 2 * M0 * sg, sg * sg, sg2, sa2])
    return brute, book


# ---------------------------------------------------------------------------
# Quadrature oracles for the condensate and the thermodynamic-limit integral
# ---------------------------------------------------------------------------

class CondensateQuad(NamedTuple):
    log_Z: float
    moments: np.ndarray
    entropy: float


def condensate_quadrature(beta: float, h: float, mu: float, kmax: int = 4, tol: float = 1e-13) -> CondensateQuad:
    """Moments of ``exp(-beta (h x^2 - mu x))`` on ``x >= 0`` by direct integration.

    Here ``x = |z|^2`` and the complex measure ``dx dy / pi`` reduces to
    ``dx``. The exponent is shifted by its minimum so nothing overflows; the
    panels are laid out around the peak. The entropy is integrated as
    ``-int g ln g``.
    """
    if not (beta > 0 and h > 0):
        raise ContractError("need beta > 0 and h > 0")
    peak = max(mu / (2 * h), 0.0)
    psi_min = -beta * mu * mu / (4 * h) if mu > 0 else 0.0
    if mu > 0:
        # completed square: no cancellation between the two terms near the peak
        shifted = lambda x: beta * h * (x - peak) ** 2
    else:
        shifted = lambda x: beta * (h * x * x - mu * x)
    width = 1.0 / math.sqrt(beta * h)
    if mu < 0:
        width = min(width, 1.0 / (beta * abs(mu)))
    offsets = [1, 2, 4, 8, 16, 32, 64]
    pts = sorted({min(max(peak + s * o * width, 0.0), peak + 64 * width) for o in offsets for s in (-1, 1)} | {peak})
    pts = [x for x in pts if x > 0]
    top = peak + 64 * width

    def integrate_weight(w):
        f = lambda x: w(x) * math.exp(-shifted(x))
        edges = [0.0] + pts
        total = math.fsum(_quad_piece(f, lo, hi, tol, 200)[0] for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo)
        # the tail is many widths past the peak; judge it against the bulk
        tail = _quad_piece(f, top, math.inf, tol, 200, epsabs=1e-3 * tol * abs(total))[0]
        return total + tail

    Z0 = integrate_weight(lambda x: 1.0)
    log_Z = math.log(Z0) - psi_min
    moments = np.array([integrate_weight(lambda x, k=k: x**k) / Z0 for k in range(kmax + 1)])

    def neg_g_log_g(x):
        log_g = -shifted(x) - math.log(Z0)
        return -math.exp(log_g) * log_g

    edges = [0.0] + pts
    S = math.fsum(_quad_piece(neg_g_log_g, lo, hi, tol, 200)[0] for lo, hi in zip(edges[:-1], edges[1:]) if hi > lo)
    S += _quad_piece(neg_g_log_g, top, math.inf, tol, 200, epsabs=1e-3 * tol * max(abs(S), 1.0))[0]
    # -g ln g integrates the shifted density; undo the shift of ln g
    return CondensateQuad(log_Z=log_Z, moments=moments, entropy=S)


def lhy_quadrature(beta: float, a_rho0: float, tol: float = 1e-12) -> QuadResult:
    """``-(1 / (2 beta (2 pi)^3)) int_{R^3} [A/p^2 - ln(1 + A/p^2)] dp`` with ``A = 16 pi a rho0``.

    Radial quadrature in ``t = |p| / sqrt(A)`` on ``[0, T]`` plus the
    convergent large-``t`` series of the integrand for the tail.
    """
    if a_rho0 < 0:
        raise ContractError("a * rho0 must be nonnegative")
    if a_rho0 == 0:
        return QuadResult(0.0, 0.0)
    A = 16.0 * math.pi * a_rho0
    T = 20.0

    def f(t):
        if t == 0.0:
            return 1.0
        return 1.0 - t * t * math.log1p(1.0 / (t * t))

    body, err = _quad_piece(f, 0.0, T, tol, 200, points=[1.0])
    # 1 - t^2 ln(1 + 1/t^2) = sum_{n>=2} (-1)^n t^(2-2n) / n
    tail = math.fsum((-1) ** n * T ** (3 - 2 * n) / (n * (2 * n - 3)) for n in range(2, 40))
    radial = body + tail
    pref = -4.0 * math.pi * A**1.5 / (2.0 * beta * (2.0 * math.pi) ** 3)
    return QuadResult(pref * radial, abs(pref) * err)
