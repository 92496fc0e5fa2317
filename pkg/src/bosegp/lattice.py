"""Dual torus lattice (2*pi/L) Z^3: shells, momentum windows, certified sums.

Every summand in this package depends on a momentum only through |p|^2, so
the lattice is stored as shells ``(|k|^2, multiplicity)`` with integer
``k``. Sums are accumulated in ascending shell order, which makes them
reproducible to the last bit for a given lattice.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .errors import ContractError, EmptyLatticeError, ResolutionError
from .oracle import quadrature

TWO_PI = 2.0 * math.pi
SQRT3 = math.sqrt(3.0)

# Brute-force vector enumeration is kept for small radii only.
MAX_POINT_RADIUS = 64

LABELS = ("zero", "B", "I", "high-tail", "H", "other")


def count_representations(n_max: int) -> np.ndarray:
    """Number of integer triples ``k`` with ``|k|^2 = n`` for ``n = 0..n_max``.

    Counts the same triples as a full scan of the cube ``[-K, K]^3`` but
    groups them by the first two coordinates, so the cost is O(K * n_max)
    instead of O(K^3).
    """
    if n_max < 0:
        raise ContractError("n_max must be nonnegative")
    K = math.isqrt(n_max)
    r1 = np.zeros(n_max + 1, dtype=np.int64)
    r1[0] = 1
    for s in range(1, K + 1):
        r1[s * s] = 2
    r2 = np.zeros_like(r1)
    for s in range(K + 1):
        s2 = s * s
        r2[s2:] += r1[s2] * r1[: n_max + 1 - s2]
    r3 = np.zeros_like(r1)
    for s in range(K + 1):
        s2 = s * s
        r3[s2:] += r1[s2] * r2[: n_max + 1 - s2]
    return r3


def enumerate_shells_bruteforce(n_max: int) -> dict[int, int]:
    """Direct scan over all integer triples with ``|k|^2 <= n_max``.

    Test oracle for :func:`count_representations`; only for small ``n_max``.
    """
    K = math.isqrt(n_max)
    rng = np.arange(-K, K + 1)
    kx, ky, kz = np.meshgrid(rng, rng, rng, indexing="ij")
    n = (kx * kx + ky * ky + kz * kz).ravel()
    n = n[(n > 0) & (n <= n_max)]
    values, counts = np.unique(n, return_counts=True)
    return {int(v): int(c) for v, c in zip(values, counts)}


@dataclass(frozen=True)
class MomentumLattice:
    """Nonzero shells of (2*pi/L) Z^3 with ``|p| <= p_max``.

    ``norms`` holds the integer ``|k|^2`` of each shell (strictly increasing)
    and ``mult`` the number of lattice vectors on it.
    """

    L: float
    p_max: float
    norms: np.ndarray = field(repr=False)
    mult: np.ndarray = field(repr=False)

    @property
    def unit(self) -> float:
        """Smallest nonzero momentum, 2*pi/L."""
        return TWO_PI / self.L

    @property
    def p2(self) -> np.ndarray:
        return self.unit**2 * self.norms

    @property
    def n_max(self) -> int:
        return int(self.norms[-1])

    @property
    def shells(self) -> list[tuple[float, int]]:
        return [(float(a), int(m)) for a, m in zip(self.p2, self.mult)]

    @property
    def n_points(self) -> int:
        """Number of nonzero lattice vectors inside the radius."""
        return int(self.mult.sum())

    def points(self) -> np.ndarray:
        """All integer vectors ``k`` (including 0) with ``|2 pi k / L| <= p_max``."""
        K = math.isqrt(self.n_max)
        if K > MAX_POINT_RADIUS:
            raise ContractError(
                f"vector enumeration limited to |k| <= {MAX_POINT_RADIUS}, got {K}"
            )
        rng = np.arange(-K, K + 1)
        k = np.stack(np.meshgrid(rng, rng, rng, indexing="ij"), axis=-1).reshape(-1, 3)
        n = (k * k).sum(axis=1)
        return k[n <= self.n_max]


def build_lattice(L: float, p_max: float) -> MomentumLattice:
    """Shells of the dual lattice up to momentum ``p_max``."""
    if not L > 0:
        raise ContractError(f"L must be positive, got {L}")
    x2 = (p_max * L / TWO_PI) ** 2
    n_max = int(math.floor(x2 * (1.0 + 1e-12)))
    if n_max < 1:
        raise EmptyLatticeError(
            f"p_max={p_max} lies below the first shell 2*pi/L={TWO_PI / L}"
        )
    r3 = count_representations(n_max)
    norms = np.nonzero(r3)[0]
    norms = norms[norms > 0]
    return MomentumLattice(L=float(L), p_max=float(p_max), norms=norms, mult=r3[norms])


def is_lattice_norm(p2: float, L: float, rtol: float = 1e-9) -> bool:
    n = p2 * (L / TWO_PI) ** 2
    k = round(n)
    if abs(n - k) > rtol * max(1.0, n) or k < 0:
        return False
    # Legendre: n is a sum of three squares unless n = 4^a (8b + 7).
    while k and k % 4 == 0:
        k //= 4
    return k % 8 != 7


@dataclass(frozen=True)
class MomentumSets:
    """Momentum windows P_B, P_I, P_L and P_H for ``N`` particles in a box of side ``L``.

    Radii: P_B is ``0 < |p| <= N**delta_B / L``, P_L is ``|p| <= N**(1/3 + delta_L) / L``
    and P_H is ``|p| >= N**(1 - delta_H) / L``.
    """

    N: float
    L: float = 1.0
    delta_B: float = 1.0 / 12.0
    delta_L: float = 1.0 / 12.0
    delta_H: float = 5.0 / 12.0

    def __post_init__(self):
        if min(self.delta_B, self.delta_L, self.delta_H) <= 0:
            raise ContractError("all momentum exponents must be positive")
        if not self.delta_B < 1.0 / 3.0:
            raise ContractError(f"delta_B must be < 1/3, got {self.delta_B}")
        if not self.delta_L + self.delta_H < 2.0 / 3.0:
            raise ContractError(
                f"delta_L + delta_H must be < 2/3, got {self.delta_L + self.delta_H}"
            )
        if not (self.N >= 1 and self.L > 0):
            raise ContractError("need N >= 1 and L > 0")

    @property
    def r_B(self) -> float:
        return self.N**self.delta_B / self.L

    @property
    def r_L(self) -> float:
        return self.N ** (1.0 / 3.0 + self.delta_L) / self.L

    @property
    def r_H(self) -> float:
        return self.N ** (1.0 - self.delta_H) / self.L


def classify_array(p2: np.ndarray, sets: MomentumSets) -> np.ndarray:
    """Vectorized :func:`classify` for arrays of lattice norms."""
    p = np.sqrt(np.asarray(p2, dtype=float))
    out = np.full(p.shape, "high-tail", dtype=object)
    out[p >= sets.r_H] = "H"
    out[(p > sets.r_B) & (p <= sets.r_L)] = "I"
    out[(p > 0) & (p <= sets.r_B)] = "B"
    out[p == 0] = "zero"
    return out


def classify(p2: float, sets: MomentumSets) -> str:
    """Label of a lattice momentum: zero, B, I, high-tail (between P_L and P_H), H.

    Values of ``p2`` that are not norms of (2*pi/L) Z^3 get the label ``other``.
    """
    if not is_lattice_norm(p2, sets.L):
        return "other"
    return str(classify_array(np.array([p2]), sets)[0])


def region_mask(lattice: MomentumLattice, region, sets: MomentumSets | None = None) -> np.ndarray:
    """Boolean mask over the shells of ``lattice`` selecting a region.

    ``region`` is ``None`` (all of Lambda_+^*), a label (``"B"``, ``"I"``,
    ``"L"`` for P_L minus zero, ``"high-tail"``, ``"H"``) or a radius window
    ``(lo, hi)`` meaning ``lo < |p| <= hi`` (either end may be ``None``).
    """
    p = np.sqrt(lattice.p2)
    if region is None:
        return np.ones(p.shape, dtype=bool)
    if isinstance(region, str):
        if sets is None:
            raise ContractError(f"region {region!r} needs MomentumSets")
        if region == "L":
            return p <= sets.r_L
        labels = classify_array(lattice.p2, sets)
        return labels == region
    lo, hi = region
    mask = np.ones(p.shape, dtype=bool)
    if lo is not None:
        mask &= p > lo
    if hi is not None:
        mask &= p <= hi
    return mask


def _region_unbounded(region, sets) -> bool:
    if region is None:
        return True
    if isinstance(region, str):
        return region in ("H", "high-tail")
    return region[1] is None


class LatticeSum(NamedTuple):
    value: float
    tail_bound: float


def lattice_sum(
    f: Callable[[np.ndarray], np.ndarray],
    lattice: MomentumLattice,
    region=None,
    sets: MomentumSets | None = None,
    tail_majorant: Callable[[np.ndarray], np.ndarray] | None = None,
    tail_scale: float | None = None,
) -> LatticeSum:
    """Sum ``f(|p|^2)`` over the nonzero lattice momenta of ``region``.

    The accumulated value covers the shells of ``lattice``. When the region
    reaches past ``p_max`` the omitted part is bounded with
    :func:`riemann_sum_bound` applied to ``tail_majorant`` (a function of
    ``|p|``), or to ``f`` itself after checking that it is nonnegative and
    nonincreasing on the outer shells.
    """
    vals = np.asarray(f(lattice.p2), dtype=float)
    mask = region_mask(lattice, region, sets)
    value = float(np.sum(lattice.mult[mask] * vals[mask]))
    if not _region_unbounded(region, sets):
        hi = region[1] if isinstance(region, tuple) else sets.r_L
        if hi is not None and hi > lattice.p_max * (1 + 1e-12):
            raise ResolutionError(
                f"region reaches |p|={hi} beyond p_max={lattice.p_max}; enlarge p_max"
            )
        return LatticeSum(value, 0.0)
    if tail_majorant is None:
        outer = vals[len(vals) // 2 :]
        if np.any(outer < 0) or np.any(np.diff(outer) > 1e-300 + 1e-12 * np.abs(outer[:-1])):
            raise ContractError(
                "summand is not nonnegative and decreasing on the outer shells; "
                "pass an explicit tail_majorant"
            )

        def tail_majorant(r):
            return f(np.asarray(r) ** 2)

    tail = riemann_sum_bound(tail_majorant, lattice.p_max, lattice.L, scale=tail_scale)
    return LatticeSum(value, tail)


def riemann_sum_bound(
    f: Callable[[np.ndarray], np.ndarray],
    kappa_cut: float,
    L: float,
    scale: float | None = None,
) -> float:
    """Integral majorant for ``sum_{p in Lambda_+^*, |p| >= kappa_cut} f(|p|)``.

    Valid for nonnegative, monotone decreasing ``f``. Evaluates

        (L^3 / 2 pi) * int_{|p| >= [kappa_cut - sqrt(3) 2 pi / L]_+}
            f(|p|) (1 + 3 pi / (L |p|) + 6 pi / (L^2 p^2)) dp

    in radial form. ``scale`` is a hint for the decay length of ``f``.
    """
    r0 = max(kappa_cut - SQRT3 * TWO_PI / L, 0.0)

    def integrand(r):
        r = np.asarray(r, dtype=float)
        return f(r) * (r * r + 3.0 * math.pi * r / L + 6.0 * math.pi / L**2)

    # Probe for an identically vanishing summand before integrating.
    if r0 == 0.0:
        probe = np.array([1e-3, 1e-1, 1.0, 10.0]) * (scale or 1.0)
    else:
        probe = r0 * np.array([1.0, 1.5, 2.0, 4.0])
    if np.all(np.asarray(f(probe)) == 0):
        return 0.0
    value, _ = quadrature(integrand, r0, math.inf, tol=1e-10, scale=scale or max(r0, TWO_PI / L))
    return (L**3 / TWO_PI) * 4.0 * math.pi * value


class ConvolutionResult(NamedTuple):
    value: float
    tail_bound: float
    truncated: bool


def convolve(
    fhat: Callable[[np.ndarray], np.ndarray],
    ghat: Callable[[np.ndarray], np.ndarray],
    p: np.ndarray,
    lattice: MomentumLattice,
    support_radius: float | None = None,
    tail_majorant: Callable[[np.ndarray], np.ndarray] | None = None,
) -> ConvolutionResult:
    """Lattice convolution ``L^-3 sum_q fhat(p - q) ghat(q)`` truncated at ``p_max``.

    ``fhat`` and ``ghat`` take arrays of momentum vectors with shape (n, 3).
    The truncation is exact when ``ghat`` vanishes outside ``support_radius``
    <= ``p_max``; otherwise ``tail_majorant(|q|)``, a decreasing bound on
    ``|fhat(p - q) ghat(q)|``, certifies the omitted terms. Without either
    the result is flagged as truncated.
    """
    unit = TWO_PI / lattice.L
    q = lattice.points() * unit
    p = np.asarray(p, dtype=float).reshape(3)
    terms = np.asarray(fhat(p[None, :] - q)) * np.asarray(ghat(q))
    # fixed order: ascending |q|^2, then lexicographic
    order = np.lexsort((q[:, 2], q[:, 1], q[:, 0], (q * q).sum(axis=1)))
    value = float(math.fsum(terms[order])) / lattice.L**3
    if support_radius is not None and support_radius <= lattice.p_max:
        return ConvolutionResult(value, 0.0, False)
    if tail_majorant is not None:
        tail = riemann_sum_bound(tail_majorant, lattice.p_max, lattice.L) / lattice.L**3
        return ConvolutionResult(value, tail, False)
    return ConvolutionResult(value, math.inf, True)
