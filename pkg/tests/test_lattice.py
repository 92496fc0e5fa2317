import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from bosegp.errors import ContractError, EmptyLatticeError, ResolutionError
from bosegp.lattice import (
    MomentumSets,
    build_lattice,
    classify,
    convolve,
    count_representations,
    enumerate_shells_bruteforce,
    is_lattice_norm,
    lattice_sum,
    region_mask,
    riemann_sum_bound,
)

TWO_PI = 2.0 * math.pi
# sum_{k in Z^3 \ 0} exp(-|k|^2) = theta_3(0, 1/e)^3 - 1, from mpmath
THETA_SUM = 4.5700562455953886


def test_shells_small_radius():
    lat = build_lattice(TWO_PI, 1.5)
    assert lat.shells == [(1.0, 6), (2.0, 12)]


def test_shells_up_to_six():
    lat = build_lattice(TWO_PI, 2.5)
    assert lat.shells == [(1.0, 6), (2.0, 12), (3.0, 8), (4.0, 6), (5.0, 24), (6.0, 24)]


def test_unit_box_first_shell():
    lat = build_lattice(1.0, 2.0 * math.pi)
    assert len(lat.shells) == 1
    assert lat.shells[0][1] == 6
    assert lat.shells[0][0] == pytest.approx(TWO_PI**2, rel=1e-15)


def test_empty_lattice_rejected():
    with pytest.raises(EmptyLatticeError):
        build_lattice(1.0, 6.0)


def test_counts_match_bruteforce():
    counts = count_representations(400)
    brute = enumerate_shells_bruteforce(400)
    for n in range(1, 401):
        assert counts[n] == brute.get(n, 0)


def test_counts_known_values():
    # r_3(n) for n = 0..12 (OEIS A005875)
    ref = [1, 6, 12, 8, 6, 24, 24, 0, 12, 30, 24, 24, 8]
    assert list(count_representations(12)) == ref


@given(st.integers(min_value=1, max_value=3000))
@settings(max_examples=60, deadline=None)
def test_three_square_criterion(n):
    counts = count_representations(n)
    assert (counts[n] > 0) == is_lattice_norm(n * TWO_PI**2, 1.0)


def test_gaussian_sum_against_theta():
    lat = build_lattice(TWO_PI, 12.0)
    s = lattice_sum(lambda p2: np.exp(-p2), lat)
    assert s.value == pytest.approx(THETA_SUM, rel=1e-13)
    assert 0 <= s.tail_bound < 1e-40


def test_riemann_bound_dominates_gaussian():
    bound = riemann_sum_bound(lambda r: np.exp(-np.asarray(r) ** 2), 0.0, TWO_PI)
    assert bound >= THETA_SUM


@given(st.floats(min_value=0.2, max_value=5.0), st.floats(min_value=0.0, max_value=4.0))
@settings(max_examples=25, deadline=None)
def test_riemann_bound_dominates_tail(c, cut):
    f = lambda r: np.exp(-c * np.asarray(r, dtype=float))
    bound = riemann_sum_bound(f, cut, TWO_PI)
    lat = build_lattice(TWO_PI, cut + 60.0 / c + 5.0)
    exact = float(np.sum(lat.mult * f(np.sqrt(lat.p2)) * (np.sqrt(lat.p2) >= cut)))
    assert bound >= exact


def test_riemann_bound_zero_function():
    assert riemann_sum_bound(lambda r: 0.0 * np.asarray(r), 3.0, 1.0) == 0.0


def test_unbounded_sum_requires_decreasing_summand():
    lat = build_lattice(TWO_PI, 4.0)
    with pytest.raises(ContractError):
        lattice_sum(lambda p2: p2, lat)


def test_bounded_region_beyond_radius():
    lat = build_lattice(TWO_PI, 2.0)
    with pytest.raises(ResolutionError):
        lattice_sum(lambda p2: p2, lat, region=(0.0, 3.0))


def test_region_window_sum():
    lat = build_lattice(TWO_PI, 3.0)
    s = lattice_sum(lambda p2: np.ones_like(p2), lat, region=(1.0, 2.0))
    # shells 2, 3, 4 lie in (1, 2]
    assert s.value == 12 + 8 + 6
    assert s.tail_bound == 0.0


def test_momentum_sets_validation():
    with pytest.raises(ContractError):
        MomentumSets(1e6, delta_B=0.4)
    with pytest.raises(ContractError):
        MomentumSets(1e6, delta_L=0.3, delta_H=0.4)
    with pytest.raises(ContractError):
        MomentumSets(1e6, delta_B=0.0)


def test_classification_radii():
    sets = MomentumSets(1e6, L=1.0, delta_B=0.3)
    assert classify(0.0, sets) == "zero"
    # r_B ~ 63, r_L ~ 316, r_H ~ 3162 in units where 2 pi k has |k| integer
    assert classify(TWO_PI**2 * 1, sets) == "B"
    assert classify(TWO_PI**2 * 20**2, sets) == "I"
    assert classify(TWO_PI**2 * 100**2, sets) == "high-tail"
    assert classify(TWO_PI**2 * 600**2, sets) == "H"
    assert classify(TWO_PI**2 * 7, sets) == "other"


def test_region_masks_partition():
    sets = MomentumSets(1e6, L=1.0, delta_B=0.3)
    lat = build_lattice(1.0, 1.2 * sets.r_L)
    b = region_mask(lat, "B", sets)
    i = region_mask(lat, "I", sets)
    low = region_mask(lat, "L", sets)
    assert not np.any(b & i)
    assert np.array_equal(b | i, low)


def test_convolution_matches_direct_sum():
    lat = build_lattice(TWO_PI, 6.0)
    fhat = lambda q: np.exp(-0.5 * (q * q).sum(axis=1))
    ghat = lambda q: np.exp(-(q * q).sum(axis=1))
    p = np.array([1.0, 0.0, 0.0])
    res = convolve(fhat, ghat, p, lat, tail_majorant=lambda r: np.exp(-np.asarray(r) ** 2))
    k = lat.points().astype(float)
    direct = math.fsum(np.exp(-0.5 * ((p - k) ** 2).sum(axis=1)) * np.exp(-(k * k).sum(axis=1))) / TWO_PI**3
    assert res.value == pytest.approx(direct, rel=1e-14)
    assert not res.truncated
    wide = convolve(fhat, ghat, p, build_lattice(TWO_PI, 12.0))
    assert 0 <= wide.value - res.value <= res.tail_bound


def test_convolution_unbounded_is_flagged():
    lat = build_lattice(TWO_PI, 3.0)
    res = convolve(lambda q: np.ones(len(q)), lambda q: np.ones(len(q)), np.zeros(3), lat)
    assert res.truncated and math.isinf(res.tail_bound)


def test_convolution_compact_support_is_exact():
    lat = build_lattice(TWO_PI, 3.0)
    ghat = lambda q: ((q * q).sum(axis=1) <= 2.0).astype(float)
    res = convolve(lambda q: np.ones(len(q)), ghat, np.zeros(3), lat, support_radius=math.sqrt(2.0))
    assert res.value == pytest.approx(19.0 / TWO_PI**3, rel=1e-15)
    assert res.tail_bound == 0.0
