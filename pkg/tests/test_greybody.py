from __future__ import annotations

import math

import numpy as np
import pytest

from oracles import greybody_T, rw_peak_radius
from scatterbound.errors import DomainError, InsideHorizon
from scatterbound.greybody import (
    GreybodyQuery,
    greybody_bound_1,
    greybody_bound_2,
    greybody_dispersion,
    greybody_numeric,
    lambert_w0,
    radius_from_tortoise,
    regge_wheeler_potential,
    rw_peak,
    tortoise,
)


def sech2(x):
    return 1.0 / math.cosh(x) ** 2


def test_query_validation():
    with pytest.raises(DomainError):
        GreybodyQuery(0.0, 0, 0, 1.0)
    with pytest.raises(DomainError):
        GreybodyQuery(1.0, 3, 3, 1.0)
    with pytest.raises(DomainError):
        GreybodyQuery(1.0, 2, 1, 1.0)
    with pytest.raises(DomainError):
        GreybodyQuery(1.0, 0, 0, 0.0)


def test_potential_values():
    q = GreybodyQuery(1.0, 1, 1, 1.0)
    assert regge_wheeler_potential(q, 3.0) == pytest.approx(2 / 27, rel=1e-15)
    assert regge_wheeler_potential(q, 2.0 + 1e-12) == pytest.approx(0.0, abs=1e-12)
    assert regge_wheeler_potential(q, 1e8) == pytest.approx(0.0, abs=1e-15)
    with pytest.raises(InsideHorizon):
        regge_wheeler_potential(q, 2.0)


@pytest.mark.parametrize("s, ell", [(0, 0), (0, 2), (1, 1), (2, 2), (2, 3)])
def test_potential_nonnegative(s, ell):
    q = GreybodyQuery(1.0, s, ell, 1.0)
    r = np.geomspace(2 + 1e-9, 1e5, 2000)
    assert np.all(regge_wheeler_potential(q, r) >= 0)


def test_tortoise_values():
    assert tortoise(4.0, 1.0) == pytest.approx(4.0, abs=1e-15)
    assert tortoise(8.0, 2.0) == pytest.approx(8.0, abs=1e-15)
    assert tortoise(3.0, 1.0) == pytest.approx(3 - 2 * math.log(2), rel=1e-15)
    assert radius_from_tortoise(-200.0, 1.0) == pytest.approx(2.0, abs=1e-30 + 1e-15)
    with pytest.raises(InsideHorizon):
        tortoise(1.5, 1.0)


@pytest.mark.parametrize("m", [0.5, 1.0, 3.0])
def test_tortoise_round_trip(m):
    r = m * np.concatenate([[2 + 1e-8, 2 + 1e-4], np.geomspace(2.001, 1e6, 300)])
    back = radius_from_tortoise(tortoise(r, m), m)
    assert np.max(np.abs(back - r) / r) <= 1e-10


def test_lambert_values():
    assert lambert_w0(0.0) == 0.0
    assert lambert_w0(math.e) == pytest.approx(1.0, rel=1e-15)
    assert lambert_w0(1.0) == pytest.approx(0.5671432904097838, rel=1e-14)
    for x in (1e-6, 1.0, math.e, 10.0, 1e6):
        w = lambert_w0(x)
        assert abs(w * math.exp(w) - x) / x <= 1e-12
    with pytest.raises(DomainError):
        lambert_w0(-0.1)


def test_lambert_vectorised():
    x = np.array([0.5, 2.0, 50.0])
    w = lambert_w0(x)
    assert w.shape == (3,)
    assert np.allclose(w * np.exp(w), x, rtol=1e-13)


@pytest.mark.parametrize("s, ell, m", [(1, 1, 1.0), (1, 2, 1.0), (1, 3, 2.0), (0, 0, 1.0), (0, 0, 0.5)])
def test_peak_closed_forms(s, ell, m):
    pk = rw_peak(GreybodyQuery(m, s, ell, 1.0))
    if s == 1:
        assert pk.rPeak == 3 * m
        assert pk.vPeak == pytest.approx(ell * (ell + 1) / (27 * m * m), rel=1e-15)
    else:
        assert pk.rPeak == pytest.approx(8 * m / 3)
        assert pk.vPeak == pytest.approx(27 / (1024 * m * m), rel=1e-15)


def test_peak_spot_values():
    pk = rw_peak(GreybodyQuery(1.0, 1, 2, 1.0))
    assert (pk.rPeak, pk.vPeak) == pytest.approx((3.0, 2 / 9))
    pk = rw_peak(GreybodyQuery(1.0, 0, 0, 1.0))
    assert (pk.rPeak, pk.vPeak) == pytest.approx((8 / 3, 27 / 1024))


@pytest.mark.parametrize("s, ell", [(0, 1), (0, 2), (0, 3), (2, 2), (2, 3)])
def test_peak_numeric(s, ell):
    m = 1.0
    q = GreybodyQuery(m, s, ell, 1.0)
    pk = rw_peak(q)
    assert pk.rPeak == pytest.approx(rw_peak_radius(m, s, ell), rel=1e-12)
    assert pk.vPeak < ell * (ell + 1) / 20
    r = np.linspace(2.001, 30.0, 20001)
    assert pk.vPeak >= np.max(regge_wheeler_potential(q, r)) - 1e-15


def test_peak_s0_l1():
    pk = rw_peak(GreybodyQuery(1.0, 0, 1, 1.0))
    assert pk.vPeak < 0.1
    # vPeak / (L/27) = 1 + 2 eps/3 + O(eps^2), eps = 1/2.
    ratio = pk.vPeak / (2 / 27)
    assert abs(ratio - 4 / 3) < 0.25


def test_bound1_values():
    b = greybody_bound_1(GreybodyQuery(1.0, 0, 0, 1 / 8))
    assert b.value == pytest.approx(0.4199743416140261, abs=1e-9)
    assert b.valid
    for ell in (1, 2):
        b = greybody_bound_1(GreybodyQuery(1.0, ell, ell, 0.3))
        assert b.value == pytest.approx(sech2((ell + 1) ** 2 / (8 * 0.3)))
    assert greybody_bound_1(GreybodyQuery(1.0, 1, 3, 1e6)).value == pytest.approx(1.0, abs=1e-10)


def test_bound2_values():
    q = GreybodyQuery(1.0, 1, 1, math.sqrt(4 / 27))
    assert greybody_bound_2(q).value == pytest.approx(32 / 36, rel=1e-12)
    edge = GreybodyQuery(1.0, 0, 0, math.sqrt(27 / 1024))
    assert greybody_bound_2(edge).value == pytest.approx(0.0, abs=1e-12)
    below = greybody_bound_2(GreybodyQuery(1.0, 1, 1, 0.2))
    assert not below.valid


def test_bound2_s1_closed_form_matches_general():
    for w in (0.4, 0.8, 1.5):
        q = GreybodyQuery(1.0, 1, 2, w)
        vp = 6 / 27
        general = 1 - vp * vp / (2 * w * w - vp) ** 2
        assert greybody_bound_2(q).value == pytest.approx(general, rel=1e-12)


def test_bound2_decreases_with_peak():
    w = 1.2
    vals = [greybody_bound_2(GreybodyQuery(1.0, 1, ell, w)).value for ell in (1, 2, 3, 4, 5)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_bound2_beats_bound1_for_vectors():
    grid = np.geomspace(0.05, 2.0, 20)
    wins = total = 0
    for ell in (1, 2, 3):
        for w in grid:
            q = GreybodyQuery(1.0, 1, ell, w)
            b2 = greybody_bound_2(q)
            if b2.valid:
                total += 1
                wins += b2.value >= greybody_bound_1(q).value
    assert wins >= 0.8 * total


def test_dispersion_asymptotes():
    q = GreybodyQuery(1.0, 2, 2, 0.7)
    d = greybody_dispersion(q)
    assert d.k_minus == d.k_plus == 0.7
    lo, hi = d.window
    assert 0.49 - float(d.k2(lo)) <= 1e-12 * 0.49 * 1.01


@pytest.mark.parametrize("s, ell, w", [(1, 1, 0.3), (0, 0, 0.1), (0, 1, 0.25), (2, 2, 0.5), (1, 3, 1.0), (2, 3, 0.6)])
def test_numeric_against_oracle(s, ell, w):
    T = greybody_numeric(GreybodyQuery(1.0, s, ell, w)).T
    assert T == pytest.approx(greybody_T(1.0, s, ell, w, R=8000.0), rel=1e-5)


def test_numeric_mass_scaling():
    # T depends on omega m only.
    a = greybody_numeric(GreybodyQuery(1.0, 1, 1, 0.3)).T
    b = greybody_numeric(GreybodyQuery(2.0, 1, 1, 0.15)).T
    assert a == pytest.approx(b, rel=1e-8)


def test_numeric_spot_vector():
    q = GreybodyQuery(1.0, 1, 1, 1.0)
    T = greybody_numeric(q).T
    b1 = greybody_bound_1(q).value
    b2 = greybody_bound_2(q).value
    assert b1 == pytest.approx(sech2(0.5))
    assert T >= max(b1, b2) >= 0.7864


def test_numeric_high_frequency():
    assert greybody_numeric(GreybodyQuery(1.0, 0, 1, 20.0)).T == pytest.approx(1.0, abs=1e-8)


def test_numeric_low_frequency():
    q = GreybodyQuery(1.0, 2, 2, 0.05)
    res = greybody_numeric(q)
    assert res.T >= greybody_bound_1(q).value
    assert abs(res.T + res.R - 1) <= 1e-9
