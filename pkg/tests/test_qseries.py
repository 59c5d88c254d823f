import cmath
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thetanv.qseries import (
    FracQSeries,
    JacobiQZSeries,
    PrecisionError,
    eisenstein,
    eta,
    eta_power,
    jacobi_theta,
    numeric_eval,
)


def q(prec, *terms):
    return FracQSeries(1, dict(terms), prec)


def _naive_product(prec, power):
    out = np.zeros(prec, dtype=object)
    out[0] = 1
    for n in range(1, prec):
        f = np.zeros(prec, dtype=object)
        f[0], f[n] = 1, -1
        for _ in range(power):
            out = np.convolve(out, f)[:prec]
    return list(out)


def test_arith_examples():
    assert q(10, (0, 1), (1, 1)) * q(10, (0, 1), (1, -1)) == q(10, (0, 1), (2, -1))
    a = FracQSeries(8, {1: 1}, 40)
    b = FracQSeries(8, {3: 1}, 40)
    prod_ = a * b
    assert prod_.coefficient(Fraction(1, 2)) == 1
    assert prod_.valuation() == 4 and prod_.denom == 8
    geo = FracQSeries.one(12) / q(12, (0, 1), (1, -1))
    assert geo == q(12, *[(k, 1) for k in range(12)])


def test_product_precision_rule():
    # prec = min(pa + vb, pb + va)
    a = FracQSeries(1, {2: 1, 3: 5}, 10)
    b = FracQSeries(1, {1: 1}, 6)
    assert (a * b).prec == min(10 + 1, 6 + 2)


def test_coefficient_beyond_prec_raises():
    s = q(5, (0, 1))
    with pytest.raises(PrecisionError):
        s[5]
    with pytest.raises(PrecisionError):
        s.coefficient(Fraction(11, 2))
    assert s.coefficient(Fraction(1, 2)) == 0


def test_inverse():
    # a leading q^v is allowed and gives a Laurent tail q^-v
    inv = q(5, (1, 2), (2, 2)).inverse()
    assert inv.valuation() == -1 and inv[-1] == Fraction(1, 2) and inv[0] == Fraction(-1, 2)
    with pytest.raises(ZeroDivisionError):
        FracQSeries.one(5) / q(5)


def _series(max_denom=6):
    @st.composite
    def build(draw):
        D = draw(st.integers(1, max_denom))
        prec = draw(st.integers(1, 30))
        coeffs = draw(st.dictionaries(st.integers(0, 29), st.integers(-9, 9), max_size=8))
        return FracQSeries(D, coeffs, prec)
    return build()


@settings(max_examples=80, deadline=None)
@given(_series(), _series(), _series())
def test_ring_axioms(a, b, c):
    assert ((a * b) * c).agrees_with(a * (b * c))
    assert (a * (b + c)).agrees_with(a * b + a * c)
    assert (a + b).agrees_with(b + a)
    assert (a - a).is_zero()


@settings(max_examples=40, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=6), st.lists(st.integers(-5, 5), min_size=1, max_size=6),
       st.integers(4, 12))
def test_precision_soundness(xs, ys, prec):
    def build(vals, p):
        return FracQSeries(2, {k: v for k, v in enumerate(vals)}, p)
    low = build(xs, prec) * build(ys, prec)
    high = build(xs, prec + 10) * build(ys, prec + 10)
    assert low.agrees_with(high)


def test_eta_expansion():
    s = eta(6)
    assert s.denom == 24 and s.valuation() == 1 and s[1] == 1
    assert s.coefficient(Fraction(25, 24)) == -1
    assert s.coefficient(Fraction(49, 24)) == -1
    assert s.coefficient(Fraction(1 + 24 * 5, 24)) == 1  # pentagonal exponent 5


def test_eta24_is_delta():
    d = eta_power(24, 6)
    assert [d.coefficient(n) for n in range(1, 6)] == [1, -24, 252, -1472, 4830]
    naive = _naive_product(5, 24)
    assert [d.coefficient(n + 1) for n in range(5)] == naive
    assert (eta(6) ** 24).agrees_with(d)


def test_eta_power_matches_naive_product():
    for k in (1, 2, 3, 18):
        s = eta_power(k, 8)
        naive = _naive_product(8, k)
        assert [s[k + 24 * j] for j in range(8)] == naive


def test_eisenstein():
    e4, e6 = eisenstein(4, 8), eisenstein(6, 8)
    assert [e4[n] for n in range(3)] == [1, 240, 2160]
    assert [e6[n] for n in range(2)] == [1, -504]
    for n in range(1, 8):
        assert e4[n] == 240 * sum(d**3 for d in range(1, n + 1) if n % d == 0)
    delta = eta_power(24, 8).with_denom(24)
    lhs = (e4**3 - e6**2).with_denom(24)
    assert lhs.agrees_with(delta * 1728)
    with pytest.raises(ValueError):
        eisenstein(8, 4)


def test_jacobi_theta():
    th = jacobi_theta(6)
    assert th.denom == 8 and th.valuation() == 1
    assert th.get(1, 1) == 1 and th.get(1, -1) == -1
    sq = th * th
    assert sq.get(2, 2) == 1 and sq.get(2, 0) == -2 and sq.get(2, -2) == 1
    assert all(r % 2 == 0 for (_, r) in sq.coeffs)
    assert th.at_zeta_one().is_zero()
    assert th.reflect() == -th


def test_jacobi_series_json_round_trip():
    th = jacobi_theta(4)
    assert JacobiQZSeries.from_json(th.to_json()) == th
    s = eta(4)
    assert FracQSeries.from_json(s.to_json()) == s


def test_numeric_eval():
    one = FracQSeries.one(5)
    assert numeric_eval(one, 1j)[0] == 1
    val, tail = numeric_eval(q(3, (1, 1)), 1j)
    assert abs(val - math.exp(-2 * math.pi)) < 1e-15
    assert abs(val - 0.0018674) < 1e-7
    v, tail = numeric_eval(eta(40), 1j)
    classical = math.gamma(0.25) / (2 * math.pi**0.75)
    assert abs(abs(v) - classical) < 1e-12 and tail < 1e-12


def test_numeric_eval_tail_guard():
    with pytest.raises(PrecisionError):
        numeric_eval(eta(2), 0.05j, tol=1e-10)
    with pytest.raises(ValueError):
        numeric_eval(eta(2), -1j)


def test_numeric_theta_against_sum():
    th = jacobi_theta(30)
    tau, z = 0.3 + 1.1j, 0.2 - 0.1j
    want = sum((-1) ** n * cmath.exp(2j * cmath.pi * ((n + 0.5) ** 2 / 2 * tau + (n + 0.5) * z))
               for n in range(-40, 40))
    got, tail = numeric_eval(th, tau, z)
    assert abs(got - want) < 1e-12
