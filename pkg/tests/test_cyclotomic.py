import cmath
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from thetanv.arith import euler_phi
from thetanv.cyclotomic import (
    CycloMatrix,
    CycloNumber,
    change_order,
    cyclotomic_poly,
    exact_rank,
    group_ring_vanishes,
    kronecker_product,
    root_of_unity,
)


def _phi_oracle(n):
    # prod over primitive roots, rounded; fine for small n
    roots = [cmath.exp(2j * cmath.pi * k / n) for k in range(1, n + 1) if np.gcd(k, n) == 1]
    return [int(round(c.real)) for c in np.poly(roots)[::-1]]


@pytest.mark.parametrize("n", list(range(1, 41)) + [105])
def test_cyclotomic_poly_matches_root_product(n):
    assert list(cyclotomic_poly(n)) == _phi_oracle(n)


def test_cyclotomic_poly_degree_and_roots_large():
    for n in (210, 385, 1155, 7560):
        poly = cyclotomic_poly(n)
        assert len(poly) - 1 == euler_phi(n)
        z = cmath.exp(2j * cmath.pi / n)
        val = np.polyval(np.array(poly[::-1], dtype=float), z)
        assert abs(val) < 1e-6 * sum(abs(c) for c in poly)
    assert cyclotomic_poly(105)[7] == -2  # first coefficient outside {-1, 0, 1}


def test_root_of_unity_examples():
    i = root_of_unity(4, 1)
    assert abs(i.embed() - 1j) < 1e-12
    assert root_of_unity(1, 0) == CycloNumber.from_int(1)
    assert root_of_unity(3, 1) + root_of_unity(3, 2) == CycloNumber.from_int(-1, 3)
    assert root_of_unity(7, 9) == root_of_unity(7, 2)
    with pytest.raises(ValueError):
        root_of_unity(0, 1)


@settings(deadline=None)
@given(st.integers(1, 120), st.integers(-500, 500))
def test_root_of_unity_properties(n, k):
    z = root_of_unity(n, k)
    assert abs(z.embed() - cmath.exp(2j * cmath.pi * k / n)) < 1e-12
    assert z**n == CycloNumber.from_int(1, n)


def test_field_op_examples():
    i = root_of_unity(4, 1)
    assert (1 + i) * (1 - i) == CycloNumber.from_int(2, 4)
    z8 = root_of_unity(8, 1)
    assert z8 * z8 == i.change_order(8)
    assert i.conjugate() == -i
    with pytest.raises(ZeroDivisionError):
        i / CycloNumber.zero(4)


def test_change_order_examples():
    assert change_order(CycloNumber.from_int(1), 12) == CycloNumber.from_int(1, 12)
    assert change_order(root_of_unity(4, 1), 12) == root_of_unity(12, 3)
    assert change_order(root_of_unity(3, 1), 12) == root_of_unity(12, 4)
    with pytest.raises(ValueError):
        change_order(root_of_unity(4, 1), 6)


def _elements(max_order=120):
    @st.composite
    def build(draw, order=None):
        n = order or draw(st.integers(1, max_order))
        phi = euler_phi(n)
        coeffs = draw(st.lists(st.fractions(min_value=-5, max_value=5, max_denominator=6),
                               min_size=phi, max_size=phi))
        return CycloNumber(n, coeffs)
    return build


@st.composite
def _pair(draw):
    n = draw(st.integers(1, 60))
    b = _elements()
    return draw(b(order=n)), draw(b(order=n))


@settings(max_examples=60, deadline=None)
@given(_pair())
def test_field_axioms_and_embedding(pair):
    a, b = pair
    assert (a - a).is_zero() and not any((a - a).numerators)
    assert a + b == b + a and a * b == b * a
    assert abs((a * b).embed() - a.embed() * b.embed()) < 1e-9 * (1 + abs(a.embed() * b.embed()))
    assert abs(a.conjugate().embed() - a.embed().conjugate()) < 1e-9 * (1 + abs(a.embed()))
    if not b.is_zero():
        assert (a / b) * b == a


@settings(max_examples=40, deadline=None)
@given(_elements(30)(), _elements(30)())
def test_mixed_orders_promote(a, b):
    s = a + b
    assert s.order == np.lcm(a.order, b.order)
    assert abs(s.embed() - a.embed() - b.embed()) < 1e-9


def test_json_round_trip():
    x = CycloNumber(12, [Fraction(1, 3), -2, 0, Fraction(5, 6)])
    assert CycloNumber.from_json(x.to_json()) == x


def test_group_ring_vanishes_matches_exact():
    rng = np.random.default_rng(7)
    for n in (12, 30, 105):
        vecs = rng.integers(-3, 4, size=(40, n))
        # plant exact zeros: multiples of the sum of all p-th roots for p | n
        p = min(q for q in (2, 3, 5, 7) if n % q == 0)
        vecs[::4] = 0
        vecs[::4, :: n // p] = rng.integers(1, 5, size=(10, 1))
        got = group_ring_vanishes(vecs, n)
        want = [CycloNumber.from_group_ring(n, v).is_zero() for v in vecs]
        assert list(got) == want
        assert any(want)


def _mat(order, rows):
    return CycloMatrix([[CycloNumber(order, r) if isinstance(r, list) else r for r in row] for row in rows], order)


def test_exact_rank_examples():
    eye = CycloMatrix([[1, 0], [0, 1]])
    assert exact_rank(eye) == 2
    assert exact_rank(CycloMatrix([[0] * 4] * 3)) == 0
    z5 = root_of_unity(5, 1)
    m = CycloMatrix([[1, 1], [z5, z5]])
    assert exact_rank(m) == 1
    assert (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).is_zero()


def _random_matrix(rng, n, r, c, rank=None):
    def elt():
        return CycloNumber.from_group_ring(n, rng.integers(-2, 3, size=n))
    if rank is None:
        return CycloMatrix([[elt() for _ in range(c)] for _ in range(r)], n)
    left = [[elt() for _ in range(rank)] for _ in range(r)]
    right = [[elt() for _ in range(c)] for _ in range(rank)]
    out = []
    for i in range(r):
        row = []
        for j in range(c):
            acc = CycloNumber.zero(n)
            for k in range(rank):
                acc = acc + left[i][k] * right[k][j]
            row.append(acc)
        out.append(row)
    return CycloMatrix(out, n)


def test_exact_rank_agrees_with_svd():
    rng = np.random.default_rng(3)
    for trial in range(25):
        n = int(rng.integers(1, 61))
        r, c = (int(x) for x in rng.integers(1, 9, size=2))
        k = int(rng.integers(0, min(r, c) + 1))
        m = _random_matrix(rng, n, r, c, rank=k)
        sv = np.linalg.svd(m.to_complex(), compute_uv=False)
        float_rank = int((sv > 1e-8 * max(1.0, sv.max())).sum())
        assert exact_rank(m) == float_rank <= k


def test_exact_rank_invariances():
    rng = np.random.default_rng(11)
    m = _random_matrix(rng, 15, 5, 6, rank=3)
    base = exact_rank(m)
    assert base == 3
    assert exact_rank(m.permuted([4, 2, 0, 1, 3], [5, 0, 3, 1, 2, 4])) == base
    scale = root_of_unity(15, 4) + 2
    scaled = CycloMatrix([[x * scale for x in m.entries[0]]] + [list(r) for r in m.entries[1:]], 15)
    assert exact_rank(scaled) == base


def test_kronecker_examples():
    eye2 = CycloMatrix([[1, 0], [0, 1]])
    eye4 = CycloMatrix([[int(i == j) for j in range(4)] for i in range(4)])
    assert kronecker_product(eye2, eye2) == eye4
    assert kronecker_product(CycloMatrix([[1], [0]]), CycloMatrix([[1, 1]])) == CycloMatrix([[1, 1], [0, 0]])


def test_kronecker_rank_multiplies():
    rng = np.random.default_rng(5)
    for _ in range(6):
        a = _random_matrix(rng, 5, 2, 2, rank=int(rng.integers(0, 3)))
        b = _random_matrix(rng, 12, 3, 3, rank=int(rng.integers(0, 4)))
        k = kronecker_product(a, b)
        assert k.order == 60
        assert exact_rank(k) == exact_rank(a) * exact_rank(b)
        assert k[1 * 3 + 2, 0 * 3 + 1] == a[1, 0] * b[2, 1]
