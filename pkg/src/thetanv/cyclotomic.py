"""Exact arithmetic in cyclotomic fields Q(zeta_n).

Elements are stored in the power basis 1, zeta, ..., zeta^(phi(n)-1) modulo the
n-th cyclotomic polynomial, as an integer numerator vector over a single
positive denominator in lowest terms. That makes equality a tuple comparison.

Most values this package produces are sums of roots of unity, so there is also
a "group ring" entry point: an integer vector v of length n stands for
sum_k v[k] zeta_n^k and is reduced to the power basis with a cached table of
x^k mod Phi_n.
"""

from __future__ import annotations

import cmath
from fractions import Fraction
from functools import lru_cache
from math import gcd, lcm
from typing import Iterable, Sequence

import numpy as np

from .arith import euler_phi, factorize, is_prime

__all__ = [
    "CycloNumber",
    "CycloMatrix",
    "cyclotomic_poly",
    "reduction_table",
    "root_of_unity",
    "change_order",
    "exact_rank",
    "kronecker_product",
    "degree_one_prime",
    "rank_mod_p",
    "group_ring_vanishes",
]

_INT64_SAFE = 1 << 62


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Coefficients (lowest degree first) of the n-th cyclotomic polynomial."""
    if n < 1:
        raise ValueError(f"order must be positive, got {n}")
    primes = factorize(n).primes
    r = 1
    for p in primes:
        r *= p
    if r != n:
        # Phi_n(x) = Phi_rad(n)(x^(n / rad(n)))
        base = cyclotomic_poly(r)
        out = [0] * ((len(base) - 1) * (n // r) + 1)
        out[:: n // r] = base
        return tuple(out)
    # square-free n: Phi_n = prod_{d | n} (x^d - 1)^mu(n/d)
    poly = np.array([1], dtype=np.int64)
    mults, divs = [], []
    for mask in range(1 << len(primes)):
        d = 1
        for i, p in enumerate(primes):
            if mask >> i & 1:
                d *= p
        (mults if (len(primes) - bin(mask).count("1")) % 2 == 0 else divs).append(d)
    for d in mults:
        poly = np.concatenate((np.zeros(d, np.int64), poly)) - np.concatenate((poly, np.zeros(d, np.int64)))
    for d in divs:
        poly = _div_x_pow_minus_one(poly, d)
    return tuple(int(x) for x in poly)


def _div_x_pow_minus_one(poly: np.ndarray, d: int) -> np.ndarray:
    """Exact quotient poly / (x^d - 1)."""
    m = len(poly) - d
    # q_k = q_{k-d} - poly_k, i.e. q = -cumsum of poly along each residue class mod d
    blocks = -(-m // d)
    padded = np.zeros(blocks * d, dtype=np.int64)
    padded[:m] = poly[:m]
    q = -np.cumsum(padded.reshape(blocks, d), axis=0).ravel()[:m]
    check = np.concatenate((np.zeros(d, np.int64), q)) - np.concatenate((q, np.zeros(d, np.int64)))
    assert np.array_equal(check, poly), "inexact cyclotomic division"
    return q


@lru_cache(maxsize=512)
def reduction_table(n: int) -> np.ndarray:
    """Row k holds the power-basis coordinates of zeta_n^k, for 0 <= k < n."""
    phi = euler_phi(n)
    poly = np.array(cyclotomic_poly(n)[:-1], dtype=np.int64)
    table = np.zeros((n, phi), dtype=np.int64)
    row = np.zeros(phi, dtype=np.int64)
    row[0] = 1
    for k in range(n):
        table[k] = row
        top = row[-1]
        row = np.concatenate(([0], row[:-1]))
        if top:
            row -= top * poly
    if np.abs(table).max() > (1 << 40):
        raise OverflowError(f"reduction table for order {n} too large for int64")
    table.setflags(write=False)
    return table


@lru_cache(maxsize=512)
def _table_abs_colsum(n: int) -> int:
    return int(np.abs(reduction_table(n)).sum(axis=0).max())


def _apply_table(n: int, vec: Sequence[int]) -> list[int]:
    """Reduce an integer group-ring vector of length n to power-basis ints."""
    table = reduction_table(n)
    v = np.asarray(vec, dtype=object)
    big = max((abs(int(x)) for x in vec), default=0)
    if big * _table_abs_colsum(n) < _INT64_SAFE:
        return [int(x) for x in v.astype(np.int64) @ table]
    return [int(x) for x in v @ table.astype(object)]


def group_ring_vanishes(vecs: np.ndarray, n: int, chunk: int = 256) -> np.ndarray:
    """For each integer row v of length n, whether sum_k v[k] zeta_n^k == 0.

    A nonzero algebraic integer has |norm| >= 1, so some primitive embedding
    has modulus >= 1. One FFT gives every embedding; with the rounding error
    bounded well below 1/2, "all primitive embeddings < 1/2" is an exact test.
    """
    vecs = np.atleast_2d(np.asarray(vecs))
    prim = np.array([gcd(k, n) == 1 for k in range(n)])
    out = np.empty(len(vecs), dtype=bool)
    for start in range(0, len(vecs), chunk):
        block = vecs[start : start + chunk].astype(np.float64)
        l1 = np.abs(block).sum(axis=1).max(initial=0.0)
        # generous bound on FFT rounding: 8 log2(n) eps ||v||_1
        assert 8 * max(1.0, np.log2(n)) * 2.3e-16 * l1 < 0.05
        vals = np.abs(np.fft.fft(block, axis=1)[:, prim])
        out[start : start + chunk] = vals.max(axis=1, initial=0.0) < 0.5
    return out


def _fold(n: int, poly: Sequence[int]) -> list[int]:
    out = [0] * n
    for k, c in enumerate(poly):
        if c:
            out[k % n] += c
    return out


class CycloNumber:
    """An exact element of Q(zeta_n)."""

    __slots__ = ("order", "_num", "_den")

    def __init__(self, order: int, coeffs: Iterable = ()):
        if order < 1:
            raise ValueError(f"order must be positive, got {order}")
        phi = euler_phi(order)
        fr = [Fraction(c) for c in coeffs]
        if len(fr) > phi:
            raise ValueError(f"expected at most {phi} coefficients, got {len(fr)}")
        fr += [Fraction(0)] * (phi - len(fr))
        den = lcm(*(c.denominator for c in fr)) if fr else 1
        self._set(order, [int(c * den) for c in fr], den)

    def _set(self, order, num, den):
        if den < 0:
            num, den = [-x for x in num], -den
        g = gcd(den, *num)
        if g > 1:
            num, den = [x // g for x in num], den // g
        self.order = order
        self._num = tuple(num)
        self._den = den

    @classmethod
    def _raw(cls, order: int, num: Sequence[int], den: int = 1) -> "CycloNumber":
        obj = cls.__new__(cls)
        obj._set(order, list(num), den)
        return obj

    @classmethod
    def from_group_ring(cls, order: int, vec: Sequence[int], den: int = 1) -> "CycloNumber":
        """The element (1/den) * sum_k vec[k] zeta_order^k."""
        vec = list(vec)
        if len(vec) != order:
            vec = _fold(order, vec)
        return cls._raw(order, _apply_table(order, vec), den)

    @classmethod
    def from_int(cls, value, order: int = 1) -> "CycloNumber":
        value = Fraction(value)
        phi = euler_phi(order)
        return cls._raw(order, [value.numerator] + [0] * (phi - 1), value.denominator)

    @classmethod
    def zero(cls, order: int = 1) -> "CycloNumber":
        return cls.from_int(0, order)

    @property
    def coeffs(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(x, self._den) for x in self._num)

    @property
    def numerators(self) -> tuple[int, ...]:
        return self._num

    @property
    def denominator(self) -> int:
        return self._den

    def is_zero(self) -> bool:
        return not any(self._num)

    def __bool__(self):
        return not self.is_zero()

    def embed(self) -> complex:
        z = cmath.exp(2j * cmath.pi / self.order)
        return sum(c * z**k for k, c in enumerate(self._num) if c) / self._den

    __complex__ = embed

    def change_order(self, n: int) -> "CycloNumber":
        if n % self.order:
            raise ValueError(f"order {n} is not a multiple of {self.order}")
        if n == self.order:
            return self
        step = n // self.order
        vec = [0] * n
        for k, c in enumerate(self._num):
            vec[k * step] = c
        return CycloNumber._raw(n, _apply_table(n, vec), self._den)

    def _promote(self, other) -> tuple["CycloNumber", "CycloNumber"]:
        if not isinstance(other, CycloNumber):
            other = CycloNumber.from_int(other, self.order)
        n = lcm(self.order, other.order)
        return self.change_order(n), other.change_order(n)

    def __add__(self, other):
        try:
            a, b = self._promote(other)
        except TypeError:
            return NotImplemented
        den = lcm(a._den, b._den)
        fa, fb = den // a._den, den // b._den
        return CycloNumber._raw(a.order, [x * fa + y * fb for x, y in zip(a._num, b._num)], den)

    __radd__ = __add__

    def __neg__(self):
        return CycloNumber._raw(self.order, [-x for x in self._num], self._den)

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Fraction(other)
            return CycloNumber._raw(
                self.order, [x * other.numerator for x in self._num], self._den * other.denominator
            )
        if not isinstance(other, CycloNumber):
            return NotImplemented
        a, b = self._promote(other)
        n = a.order
        prod_ = _poly_mul(a._num, b._num)
        return CycloNumber._raw(n, _apply_table(n, _fold(n, prod_)), a._den * b._den)

    __rmul__ = __mul__

    def galois(self, k: int) -> "CycloNumber":
        """Image under zeta -> zeta^k, gcd(k, order) = 1."""
        n = self.order
        if gcd(k, n) != 1:
            raise ValueError(f"{k} is not a unit mod {n}")
        vec = [0] * n
        for j, c in enumerate(self._num):
            vec[j * k % n] += c
        return CycloNumber._raw(n, _apply_table(n, vec), self._den)

    def inverse(self) -> "CycloNumber":
        if self.is_zero():
            raise ZeroDivisionError("division by zero in cyclotomic field")
        # a^-1 = (product of the other conjugates) / norm(a)
        n = self.order
        rest = CycloNumber.from_int(1, n)
        for k in range(2, n):
            if gcd(k, n) == 1:
                rest = rest * self.galois(k)
        norm = (self * rest).coeffs[0]
        return rest * (1 / norm)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                raise ZeroDivisionError("division by zero in cyclotomic field")
            return self * (1 / Fraction(other))
        if not isinstance(other, CycloNumber):
            return NotImplemented
        a, b = self._promote(other)
        return a * b.inverse()

    def __rtruediv__(self, other):
        return CycloNumber.from_int(other, self.order) / self

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        result = CycloNumber.from_int(1, self.order)
        base = self
        while k:
            if k & 1:
                result = result * base
            base = base * base
            k >>= 1
        return result

    def conjugate(self) -> "CycloNumber":
        n = self.order
        vec = [0] * n
        for k, c in enumerate(self._num):
            vec[-k % n] += c
        return CycloNumber._raw(n, _apply_table(n, vec), self._den)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = CycloNumber.from_int(other, self.order)
        if not isinstance(other, CycloNumber):
            return NotImplemented
        a, b = self._promote(other)
        return a._den == b._den and a._num == b._num

    __hash__ = None  # equal elements of different orders would hash differently

    def __repr__(self):
        terms = []
        for k, c in enumerate(self.coeffs):
            if c:
                terms.append(f"{c}" if k == 0 else f"{c}*z^{k}")
        return f"CycloNumber({self.order}: {' + '.join(terms) or '0'})"

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "num": [x for x in self._num],
            "den": [self._den] * len(self._num),
        }

    @classmethod
    def from_json(cls, data: dict) -> "CycloNumber":
        return cls(data["order"], [Fraction(a, b) for a, b in zip(data["num"], data["den"])])


def _poly_mul(a: Sequence[int], b: Sequence[int]) -> list[int]:
    ma = max((abs(x) for x in a), default=1)
    mb = max((abs(x) for x in b), default=1)
    if not ma or not mb:
        return [0] * (len(a) + len(b) - 1)
    if ma * mb * min(len(a), len(b)) < _INT64_SAFE:
        return [int(x) for x in np.convolve(np.array(a, dtype=np.int64), np.array(b, dtype=np.int64))]
    return list(np.convolve(np.array(a, dtype=object), np.array(b, dtype=object)))


@lru_cache(maxsize=None)
def root_of_unity(n: int, k: int = 1) -> CycloNumber:
    """zeta_n^k = exp(2 pi i k / n) as an element of order n."""
    if n < 1:
        raise ValueError(f"order must be positive, got {n}")
    return CycloNumber._raw(n, [int(x) for x in reduction_table(n)[k % n]], 1)


def change_order(a: CycloNumber, n: int) -> CycloNumber:
    return a.change_order(n)


# --------------------------------------------------------------------------
# matrices


class CycloMatrix:
    """Dense matrix of CycloNumbers sharing one order."""

    def __init__(self, entries: Sequence[Sequence], order: int | None = None):
        rows = [list(r) for r in entries]
        if not rows or not rows[0]:
            raise ValueError("matrix dimensions must be positive")
        if any(len(r) != len(rows[0]) for r in rows):
            raise ValueError("ragged matrix")
        orders = [x.order for r in rows for x in r if isinstance(x, CycloNumber)]
        n = lcm(*orders, order or 1)
        self.order = n
        self.entries = tuple(
            tuple(
                (x if isinstance(x, CycloNumber) else CycloNumber.from_int(x)).change_order(n)
                for x in r
            )
            for r in rows
        )

    @classmethod
    def from_exponents(cls, order: int, exps) -> "CycloMatrix":
        """Entries zeta_order^e, with a negative exponent meaning zero."""
        zero = CycloNumber.zero(order)
        return cls(
            [[root_of_unity(order, int(e)) if e >= 0 else zero for e in row] for row in exps],
            order,
        )

    @property
    def shape(self) -> tuple[int, int]:
        return len(self.entries), len(self.entries[0])

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0])

    def __getitem__(self, ij):
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other):
        if not isinstance(other, CycloMatrix):
            return NotImplemented
        return self.shape == other.shape and all(
            x == y for r, s in zip(self.entries, other.entries) for x, y in zip(r, s)
        )

    __hash__ = None

    def permuted(self, row_perm: Sequence[int], col_perm: Sequence[int]) -> "CycloMatrix":
        return CycloMatrix([[self.entries[i][j] for j in col_perm] for i in row_perm], self.order)

    def to_complex(self) -> np.ndarray:
        return np.array([[x.embed() for x in r] for r in self.entries], dtype=complex)

    def to_json(self) -> dict:
        return {
            "order": self.order,
            "rows": self.rows,
            "cols": self.cols,
            "entries": [[x.to_json() for x in r] for r in self.entries],
        }

    def __repr__(self):
        return f"CycloMatrix(order={self.order}, shape={self.shape})"


def kronecker_product(A: CycloMatrix, B: CycloMatrix) -> CycloMatrix:
    """Block matrix with block (i, j) equal to A[i, j] * B."""
    n = lcm(A.order, B.order)
    a = [[x.change_order(n) for x in r] for r in A.entries]
    b = [[x.change_order(n) for x in r] for r in B.entries]
    out = []
    for ra in a:
        for rb in b:
            out.append([x * y for x in ra for y in rb])
    return CycloMatrix(out, n)


# --------------------------------------------------------------------------
# rank


@lru_cache(maxsize=None)
def degree_one_prime(n: int, floor: int = 1 << 30) -> tuple[int, int]:
    """A prime p = 1 mod n above ``floor`` and a primitive n-th root of unity mod p.

    Reduction modulo a degree-one prime above p is a ring map Z[zeta_n] -> F_p
    sending zeta_n to the returned root.
    """
    p = (floor // n + 1) * n + 1
    while not is_prime(p):
        p += n
    qs = factorize(n).primes
    for x in range(2, p):
        w = pow(x, (p - 1) // n, p)
        if all(pow(w, n // q, p) != 1 for q in qs):
            return p, w
    raise RuntimeError("no primitive root found")  # unreachable for prime p


def rank_mod_p(mat: np.ndarray, p: int) -> int:
    """Rank over F_p (p < 2^31) by Gaussian elimination with first-nonzero pivots."""
    a = np.array(mat, dtype=np.int64) % p
    rows, cols = a.shape
    r = 0
    for c in range(cols):
        if r == rows:
            break
        nz = np.nonzero(a[r:, c])[0]
        if nz.size == 0:
            continue
        piv = r + nz[0]
        if piv != r:
            a[[r, piv]] = a[[piv, r]]
        inv = pow(int(a[r, c]), -1, p)
        a[r] = a[r] * inv % p
        below = a[r + 1 :, c].copy()
        if below.any():
            a[r + 1 :] = (a[r + 1 :] - below[:, None] * a[r]) % p
        r += 1
    return r


def _modular_image(M: CycloMatrix) -> tuple[np.ndarray, int] | None:
    p, w = degree_one_prime(M.order)
    powers = [pow(w, k, p) for k in range(euler_phi(M.order))]
    out = np.zeros(M.shape, dtype=np.int64)
    for i, row in enumerate(M.entries):
        for j, x in enumerate(row):
            if x._den % p == 0:
                return None
            val = sum(c * pw for c, pw in zip(x._num, powers) if c)
            out[i, j] = val * pow(x._den, -1, p) % p
    return out, p


def _primitive_row(row: list) -> list:
    # rescaling a row by a nonzero rational leaves the rank alone and stops
    # integer coefficients from growing geometrically
    den = lcm(*(e._den for e in row))
    nums = [[x * (den // e._den) for x in e._num] for e in row]
    g = gcd(*(x for v in nums for x in v))
    if g == 0:
        return row
    return [CycloNumber._raw(e.order, [x // g for x in v], 1) for e, v in zip(row, nums)]


def _exact_rank_elimination(M: CycloMatrix) -> int:
    rows = [list(r) for r in M.entries]
    nrows, ncols = M.shape
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        piv = next((i for i in range(r, nrows) if not rows[i][c].is_zero()), None)
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][c]
        for i in range(r + 1, nrows):
            f = rows[i][c]
            if f.is_zero():
                continue
            # fraction-free update keeps every entry in the ring spanned so far
            rows[i] = _primitive_row([pv * x - f * y for x, y in zip(rows[i], rows[r])])
        r += 1
    return r


def exact_rank(M: CycloMatrix) -> int:
    """Rank of M over Q(zeta_n).

    A rank computed modulo a degree-one prime is a lower bound for the true
    rank (a nonzero minor mod p is a nonzero algebraic integer). When that
    bound already equals min(rows, cols) it is the answer; otherwise the rank
    is settled by exact fraction-free elimination in the field.
    """
    image = _modular_image(M)
    if image is not None:
        mat, p = image
        if rank_mod_p(mat, p) == min(M.shape):
            return min(M.shape)
    return _exact_rank_elimination(M)
