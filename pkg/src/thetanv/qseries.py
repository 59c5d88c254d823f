"""Truncated expansions in fractional powers of q, optionally with a zeta variable.

Exponents are integers over an explicit denominator: ``e`` in a series with
``denom = D`` means q^(e/D). ``prec`` is a guarantee threshold: every
coefficient with exponent below ``prec`` is correct, nothing at or above it is
stored. Products are only trusted up to min(prec_a + val_b, prec_b + val_a).

Jacobi-type series carry a second key ``r2``, twice the exponent of zeta, so
half-integral zeta powers (as in the odd theta function) are exact integers.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from math import lcm
from typing import Mapping

__all__ = [
    "FracQSeries",
    "JacobiQZSeries",
    "eta",
    "eta_power",
    "jacobi_theta",
    "eisenstein",
    "numeric_eval",
    "PrecisionError",
]


class PrecisionError(ArithmeticError):
    """Requested information lies beyond the guaranteed precision."""


def _clean(coeffs: Mapping, prec: int, key=lambda k: k) -> dict:
    return {k: Fraction(v) for k, v in coeffs.items() if v and key(k) < prec}


def _e(x: complex) -> complex:
    return cmath.exp(2j * math.pi * x)


class FracQSeries:
    """sum_e c_e q^(e/denom), exact for e < prec."""

    __slots__ = ("denom", "coeffs", "prec")

    def __init__(self, denom: int, coeffs: Mapping[int, object], prec: int):
        if denom < 1:
            raise ValueError(f"denominator must be positive, got {denom}")
        self.denom = denom
        self.prec = prec
        self.coeffs = _clean(coeffs, prec)

    # construction helpers

    @classmethod
    def one(cls, prec: int, denom: int = 1) -> "FracQSeries":
        return cls(denom, {0: 1}, prec)

    @classmethod
    def monomial(cls, e: int, denom: int, prec: int, c=1) -> "FracQSeries":
        return cls(denom, {e: c}, prec)

    def __repr__(self):
        head = sorted(self.coeffs.items())[:4]
        terms = " + ".join(f"{c}*q^({e}/{self.denom})" for e, c in head)
        return f"FracQSeries({terms or '0'} + O(q^({self.prec}/{self.denom})))"

    # basic queries

    def valuation(self) -> int:
        """Lowest stored exponent, or prec when the series vanishes below prec."""
        return min(self.coeffs, default=self.prec)

    def __getitem__(self, e: int) -> Fraction:
        if e >= self.prec:
            raise PrecisionError(f"exponent {e} not below precision {self.prec}")
        return self.coeffs.get(e, Fraction(0))

    def coefficient(self, x: Fraction) -> Fraction:
        """Coefficient of q^x for rational x."""
        y = Fraction(x) * self.denom
        if y.denominator != 1:
            if y >= self.prec:
                raise PrecisionError(f"exponent {x} not below precision")
            return Fraction(0)
        return self[int(y)]

    def is_zero(self) -> bool:
        return not self.coeffs

    def with_denom(self, denom: int) -> "FracQSeries":
        if denom % self.denom:
            raise ValueError(f"cannot rescale denominator {self.denom} to {denom}")
        k = denom // self.denom
        return FracQSeries(denom, {e * k: c for e, c in self.coeffs.items()}, self.prec * k)

    def truncate(self, prec: int) -> "FracQSeries":
        return FracQSeries(self.denom, self.coeffs, min(prec, self.prec))

    def _common(self, other: "FracQSeries"):
        D = lcm(self.denom, other.denom)
        return self.with_denom(D), other.with_denom(D), D

    # arithmetic

    def __eq__(self, other):
        if not isinstance(other, FracQSeries):
            return NotImplemented
        a, b, _ = self._common(other)
        return a.prec == b.prec and a.coeffs == b.coeffs

    __hash__ = None

    def agrees_with(self, other: "FracQSeries") -> bool:
        """Equality on the range where both are guaranteed."""
        a, b, _ = self._common(other)
        p = min(a.prec, b.prec)
        return a.truncate(p).coeffs == b.truncate(p).coeffs

    def __neg__(self):
        return FracQSeries(self.denom, {e: -c for e, c in self.coeffs.items()}, self.prec)

    def __add__(self, other):
        if not isinstance(other, FracQSeries):
            other = FracQSeries(self.denom, {0: other}, self.prec)
        a, b, D = self._common(other)
        out = dict(a.coeffs)
        for e, c in b.coeffs.items():
            out[e] = out.get(e, 0) + c
        return FracQSeries(D, out, min(a.prec, b.prec))

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, JacobiQZSeries):
            return other * self
        if not isinstance(other, FracQSeries):
            c = Fraction(other)
            return FracQSeries(self.denom, {e: c * v for e, v in self.coeffs.items()}, self.prec)
        a, b, D = self._common(other)
        prec = min(a.prec + b.valuation(), b.prec + a.valuation())
        out: dict[int, Fraction] = {}
        for e1, c1 in a.coeffs.items():
            for e2, c2 in b.coeffs.items():
                e = e1 + e2
                if e < prec:
                    out[e] = out.get(e, 0) + c1 * c2
        return FracQSeries(D, out, prec)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise ValueError("only non-negative integer powers")
        result = FracQSeries.one(self.prec - self.valuation() if self.coeffs else self.prec, self.denom)
        base = self
        while k:
            if k & 1:
                result = result * base
            k >>= 1
            if k:
                base = base * base
        return result

    def inverse(self) -> "FracQSeries":
        """1 / self; the leading coefficient below prec must be nonzero."""
        if not self.coeffs:
            raise ZeroDivisionError("series vanishes below its precision")
        v = self.valuation()
        lead = self.coeffs[v]
        # self = lead q^v (1 - t) with t of positive valuation, known up to prec - v
        n = self.prec - v
        unit = {e - v: c / lead for e, c in self.coeffs.items()}
        inv = {0: Fraction(1)}
        for e in range(1, n):
            s = sum(unit.get(j, 0) * inv.get(e - j, 0) for j in range(1, e + 1))
            if s:
                inv[e] = -s
        return FracQSeries(self.denom, {e - v: c / lead for e, c in inv.items()}, n - v)

    def __truediv__(self, other):
        if isinstance(other, FracQSeries):
            return self * other.inverse()
        return self * (1 / Fraction(other))

    def substitute_power(self, k: int) -> "FracQSeries":
        """f(q) -> f(q^k)."""
        return FracQSeries(self.denom, {e * k: c for e, c in self.coeffs.items()}, self.prec * k)

    # serialization

    def to_json(self) -> dict:
        return {
            "denom": self.denom,
            "prec": self.prec,
            "entries": [[e, c.numerator, c.denominator] for e, c in sorted(self.coeffs.items())],
        }

    @classmethod
    def from_json(cls, data: dict) -> "FracQSeries":
        return cls(data["denom"], {e: Fraction(n, d) for e, n, d in data["entries"]}, data["prec"])


class JacobiQZSeries:
    """sum c(e, r2) q^(e/denom) zeta^(r2/2), exact for e < prec."""

    __slots__ = ("denom", "coeffs", "prec")

    def __init__(self, denom: int, coeffs: Mapping[tuple[int, int], object], prec: int):
        if denom < 1:
            raise ValueError(f"denominator must be positive, got {denom}")
        self.denom = denom
        self.prec = prec
        self.coeffs = _clean(coeffs, prec, key=lambda k: k[0])

    def __repr__(self):
        return f"JacobiQZSeries(denom={self.denom}, terms={len(self.coeffs)}, prec={self.prec})"

    def valuation(self) -> int:
        return min((e for e, _ in self.coeffs), default=self.prec)

    def get(self, e: int, r2: int) -> Fraction:
        if e >= self.prec:
            raise PrecisionError(f"exponent {e} not below precision {self.prec}")
        return self.coeffs.get((e, r2), Fraction(0))

    def is_zero(self) -> bool:
        return not self.coeffs

    def with_denom(self, denom: int) -> "JacobiQZSeries":
        if denom % self.denom:
            raise ValueError(f"cannot rescale denominator {self.denom} to {denom}")
        k = denom // self.denom
        return JacobiQZSeries(denom, {(e * k, r): c for (e, r), c in self.coeffs.items()}, self.prec * k)

    def truncate(self, prec: int) -> "JacobiQZSeries":
        return JacobiQZSeries(self.denom, self.coeffs, min(prec, self.prec))

    def __eq__(self, other):
        if not isinstance(other, JacobiQZSeries):
            return NotImplemented
        D = lcm(self.denom, other.denom)
        a, b = self.with_denom(D), other.with_denom(D)
        return a.prec == b.prec and a.coeffs == b.coeffs

    __hash__ = None

    def __neg__(self):
        return JacobiQZSeries(self.denom, {k: -c for k, c in self.coeffs.items()}, self.prec)

    def __add__(self, other: "JacobiQZSeries"):
        D = lcm(self.denom, other.denom)
        a, b = self.with_denom(D), other.with_denom(D)
        out = dict(a.coeffs)
        for k, c in b.coeffs.items():
            out[k] = out.get(k, 0) + c
        return JacobiQZSeries(D, out, min(a.prec, b.prec))

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, FracQSeries):
            other = JacobiQZSeries(other.denom, {(e, 0): c for e, c in other.coeffs.items()}, other.prec)
        elif not isinstance(other, JacobiQZSeries):
            c = Fraction(other)
            return JacobiQZSeries(self.denom, {k: c * v for k, v in self.coeffs.items()}, self.prec)
        D = lcm(self.denom, other.denom)
        a, b = self.with_denom(D), other.with_denom(D)
        prec = min(a.prec + b.valuation(), b.prec + a.valuation())
        out: dict = {}
        for (e1, r1), c1 in a.coeffs.items():
            for (e2, r2), c2 in b.coeffs.items():
                e = e1 + e2
                if e < prec:
                    key = (e, r1 + r2)
                    out[key] = out.get(key, 0) + c1 * c2
        return JacobiQZSeries(D, out, prec)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 1:
            raise ValueError("only positive integer powers")
        result = self
        for _ in range(k - 1):
            result = result * self
        return result

    def reflect(self) -> "JacobiQZSeries":
        """zeta -> zeta^(-1)."""
        return JacobiQZSeries(self.denom, {(e, -r): c for (e, r), c in self.coeffs.items()}, self.prec)

    def at_zeta_one(self) -> FracQSeries:
        """Specialization z = 0."""
        out: dict[int, Fraction] = {}
        for (e, _), c in self.coeffs.items():
            out[e] = out.get(e, 0) + c
        return FracQSeries(self.denom, out, self.prec)

    def to_json(self) -> dict:
        return {
            "denom": self.denom,
            "prec": self.prec,
            "entries": [[e, r, c.numerator, c.denominator] for (e, r), c in sorted(self.coeffs.items())],
        }

    @classmethod
    def from_json(cls, data: dict) -> "JacobiQZSeries":
        return cls(data["denom"], {(e, r): Fraction(n, d) for e, r, n, d in data["entries"]}, data["prec"])


# --------------------------------------------------------------------------
# classical building blocks


def _euler_product(prec: int, power: int = 1) -> list[int]:
    """Coefficients of prod_{n>=1} (1 - q^n)^power up to q^(prec-1)."""
    poly = [0] * prec
    poly[0] = 1
    for n in range(1, prec):
        for _ in range(power):
            for k in range(prec - 1, n - 1, -1):
                poly[k] -= poly[k - n]
    return poly


def eta(prec: int) -> FracQSeries:
    """q^(1/24) prod (1 - q^n), with denom 24; prec counts whole powers of q beyond q^(1/24)."""
    if prec < 1:
        raise ValueError("prec must be at least 1")
    poly = _euler_product(prec)
    return FracQSeries(24, {1 + 24 * k: c for k, c in enumerate(poly)}, 1 + 24 * prec)


def eta_power(k: int, prec: int) -> FracQSeries:
    """eta^k for k >= 1, computed from the product directly (denom 24)."""
    if k < 1:
        raise ValueError("k must be positive")
    poly = _euler_product(prec, k)
    return FracQSeries(24, {k + 24 * j: c for j, c in enumerate(poly)}, k + 24 * prec)


def jacobi_theta(prec: int) -> JacobiQZSeries:
    """Odd theta function sum_n (-1)^n q^((n+1/2)^2/2) zeta^(n+1/2), denom 8.

    ``prec`` is in whole powers of q: every term with q-exponent below prec is present.
    """
    if prec < 1:
        raise ValueError("prec must be at least 1")
    coeffs = {}
    n = 0
    while (2 * n + 1) ** 2 < 8 * prec:
        for r in (2 * n + 1, -(2 * n + 1)):
            # (-1)^n for r = 2n+1, and n -> -n-1 gives the opposite sign
            coeffs[((2 * n + 1) ** 2, r)] = (-1) ** n if r > 0 else -((-1) ** n)
        n += 1
    return JacobiQZSeries(8, coeffs, 8 * prec)


def _sigma(n: int, k: int) -> int:
    return sum(d**k for d in range(1, n + 1) if n % d == 0)


def eisenstein(k: int, prec: int) -> FracQSeries:
    if k == 4:
        c = 240
    elif k == 6:
        c = -504
    else:
        raise ValueError(f"only weights 4 and 6 are provided, got {k}")
    coeffs = {0: 1}
    coeffs.update({n: c * _sigma(n, k - 1) for n in range(1, prec)})
    return FracQSeries(1, coeffs, prec)


# --------------------------------------------------------------------------
# numerics


def numeric_eval(s, tau: complex, z: complex | None = None, tol: float | None = None):
    """Evaluate a truncated series at (tau, z); returns (value, tail_bound).

    The tail bound is crude: it assumes the unknown coefficients beyond prec
    are no larger than the largest stored term weight M, so

        tail <= M * |q|^(prec/D) / (1 - |q|^(1/D)).

    With ``tol`` given, a tail bound above it raises PrecisionError.
    """
    if tau.imag <= 0:
        raise ValueError("tau must lie in the upper half-plane")
    D = s.denom
    x = math.exp(-2 * math.pi * tau.imag)
    value = 0j
    weight = 0.0
    if isinstance(s, FracQSeries):
        for e, c in s.coeffs.items():
            value += float(c) * _e(e * tau / D)
            weight = max(weight, abs(float(c)))
    else:
        zz = 0j if z is None else z
        for (e, r2), c in s.coeffs.items():
            value += float(c) * _e(e * tau / D + r2 * zz / 2)
            weight = max(weight, abs(float(c)) * math.exp(-math.pi * r2 * zz.imag))
    tail = weight * x ** (s.prec / D) / (1 - x ** (1 / D)) if weight else 0.0
    if tol is not None and tail > tol:
        raise PrecisionError(f"tail bound {tail:.3g} exceeds tolerance {tol:.3g}")
    return value, tail
