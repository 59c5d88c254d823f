"""Integer and modular arithmetic primitives."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import gcd, prod

__all__ = [
    "Factorization",
    "factorize",
    "is_square_free",
    "is_prime",
    "jacobi_symbol",
    "kronecker_symbol",
    "eps_exponent",
    "eps_factor",
    "mod_inverse",
    "NotInvertibleError",
    "euler_phi",
    "divisors",
    "radical",
    "square_free_up_to",
]


class NotInvertibleError(ArithmeticError, ValueError):
    """Raised when an inverse modulo n does not exist."""


@dataclass(frozen=True)
class Factorization:
    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self):
        if self.value < 1:
            raise ValueError("factorization of a non-positive integer")
        primes = [p for p, _ in self.factors]
        if primes != sorted(set(primes)):
            raise ValueError("primes must be strictly increasing")
        if any(e < 1 for _, e in self.factors):
            raise ValueError("exponents must be positive")
        if prod(p**e for p, e in self.factors) != self.value:
            raise ValueError("factors do not multiply to value")

    @property
    def primes(self) -> list[int]:
        return [p for p, _ in self.factors]

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)


@lru_cache(maxsize=4096)
def factorize(n: int) -> Factorization:
    """Trial-division factorization; fine for n up to ~1e12."""
    if n < 1:
        raise ValueError(f"cannot factorize {n}")
    value, out = n, []
    for p in (2, 3):
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
    p = 5
    step = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        if e:
            out.append((p, e))
        p += step
        step = 6 - step
    if n > 1:
        out.append((n, 1))
    return Factorization(value, tuple(out))


def is_square_free(n: int) -> bool:
    return all(e == 1 for _, e in factorize(n))


def radical(n: int) -> int:
    return prod(factorize(n).primes)


def euler_phi(n: int) -> int:
    result = n
    for p in factorize(n).primes:
        result = result // p * (p - 1)
    return result


def divisors(n: int) -> list[int]:
    divs = [1]
    for p, e in factorize(n):
        divs = [d * p**k for d in divs for k in range(e + 1)]
    return sorted(divs)


def square_free_up_to(n: int, odd_only: bool = False) -> list[int]:
    step = 2 if odd_only else 1
    return [m for m in range(1, n + 1, step) if is_square_free(m)]


_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin (exact below 3.3e24)."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def jacobi_symbol(a: int, n: int) -> int:
    """Jacobi symbol (a/n) for odd n > 0.

    Even n is delegated to the Kronecker extension, so (M/4m) style symbols
    can be evaluated through the same entry point.
    """
    if n <= 0:
        raise ValueError(f"lower entry must be positive, got {n}")
    if n % 2 == 0:
        return kronecker_symbol(a, n)
    a %= n
    result = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                result = -result
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            result = -result
        a %= n
    return result if n == 1 else 0


def kronecker_symbol(a: int, n: int) -> int:
    """Kronecker symbol (a/n) for n > 0: (a/2) is 0, 1 or -1 by a mod 8."""
    if n <= 0:
        raise ValueError(f"lower entry must be positive, got {n}")
    result = 1
    while n % 2 == 0:
        n //= 2
        if a % 2 == 0:
            return 0
        if a % 8 in (3, 5):
            result = -result
    return result * jacobi_symbol(a, n)


def eps_exponent(m: int) -> int:
    """Exponent e with eps_m = i**e (0 if m = 1 mod 4, 1 if m = 3 mod 4)."""
    if m % 2 == 0:
        raise ValueError(f"eps_m needs odd m, got {m}")
    return 0 if m % 4 == 1 else 1


def eps_factor(m: int):
    """eps_m as an exact order-4 cyclotomic number."""
    from .cyclotomic import root_of_unity

    return root_of_unity(4, eps_exponent(m))


def mod_inverse(a: int, n: int) -> int:
    if n < 1:
        raise ValueError(f"modulus must be positive, got {n}")
    if gcd(a, n) != 1:
        raise NotInvertibleError(f"{a} is not invertible modulo {n}")
    return pow(a, -1, n) if n > 1 else 0
