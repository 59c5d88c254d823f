"""Theta-transformation coefficients, square classes and the maximal-rank scan.

For a level N and square-free index m = m1 * m2 with m1 | N, (N, m2) = 1 the
coefficient

    eps_m(nu, mu) = 1/(2m) sum_{eta mod 2m} e_{4m}(N eta^2 + 2 eta (nu - mu))

is computed both by direct summation and by its closed form. The rank engine
works on matrices whose entries are 0 or roots of unity; internally those are
kept as exponent arrays (-1 for zero) and only materialized as CycloMatrix on
request.
"""

from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from math import gcd, lcm

import numpy as np

from .arith import (
    divisors,
    eps_exponent,
    factorize,
    is_square_free,
    jacobi_symbol,
    mod_inverse,
    square_free_up_to,
)
from .cyclotomic import (
    CycloMatrix,
    CycloNumber,
    degree_one_prime,
    exact_rank,
    group_ring_vanishes,
    rank_mod_p,
)
from .gauss import gauss_direct_batch

__all__ = [
    "EpsilonContext",
    "SquareClass",
    "RootMatrix",
    "epsilon_def",
    "epsilon_closed",
    "epsilon_tables",
    "epsilon_matrix",
    "square_class",
    "square_class_size",
    "unit_residues",
    "build_class_matrix",
    "class_root_matrix",
    "crt_factorize",
    "verify_max_rank",
    "scan_theorem1",
    "verify_epsilon_identity",
]

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class EpsilonContext:
    N: int
    m1: int
    m2: int
    M: int
    Mbar: int
    l: int = 1

    def __post_init__(self):
        N, m1, m2 = self.N, self.m1, self.m2
        if N < 1 or N % 2 == 0:
            raise ValueError(f"N must be odd and positive, got {N}")
        if m1 < 1 or m2 < 1 or N % m1:
            raise ValueError(f"need m1 | N, got N={N}, m1={m1}")
        if gcd(N, m2) != 1:
            raise ValueError(f"need (N, m2) = 1, got N={N}, m2={m2}")
        if not (is_square_free(m1) and is_square_free(m2)):
            raise ValueError("m1 and m2 must be square-free")
        if gcd(N, 4 * m1 * m2) != m1:
            raise ValueError("(N, 4 m1 m2) must equal m1")
        if self.M != N // m1 or (self.M * self.Mbar - 1) % (4 * m2):
            raise ValueError("M must be N/m1 with M * Mbar = 1 mod 4 m2")
        if gcd(self.l, 2 * m2) != 1:
            raise ValueError(f"l must be a unit mod 2 m2, got {self.l}")

    @classmethod
    def make(cls, N: int, m1: int, m2: int, l: int = 1) -> "EpsilonContext":
        if N < 1 or m1 < 1 or N % m1:
            raise ValueError(f"need m1 | N, got N={N}, m1={m1}")
        M = N // m1
        return cls(N, m1, m2, M, mod_inverse(M, 4 * m2), l)

    @property
    def m(self) -> int:
        return self.m1 * self.m2

    def with_l(self, l: int) -> "EpsilonContext":
        return EpsilonContext(self.N, self.m1, self.m2, self.M, self.Mbar, l)

    def to_json(self) -> dict:
        return {"N": self.N, "m1": self.m1, "m2": self.m2, "M": self.M, "Mbar": self.Mbar, "l": self.l}


# --------------------------------------------------------------------------
# eps_m(nu, mu): two evaluations


def _eps_order(ctx: EpsilonContext) -> int:
    return lcm(8, 4 * ctx.m)


def _eps_def_vectors(ctx: EpsilonContext, diffs: np.ndarray, n: int) -> np.ndarray:
    """4m * eps as group-ring vectors: G(N, 2 d, 4m) by direct summation."""
    four_m = 4 * ctx.m
    return gauss_direct_batch(np.full(len(diffs), ctx.N), 2 * diffs, four_m, n)


@lru_cache(maxsize=None)
def _sqrt_vector(m2: int, n: int) -> np.ndarray:
    """sqrt(m2) as an integer group-ring vector of order n (8 m2 | n)."""
    vec = np.zeros(n, dtype=np.int64)
    odd = m2 if m2 % 2 else m2 // 2
    # sqrt(odd) = eps_odd^{-1} G(1, 0, odd)
    e_inv = (-eps_exponent(odd) * (n // 4)) % n
    for ell in range(odd):
        vec[(ell * ell % odd * (n // odd) + e_inv) % n] += 1
    if m2 % 2 == 0:
        # sqrt(2) = zeta_8 + zeta_8^{-1}
        vec = np.roll(vec, n // 8) + np.roll(vec, -(n // 8))
    return vec


def _eps_closed_vectors(ctx: EpsilonContext, diffs: np.ndarray, n: int) -> np.ndarray:
    """4m * eps from the closed form, as integer group-ring vectors.

    4m * (1/(2 sqrt m2)) (1+i) eps_M^{-1} (4m2/M) e_{4m2}(-Mbar (d/m1)^2)
      = 2 m1 sqrt(m2) (1+i) eps_M^{-1} (4m2/M) e_{4m2}(-Mbar (d/m1)^2)
    and zero unless m1 | d.
    """
    m1, m2, M, Mbar = ctx.m1, ctx.m2, ctx.M, ctx.Mbar
    out = np.zeros((len(diffs), n), dtype=np.int64)
    sign = jacobi_symbol(4 * m2, M)
    base = _sqrt_vector(m2, n) * (2 * m1 * sign)
    rot = (-eps_exponent(M) * (n // 4)) % n
    base = np.roll(base, rot) + np.roll(base, rot + n // 4)  # * eps_M^{-1} * (1 + i)
    step = n // (4 * m2)
    for t, d in enumerate(diffs):
        if d % m1:
            continue
        k = d // m1
        out[t] = np.roll(base, (-Mbar * k * k) % (4 * m2) * step)
    return out


def _to_cyclo(vec: np.ndarray, n: int, den: int) -> CycloNumber:
    return CycloNumber.from_group_ring(n, [int(x) for x in vec], den)


def epsilon_def(ctx: EpsilonContext, nu: int, mu: int) -> CycloNumber:
    """eps_m(nu, mu) = G(N, 2(nu - mu), 4m) / 4m, by direct summation."""
    n = _eps_order(ctx)
    return _to_cyclo(_eps_def_vectors(ctx, np.array([nu - mu]), n)[0], n, 4 * ctx.m)


def epsilon_closed(ctx: EpsilonContext, nu: int, mu: int) -> CycloNumber:
    """Closed form of eps_m(nu, mu); zero unless m1 | (nu - mu)."""
    n = _eps_order(ctx)
    return _to_cyclo(_eps_closed_vectors(ctx, np.array([nu - mu]), n)[0], n, 4 * ctx.m)


def epsilon_tables(ctx: EpsilonContext) -> tuple[np.ndarray, np.ndarray, int]:
    """Both evaluations of 4m * eps for every difference d = nu - mu mod 2m.

    Each eps value depends on (nu, mu) only through nu - mu mod 2m, so these
    2m rows cover the full (2m) x (2m) matrix.
    """
    n = _eps_order(ctx)
    diffs = np.arange(2 * ctx.m, dtype=np.int64)
    return _eps_def_vectors(ctx, diffs, n), _eps_closed_vectors(ctx, diffs, n), n


def epsilon_matrix(ctx: EpsilonContext, closed: bool = False) -> CycloMatrix:
    """(eps_m(nu, mu))_{nu, mu mod 2m}."""
    two_m = 2 * ctx.m
    n = _eps_order(ctx)
    diffs = np.arange(two_m)
    vecs = (_eps_closed_vectors if closed else _eps_def_vectors)(ctx, diffs, n)
    values = [_to_cyclo(v, n, 4 * ctx.m) for v in vecs]
    return CycloMatrix([[values[(nu - mu) % two_m] for mu in range(two_m)] for nu in range(two_m)], n)


def verify_epsilon_identity(ctx: EpsilonContext) -> dict:
    """Exact comparison of the two evaluations, plus the vanishing lemma.

    The lemma: eps(nu, mu) = 0 whenever (nu, m1) > 1 and (mu, 2m) = 1.
    """
    two_m = 2 * ctx.m
    direct, closed, n = epsilon_tables(ctx)
    mismatch = np.nonzero(~group_ring_vanishes(direct - closed, n))[0]
    zero_rows = group_ring_vanishes(direct, n)
    lemma_pairs = 0
    lemma_failures = []
    for nu in range(two_m):
        if gcd(nu, ctx.m1) == 1:
            continue
        for mu in range(two_m):
            if gcd(mu, two_m) != 1:
                continue
            lemma_pairs += 1
            if not zero_rows[(nu - mu) % two_m]:
                lemma_failures.append((nu, mu))
    return {
        "ctx": ctx.to_json(),
        "pairs": two_m * two_m,
        "differences": two_m,
        "mismatches": [int(d) for d in mismatch],
        "lemma_pairs": lemma_pairs,
        "lemma_failures": lemma_failures[:5],
    }


# --------------------------------------------------------------------------
# square classes


@dataclass(frozen=True)
class SquareClass:
    m1: int
    m2: int
    nu0: int
    members: tuple[int, ...]

    @property
    def modulus(self) -> int:
        return 2 * self.m1 * self.m2

    def expected_size(self) -> int:
        return square_class_size(self.m1 * self.m2, self.nu0)


@lru_cache(maxsize=65536)
def square_class(m1: int, m2: int, nu0: int) -> SquareClass:
    """{nu mod 2m : nu^2 = nu0^2 mod 4m}, by exhaustive scan."""
    m = m1 * m2
    if not is_square_free(m):
        raise ValueError(f"index {m} is not square-free")
    nu0 %= 2 * m
    target = nu0 * nu0 % (4 * m)
    members = tuple(nu for nu in range(2 * m) if nu * nu % (4 * m) == target)
    return SquareClass(m1, m2, nu0, members)


def square_class_size(m: int, nu0: int) -> int:
    """2^t' with t' the number of primes dividing m but not nu0."""
    return 2 ** sum(1 for p in factorize(m).primes if nu0 % p)


@lru_cache(maxsize=None)
def unit_residues(modulus: int) -> tuple[int, ...]:
    return tuple(x for x in range(modulus) if gcd(x, modulus) == 1)


# --------------------------------------------------------------------------
# class matrices


@dataclass(frozen=True)
class RootMatrix:
    """Matrix with entries zeta_order^exps[i, j], or 0 where exps[i, j] < 0."""

    order: int
    exps: np.ndarray
    row_labels: tuple = ()
    col_labels: tuple = ()

    @property
    def shape(self) -> tuple[int, int]:
        return self.exps.shape

    def to_cyclo(self) -> CycloMatrix:
        return CycloMatrix.from_exponents(self.order, self.exps)

    def lifted(self, n: int) -> "RootMatrix":
        step = n // self.order
        return RootMatrix(n, np.where(self.exps < 0, -1, self.exps * step), self.row_labels, self.col_labels)

    def kron(self, other: "RootMatrix") -> "RootMatrix":
        n = lcm(self.order, other.order)
        a, b = self.lifted(n).exps, other.lifted(n).exps
        zero = (a[:, None, :, None] < 0) | (b[None, :, None, :] < 0)
        e = (a[:, None, :, None] + b[None, :, None, :]) % n
        e = np.where(zero, -1, e).reshape(a.shape[0] * b.shape[0], a.shape[1] * b.shape[1])
        rows = tuple((x, y) for x in self.row_labels for y in other.row_labels)
        cols = tuple((x, y) for x in self.col_labels for y in other.col_labels)
        return RootMatrix(n, e, rows, cols)

    def same_entries(self, other: "RootMatrix") -> bool:
        n = lcm(self.order, other.order)
        return self.shape == other.shape and np.array_equal(self.lifted(n).exps, other.lifted(n).exps)

    def rank_lower_bound(self) -> int:
        p, powers = _power_table(self.order)
        return rank_mod_p(powers[np.where(self.exps < 0, self.order, self.exps)], p)

    def rank(self) -> int:
        """Exact rank: the modular bound when it is already maximal, else exact elimination."""
        r = self.rank_lower_bound()
        if r == min(self.shape):
            return r
        return exact_rank(self.to_cyclo())


@lru_cache(maxsize=None)
def _power_table(n: int) -> tuple[int, np.ndarray]:
    """(p, [w^0, ..., w^(n-1), 0]) for a degree-one prime p and primitive n-th root w."""
    p, w = degree_one_prime(n)
    powers = np.array([pow(w, k, p) for k in range(n)] + [0], dtype=np.int64)
    powers.setflags(write=False)
    return p, powers


def _class_pattern(m1: int, m2: int, l: int, rows, cols) -> RootMatrix:
    """Entries e_{4 m2}(l ((nu - mu)/m1)^2) when m1 | nu - mu, else 0."""
    nu = np.array(rows, dtype=np.int64)[:, None]
    mu = np.array(cols, dtype=np.int64)[None, :]
    d = nu - mu
    k = d // m1
    e = np.where(d % m1 == 0, l * k * k % (4 * m2), -1)
    return RootMatrix(4 * m2, e, tuple(rows), tuple(cols))


def class_root_matrix(ctx: EpsilonContext, nu0: int) -> RootMatrix:
    if gcd(nu0, ctx.m1) != 1:
        raise ValueError(f"need (nu0, m1) = 1, got nu0={nu0}, m1={ctx.m1}")
    rows = square_class(ctx.m1, ctx.m2, nu0).members
    cols = unit_residues(2 * ctx.m)
    return _class_pattern(ctx.m1, ctx.m2, ctx.l, rows, cols)


def build_class_matrix(ctx: EpsilonContext, nu0: int) -> CycloMatrix:
    """Rows over the square class of nu0, columns over units mod 2m (both sorted)."""
    return class_root_matrix(ctx, nu0).to_cyclo()


def _crt_parts(m1: int, m2: int, split: int):
    """Index bookkeeping for peeling the prime ``split`` off m1 or m2."""
    if m1 % split == 0:
        m1r, m2r = m1 // split, m2
    elif m2 % split == 0:
        m1r, m2r = m1, m2 // split
    else:
        raise ValueError(f"{split} does not divide the index {m1 * m2}")
    if split not in factorize(m1 * m2).primes:
        raise ValueError(f"{split} is not a prime factor of {m1 * m2}")
    if split == 2:
        raise ValueError("the CRT split needs an odd prime")
    rest = 2 * m1r * m2r  # nu = rest * nu' + split * nu''
    return m1r, m2r, rest


def crt_factorize(ctx: EpsilonContext, nu0: int, split: int):
    """Factor the class matrix as A (x) B by the CRT along ``split``.

    Residues mod 2m decompose as nu = 2 m' nu' + p nu'' with nu' mod p and
    nu'' mod 2m' (m' = m / p). Returns (A, B, row_perm, col_perm) with

        kronecker_product(A, B)[i, j] == build_class_matrix(ctx, nu0)[row_perm[i], col_perm[j]].

    Peeling p | m1, A is the 0/1 pattern [p | nu' - mu'] and B the class matrix
    of (m1/p, m2) with the same l. Peeling q | m2, A has entries
    e_q(l m4 (nu' - mu')^2), m4 = m2/q, and B is the class matrix of (m1, m4)
    with l q.
    """
    A, B, row_perm, col_perm = _crt_factor_roots(ctx, nu0, split)
    return A.to_cyclo(), B.to_cyclo(), row_perm, col_perm


def _crt_factor_roots(ctx: EpsilonContext, nu0: int, split: int):
    m1, m2, l, p = ctx.m1, ctx.m2, ctx.l, split
    m1r, m2r, rest = _crt_parts(m1, m2, p)
    two_m = 2 * m1 * m2
    full = class_root_matrix(ctx, nu0)
    inv_rest = pow(rest, -1, p)
    inv_p = pow(p, -1, rest) if rest > 1 else 0

    def parts(x):
        return x * inv_rest % p, x * inv_p % rest

    nu0p, nu0pp = parts(nu0)
    rows_a = sorted({parts(x)[0] for x in full.row_labels})
    rows_b = sorted({parts(x)[1] for x in full.row_labels})
    cols_a = unit_residues(p)
    cols_b = unit_residues(rest)
    assert rows_a == [x for x in range(p) if (x * x - nu0p * nu0p) % p == 0]
    assert tuple(rows_b) == square_class(m1r, m2r, nu0pp).members
    if m1 % p == 0:
        a = np.array([[0 if (x - y) % p == 0 else -1 for y in cols_a] for x in rows_a])
        A = RootMatrix(1, a, tuple(rows_a), tuple(cols_a))
        B = _class_pattern(m1r, m2r, l, rows_b, cols_b)
    else:
        a = np.array([[l * m2r * (x - y) ** 2 % p for y in cols_a] for x in rows_a])
        A = RootMatrix(p, a, tuple(rows_a), tuple(cols_a))
        B = _class_pattern(m1r, m2r, l * p, rows_b, cols_b)
    index_row = {x: i for i, x in enumerate(full.row_labels)}
    index_col = {x: i for i, x in enumerate(full.col_labels)}

    def glue(u, v):
        return (rest * u + p * v) % two_m

    row_perm = [index_row[glue(u, v)] for u in rows_a for v in rows_b]
    col_perm = [index_col[glue(u, v)] for u in cols_a for v in cols_b]
    return A, B, row_perm, col_perm


def verify_max_rank(ctx: EpsilonContext, nu0: int) -> bool:
    """Full row rank of the class matrix of nu0."""
    mat = class_root_matrix(ctx, nu0)
    return mat.rank() == mat.shape[0]


# --------------------------------------------------------------------------
# scan


@dataclass
class _ScanAccumulator:
    split: tuple = ()
    cells: int = 0
    passes: int = 0
    crt_checks: int = 0
    failures: list = field(default_factory=list)
    crt_failures: list = field(default_factory=list)
    partition_failures: list = field(default_factory=list)


def _partition_ok(m1: int, m2: int) -> bool:
    """The classes nu ~ nu' (nu^2 = nu'^2 mod 4m) partition exactly
    {nu mod 2m : (nu, m1) = 1 and (nu, 2m) | 2 m2}."""
    m = m1 * m2
    target = {nu for nu in range(2 * m) if gcd(nu, m1) == 1 and (2 * m2) % gcd(nu, 2 * m) == 0}
    covered = set()
    for nu0 in sorted(target):
        if nu0 in covered:
            continue
        cls = set(square_class(m1, m2, nu0).members)
        if not cls <= target or cls & covered:
            return False
        covered |= cls
    return covered == target


def _scan_split(args) -> dict:
    m1, m2, N, crt = args
    acc = _ScanAccumulator(split=(N, m1, m2))
    ctx0 = EpsilonContext.make(N, m1, m2)
    m = m1 * m2
    if not _partition_ok(m1, m2):
        acc.partition_failures.append([N, m1, m2])
    primes = factorize(m).primes
    rank_cache: dict = {}
    for l in unit_residues(4 * m2):
        ctx = ctx0.with_l(l)
        for nu0 in range(2 * m):
            if gcd(nu0, m1) != 1:
                continue
            acc.cells += 1
            members = square_class(m1, m2, nu0).members
            key = (members, l)
            if key not in rank_cache:
                mat = class_root_matrix(ctx, nu0)
                ok = mat.rank() == mat.shape[0]
                if crt:
                    for p in primes:
                        if p == 2:
                            continue
                        acc.crt_checks += 1
                        if not _crt_check(ctx, nu0, p, mat):
                            acc.crt_failures.append([N, m1, m2, l, nu0, p])
                rank_cache[key] = ok
            if rank_cache[key]:
                acc.passes += 1
            else:
                acc.failures.append([N, m1, m2, l, nu0])
    return acc.__dict__


def _crt_check(ctx: EpsilonContext, nu0: int, p: int, full: RootMatrix) -> bool:
    A, B, row_perm, col_perm = _crt_factor_roots(ctx, nu0, p)
    prod_ = A.kron(B)
    permuted = RootMatrix(full.order, full.exps[np.ix_(row_perm, col_perm)])
    if not prod_.same_entries(permuted):
        return False
    return prod_.rank() == A.rank() * B.rank()


def scan_theorem1(
    max_index: int,
    levels: list[int] | None = None,
    include_even: bool = False,
    crt: bool = True,
    jobs: int = 1,
) -> dict:
    """Maximal-rank scan over square-free indices m = m1 m2 <= max_index.

    Each cell is (N, m1, m2, l, nu0) with l a unit mod 4 m2 and (nu0, m1) = 1.
    With ``levels=None`` every split m = m1 m2 is scanned at level N = m1;
    otherwise the splits admissible for each given odd N (m1 | N, (N, m2) = 1).
    Even m2 is excluded unless ``include_even``.
    """
    tasks = []
    for m in square_free_up_to(max_index):
        for m1 in divisors(m):
            m2 = m // m1
            if m1 % 2 == 0 or (m2 % 2 == 0 and not include_even):
                continue
            for N in levels if levels is not None else [m1]:
                if N % 2 == 0 or N % m1 or gcd(N, m2) != 1:
                    continue
                tasks.append((m1, m2, N, crt))
    if jobs > 1:
        with ProcessPoolExecutor(jobs) as pool:
            results = list(pool.map(_scan_split, tasks, chunksize=2))
    else:
        results = [_scan_split(t) for t in tasks]
    report = {
        "max_index": max_index,
        "levels": levels,
        "include_even": include_even,
        "splits": len(tasks),
        "cells": 0,
        "passes": 0,
        "crt_checks": 0,
        "failures": [],
        "crt_failures": [],
        "partition_failures": [],
        "rows": [],
    }
    for res in results:
        report["rows"].append(
            {
                "N": res["split"][0],
                "m1": res["split"][1],
                "m2": res["split"][2],
                "cells": res["cells"],
                "passes": res["passes"],
                "failures": len(res["failures"]),
                "crt_checks": res["crt_checks"],
                "crt_failures": len(res["crt_failures"]),
            }
        )
        for key in ("cells", "passes", "crt_checks"):
            report[key] += res[key]
        for key in ("failures", "crt_failures", "partition_failures"):
            report[key].extend(res[key])
    for key in ("failures", "crt_failures", "partition_failures"):
        report[key].sort()
    report["rows"].sort(key=lambda r: (r["N"], r["m1"], r["m2"]))
    return report
