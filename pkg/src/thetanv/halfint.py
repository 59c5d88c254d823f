"""Coefficient-level operators on half-integral weight expansions and the
coprimality sieve that turns f (supported away from L_f) into g (supported on
n coprime to 4L).

A form carries its coefficients a(n) for 1 <= n <= bound, plus an optional
SupportRule: a periodic residue set outside of which every coefficient,
stored or not, is certified to vanish. Without a rule, "zero" can only mean
"zero up to the bound", and the trace says so.
"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd, lcm
from typing import Mapping

from .arith import factorize, is_prime, is_square_free

__all__ = [
    "SupportRule",
    "HalfIntForm",
    "SieveStep",
    "SieveTrace",
    "HypothesisError",
    "op_V",
    "op_U",
    "sieve_coprime",
    "descend",
    "run_sieve",
    "check_sieve_postconditions",
    "expected_level",
    "sieve_primes",
    "synthetic_form",
]

log = logging.getLogger(__name__)


class HypothesisError(ValueError):
    """An input violates a hypothesis; ``witness`` is an offending index."""

    def __init__(self, message: str, witness: int | None = None):
        super().__init__(message)
        self.witness = witness


@dataclass(frozen=True)
class SupportRule:
    """a(n) may be nonzero only when n mod modulus lies in residues."""

    modulus: int
    residues: frozenset

    def __post_init__(self):
        if self.modulus < 1:
            raise ValueError("modulus must be positive")
        object.__setattr__(self, "residues", frozenset(r % self.modulus for r in self.residues))

    @classmethod
    def nothing_beyond(cls) -> "SupportRule":
        """Every nonzero coefficient is among the stored ones."""
        return cls(1, frozenset())

    def allows(self, n: int) -> bool:
        return n % self.modulus in self.residues

    @property
    def empty(self) -> bool:
        return not self.residues

    def dilate(self, p: int) -> "SupportRule":
        # n allowed iff p | n and n/p allowed
        M = self.modulus * p
        return SupportRule(M, frozenset(p * r for r in self.residues))

    def contract(self, p: int) -> "SupportRule":
        # n allowed iff n p allowed
        M = self.modulus
        return SupportRule(M, frozenset(n for n in range(M) if (n * p) % M in self.residues))

    def coprime_to(self, S: int) -> "SupportRule":
        M = lcm(self.modulus, S)
        return SupportRule(M, frozenset(n for n in range(M) if n % self.modulus in self.residues and gcd(n, S) == 1))

    def to_json(self) -> dict:
        return {"modulus": self.modulus, "residues": sorted(self.residues)}

    @classmethod
    def from_json(cls, data: dict) -> "SupportRule":
        return cls(int(data["modulus"]), frozenset(int(r) for r in data["residues"]))


@dataclass(frozen=True)
class HalfIntForm:
    kappa: Fraction
    level: int
    coeffs: Mapping[int, Fraction]
    bound: int
    support_rule: SupportRule | None = None

    def __post_init__(self):
        kappa = Fraction(self.kappa)
        if kappa.denominator != 2:
            raise ValueError(f"weight must be a half-integer, got {kappa}")
        object.__setattr__(self, "kappa", kappa)
        if self.level < 1 or self.level % 4:
            raise ValueError(f"level must be a positive multiple of 4, got {self.level}")
        clean = {}
        for n, c in self.coeffs.items():
            c = Fraction(c)
            if n < 1:
                raise ValueError(f"coefficient index {n} must be positive")
            if c and n <= self.bound:
                clean[int(n)] = c
        object.__setattr__(self, "coeffs", clean)
        rule = self.support_rule
        if rule is not None:
            bad = [n for n in clean if not rule.allows(n)]
            if bad:
                raise ValueError(f"a({bad[0]}) is nonzero but excluded by the support rule")

    def a(self, n: int) -> Fraction:
        if n > self.bound:
            if self.support_rule is not None and not self.support_rule.allows(n):
                return Fraction(0)
            raise ValueError(f"a({n}) lies beyond the bound {self.bound}")
        return self.coeffs.get(n, Fraction(0))

    def stored_zero(self) -> bool:
        return not self.coeffs

    def zero_verdict(self) -> str:
        """'nonzero', 'zero' (certified) or 'zero_up_to_bound'."""
        if self.coeffs:
            return "nonzero"
        if self.support_rule is not None and self.support_rule.empty:
            return "zero"
        return "zero_up_to_bound"

    def replace(self, **kw) -> "HalfIntForm":
        data = {
            "kappa": self.kappa,
            "level": self.level,
            "coeffs": self.coeffs,
            "bound": self.bound,
            "support_rule": self.support_rule,
        }
        data.update(kw)
        return HalfIntForm(**data)

    def to_json(self) -> dict:
        return {
            "kappa_num": self.kappa.numerator,
            "level": self.level,
            "bound": self.bound,
            "entries": [[n, c.numerator, c.denominator] for n, c in sorted(self.coeffs.items())],
            "support_rule": None if self.support_rule is None else self.support_rule.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict, bound: int | None = None) -> "HalfIntForm":
        """Input format {kappa_num, L, entries: [[n, num, den]], support_rule?}."""
        entries = {int(n): Fraction(int(a), int(b)) for n, a, b in data["entries"]}
        if "level" in data:
            level = int(data["level"])
        else:
            level = 4 * int(data["L"])
        if bound is None:
            bound = int(data.get("bound", max(entries, default=1)))
        rule = data.get("support_rule")
        return cls(
            Fraction(int(data["kappa_num"]), 2),
            level,
            entries,
            bound,
            None if rule is None else SupportRule.from_json(rule),
        )


# --------------------------------------------------------------------------
# operators


def _require_prime(p: int) -> None:
    if not is_prime(p):
        raise ValueError(f"{p} is not prime")


def op_V(f: HalfIntForm, p: int) -> HalfIntForm:
    """f(p tau): a(n p) = a(f, n), zero off multiples of p; level times p."""
    _require_prime(p)
    rule = None if f.support_rule is None else f.support_rule.dilate(p)
    return HalfIntForm(
        f.kappa, f.level * p, {n * p: c for n, c in f.coeffs.items()}, f.bound * p, rule
    )


def op_U(f: HalfIntForm, p: int) -> HalfIntForm:
    """sum a(f, n p) q^n; bound drops to bound // p, level unchanged."""
    _require_prime(p)
    rule = None if f.support_rule is None else f.support_rule.contract(p)
    return HalfIntForm(
        f.kappa, f.level, {n // p: c for n, c in f.coeffs.items() if n % p == 0}, f.bound // p, rule
    )


def sieve_coprime(f: HalfIntForm, S: int) -> HalfIntForm:
    """Keep a(n) with (n, S) = 1; level times S^2."""
    if S < 1 or not is_square_free(S):
        raise ValueError(f"sieve modulus must be square-free, got {S}")
    rule = None if f.support_rule is None else f.support_rule.coprime_to(S)
    return HalfIntForm(
        f.kappa, f.level * S * S, {n: c for n, c in f.coeffs.items() if gcd(n, S) == 1}, f.bound, rule
    )


def descend(f: HalfIntForm, p: int) -> HalfIntForm:
    """f(tau / p) for f supported on multiples of p: a(n) = a(f, n p); level over p."""
    _require_prime(p)
    for n in sorted(f.coeffs):
        if n % p:
            raise HypothesisError(f"a({n}) != 0 although {p} does not divide {n}", witness=n)
    if (f.level // 4) % p:
        raise HypothesisError(f"{p} does not divide L = {f.level // 4}")
    rule = None if f.support_rule is None else f.support_rule.contract(p)
    return HalfIntForm(
        f.kappa, f.level // p, {n // p: c for n, c in f.coeffs.items()}, f.bound // p, rule
    )


# --------------------------------------------------------------------------
# the sieve


@dataclass
class SieveStep:
    op: str
    prime: int | None
    stage: tuple[int, int] | None
    level: int
    level_expr: str
    verdict: str
    bound: int

    def to_json(self) -> dict:
        return {
            "op": self.op,
            "prime": self.prime,
            "stage": None if self.stage is None else list(self.stage),
            "level": self.level,
            "level_expr": self.level_expr,
            "verdict": self.verdict,
            "bound": self.bound,
        }


@dataclass
class SieveTrace:
    L: int
    Lf: int
    Lf_rad: int
    Mf_primes: list[int]
    g0: SieveStep | None = None
    steps: list[SieveStep] = field(default_factory=list)
    warnings: list[str] = field(default_factory=list)
    diagnosis: str | None = None

    def to_json(self) -> dict:
        return {
            "L": self.L,
            "Lf": self.Lf,
            "Lf_rad": self.Lf_rad,
            "Mf_primes": self.Mf_primes,
            "g0": None if self.g0 is None else self.g0.to_json(),
            "steps": [s.to_json() for s in self.steps],
            "warnings": self.warnings,
            "diagnosis": self.diagnosis,
        }


def sieve_primes(L: int, Lf: int) -> tuple[int, list[int]]:
    """(L_f', [p_1 < ... < p_r]): the radical of L_f and the primes of L not dividing L_f."""
    Lf_rad = 1
    for p in factorize(Lf).primes:
        Lf_rad *= p
    return Lf_rad, [p for p in factorize(L).primes if Lf % p]


def expected_level(L: int, Lf: int, exponents: Mapping[int, int]) -> int:
    """4 L L_f'^2 prod p_j^(2 - i_j)."""
    Lf_rad, primes = sieve_primes(L, Lf)
    num, den = 4 * L * Lf_rad**2, 1
    for p in primes:
        e = 2 - exponents[p]
        if e >= 0:
            num *= p**e
        else:
            den *= p ** (-e)
    assert num % den == 0
    return num // den


def _level_expr(L: int, Lf_rad: int, powers: list[tuple[int, int]]) -> str:
    parts = [f"4*{L}*{Lf_rad}^2"] + [f"{p}^{e}" for p, e in powers]
    return "*".join(parts)


def run_sieve(f: HalfIntForm, L: int, Lf: int):
    """Returns (g, {p_j: i_j}, trace).

    g_0 keeps a(f, n) with (n, L_f') = 1. For each p_j in turn, stage i keeps
    the terms of the (i times descended) form coprime to p_j; the first
    nonzero stage is g_j and i_j is its index.
    """
    if f.stored_zero():
        raise ValueError("the input form vanishes up to its bound")
    if Lf < 1 or Lf % 2 or (4 * L) % Lf:
        raise ValueError(f"L_f = {Lf} is not an even divisor of 4L = {4 * L}")
    if f.level != 4 * L:
        raise ValueError(f"form level {f.level} differs from 4L = {4 * L}")
    if f.kappa < Fraction(5, 2):
        raise ValueError(f"weight {f.kappa} is below 5/2")
    for n in sorted(f.coeffs):
        if gcd(n, Lf) > 1:
            raise HypothesisError(f"a({n}) != 0 although ({n}, L_f) > 1", witness=n)
    Lf_rad, primes = sieve_primes(L, Lf)
    alpha = dict(factorize(L).factors)
    trace = SieveTrace(L, Lf, Lf_rad, primes)
    if f.support_rule is None:
        trace.warnings.append(f"no support rule: zero verdicts hold only up to the stored bound {f.bound}")

    g = sieve_coprime(f, Lf_rad)
    trace.g0 = SieveStep("coprime-sieve", Lf_rad, None, g.level, _level_expr(L, Lf_rad, []), g.zero_verdict(), g.bound)
    if g.stored_zero():
        raise HypothesisError("g_0 vanishes, so f was zero on the indices coprime to L_f")
    exponents: dict[int, int] = {}
    powers: list[tuple[int, int]] = []
    for j, p in enumerate(primes, start=1):
        current = g
        found = None
        for i in range(alpha[p] + 1):
            if i > 0:
                current = descend(current, p)
                trace.steps.append(
                    SieveStep("descend", p, (j, i - 1), current.level,
                              _level_expr(L, Lf_rad, powers + [(p, -i)]), current.zero_verdict(), current.bound)
                )
            stage = sieve_coprime(current, p)
            verdict = stage.zero_verdict()
            trace.steps.append(
                SieveStep("coprime-sieve", p, (j, i), stage.level,
                          _level_expr(L, Lf_rad, powers + [(p, 2 - i)]), verdict, stage.bound)
            )
            if verdict == "zero_up_to_bound":
                trace.warnings.append(f"g_{{{j},{i}}} declared zero only up to n <= {stage.bound}")
            if verdict == "nonzero":
                found = (i, stage)
                break
        if found is None:
            trace.diagnosis = (
                f"every stage g_{{{j},0..{alpha[p]}}} vanished for p = {p}: the last descended form would be "
                f"supported on multiples of a prime not dividing its level, hence zero, forcing g_0 = 0; "
                f"the input cannot be the expansion of a nonzero form"
            )
            return None, exponents, trace
        exponents[p], g = found
        powers.append((p, 2 - exponents[p]))
    level = expected_level(L, Lf, exponents)
    if g.level != level:
        raise AssertionError(f"level bookkeeping {g.level} differs from the closed form {level}")
    return g, exponents, trace


def check_sieve_postconditions(f: HalfIntForm, g: HalfIntForm, exponents: Mapping[int, int], L: int, Lf: int) -> dict:
    """The three output properties plus the level formula, checked on stored data."""
    alpha = dict(factorize(L).factors)
    P = 1
    for p, i in exponents.items():
        P *= p**i
    support = all(gcd(n, 4 * L) == 1 for n in g.coeffs)
    rule = g.support_rule
    if rule is not None:
        support = support and all(gcd(r, gcd(rule.modulus, 4 * L)) == 1 for r in rule.residues)
    values = all(
        g.a(n) == f.a(P * n) for n in range(1, g.bound + 1) if gcd(n, 4 * L) == 1 and P * n <= f.bound
    )
    ranges = all(0 <= i <= alpha[p] for p, i in exponents.items())
    level = g.level == expected_level(L, Lf, exponents)
    return {"support": support, "values": values, "exponent_range": ranges, "level": level,
            "ok": support and values and ranges and level}


def synthetic_form(
    L: int,
    Lf: int,
    exponents: Mapping[int, int],
    bound: int,
    seed: int = 0,
    kappa: Fraction = Fraction(5, 2),
    noise: bool = True,
) -> HalfIntForm:
    """A level 4L coefficient table with a known sieve outcome.

    With P = prod p^(i_p) over the sieve primes, a(n) is a random nonzero
    integer on n = P m, (m, 4L) = 1. With ``noise`` there are also terms at
    n = P p m for each sieve prime p; the sieve must discard them. The
    expected result is i_p = exponents[p] and a(g, m) = a(f, P m).
    """
    Lf_rad, primes = sieve_primes(L, Lf)
    alpha = dict(factorize(L).factors)
    if set(exponents) != set(primes):
        raise ValueError(f"exponents must be given for the primes {primes}")
    if any(not 0 <= exponents[p] <= alpha[p] for p in primes):
        raise ValueError("each exponent must lie in 0..alpha_p")
    P = R = 1
    for p in primes:
        P *= p ** exponents[p]
        R *= p
    period = 4 * L * R

    def unit(m):
        return gcd(m, 4 * L) == 1

    def allowed(m):
        return unit(m) or (noise and any(m % p == 0 and unit(m // p) for p in primes))

    residues = frozenset(P * m for m in range(period) if allowed(m))
    rng = random.Random(seed)
    coeffs = {}
    for m in range(1, bound // P + 1):
        if allowed(m % period):
            coeffs[P * m] = rng.choice([-3, -2, -1, 1, 2, 3])
    return HalfIntForm(kappa, 4 * L, coeffs, bound, SupportRule(P * period, residues))
