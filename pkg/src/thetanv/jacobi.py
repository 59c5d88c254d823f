"""Jacobi-form coefficient tables, theta decomposition and related checks.

A table c(n, r) of index m is stored through its reduced representatives:
c depends only on the discriminant D = 4mn - r^2 and on r mod 2m, so every
lookup is routed to the representative with -m < r <= m. ``prec`` is the
largest discriminant for which the table is guaranteed complete.

Theta components follow the standard pairing phi = sum_mu h_mu * theta_{m,mu},
theta_{m,mu} = sum_{r = mu mod 2m} q^(r^2/4m) zeta^r, with
h_mu = sum_n c(n, mu) q^((4mn - mu^2)/4m).
"""

from __future__ import annotations

import cmath
import logging
import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Mapping, Sequence

from .arith import divisors, is_prime, is_square_free
from .gauss import GaussSumSpec, gauss_direct
from .qseries import FracQSeries, JacobiQZSeries, eta_power, jacobi_theta, numeric_eval

__all__ = [
    "JacobiFormCoeffs",
    "ThetaComponents",
    "WitnessMatrix",
    "InconsistentTableError",
    "theta_decompose",
    "theta_recombine",
    "construct_phi_10_1",
    "V_ell",
    "check_primitive_nonvanishing",
    "theta_numeric",
    "numeric_verify_transform",
    "numeric_verify_hrel",
    "build_witness",
]

log = logging.getLogger(__name__)


class InconsistentTableError(ValueError):
    """Two coefficients with the same (discriminant, r mod 2m) disagree."""

    def __init__(self, first, second):
        super().__init__(f"c{first} and c{second} share an invariant but differ")
        self.pair = (first, second)


def _reduce_r(r: int, m: int) -> int:
    r0 = r % (2 * m)
    return r0 - 2 * m if r0 > m else r0


@dataclass(frozen=True)
class JacobiFormCoeffs:
    weight: int
    index: int
    level: int
    table: Mapping[tuple[int, int], Fraction]
    prec: int
    cusp: bool = False

    def __post_init__(self):
        if self.index < 1:
            raise ValueError(f"index must be positive, got {self.index}")
        clean = {}
        for (n, r), c in self.table.items():
            c = Fraction(c)
            if c:
                clean[(int(n), int(r))] = c
        object.__setattr__(self, "table", clean)
        _check_invariant(clean, self.index)
        if self.cusp:
            bad = [k for k in clean if 4 * self.index * k[0] - k[1] ** 2 <= 0]
            if bad:
                raise ValueError(f"cusp form with non-positive discriminant entry c{bad[0]}")

    def disc(self, n: int, r: int) -> int:
        return 4 * self.index * n - r * r

    def coeff(self, n: int, r: int) -> Fraction:
        """c(n, r) through the reduced representative; errors beyond prec."""
        D = self.disc(n, r)
        if D > self.prec:
            raise ValueError(f"discriminant {D} of ({n}, {r}) exceeds table precision {self.prec}")
        r0 = _reduce_r(r, self.index)
        n0, rem = divmod(D + r0 * r0, 4 * self.index)
        assert rem == 0
        return self.table.get((n0, r0), Fraction(0))

    def reduced(self) -> dict[tuple[int, int], Fraction]:
        """All nonzero reduced-representative entries with D <= prec."""
        m = self.index
        out = {}
        for (n, r), c in self.table.items():
            if self.disc(n, r) <= self.prec:
                r0 = _reduce_r(r, m)
                out[((self.disc(n, r) + r0 * r0) // (4 * m), r0)] = c
        return out

    def is_zero(self) -> bool:
        return not self.reduced()

    def same_form(self, other: "JacobiFormCoeffs") -> bool:
        """Equal index and equal coefficients for every discriminant both tables cover."""
        if self.index != other.index:
            return False
        p = min(self.prec, other.prec)
        a = {k: v for k, v in self.reduced().items() if 4 * self.index * k[0] - k[1] ** 2 <= p}
        b = {k: v for k, v in other.reduced().items() if 4 * other.index * k[0] - k[1] ** 2 <= p}
        return a == b

    def expand(self, q_prec: int) -> JacobiQZSeries:
        """The form as a (q, zeta) series with whole q-exponents below q_prec.

        Every term needed must have discriminant <= prec.
        """
        m = self.index
        out = {}
        for n in range(q_prec):
            rmax = math.isqrt(4 * m * n + max(0, -self.min_disc()))
            for r in range(-rmax - 1, rmax + 2):
                D = 4 * m * n - r * r
                if D > self.prec:
                    raise ValueError(f"expansion to q^{q_prec} needs discriminant {D} > {self.prec}")
                c = self.coeff(n, r)
                if c:
                    out[(n, 2 * r)] = c
        return JacobiQZSeries(1, out, q_prec)

    def min_disc(self) -> int:
        return min((self.disc(n, r) for n, r in self.table), default=0)

    def to_json(self) -> dict:
        return {
            "weight": self.weight,
            "index": self.index,
            "level": self.level,
            "prec": self.prec,
            "cusp": self.cusp,
            "entries": [[n, r, c.numerator, c.denominator] for (n, r), c in sorted(self.reduced().items())],
        }

    @classmethod
    def from_json(cls, data: dict) -> "JacobiFormCoeffs":
        table = {(n, r): Fraction(a, b) for n, r, a, b in data["entries"]}
        return cls(data["weight"], data["index"], data["level"], table, data["prec"], data.get("cusp", False))


def _check_invariant(table: Mapping[tuple[int, int], Fraction], m: int) -> None:
    seen: dict[tuple[int, int], tuple[int, int]] = {}
    for (n, r) in sorted(table):
        key = (4 * m * n - r * r, r % (2 * m))
        first = seen.setdefault(key, (n, r))
        if table.get(first, 0) != table[(n, r)]:
            raise InconsistentTableError(first, (n, r))


@dataclass(frozen=True)
class ThetaComponents:
    index: int
    components: tuple[FracQSeries, ...]

    def __post_init__(self):
        if len(self.components) != 2 * self.index:
            raise ValueError(f"expected {2 * self.index} components, got {len(self.components)}")

    def __getitem__(self, mu: int) -> FracQSeries:
        return self.components[mu % (2 * self.index)]

    def nonzero(self) -> list[int]:
        return [mu for mu, h in enumerate(self.components) if not h.is_zero()]

    def to_json(self) -> dict:
        return {"index": self.index, "components": [h.to_json() for h in self.components]}


# --------------------------------------------------------------------------
# decomposition / recombination


def theta_decompose(phi: JacobiFormCoeffs) -> ThetaComponents:
    """h_mu has coefficient c(n, mu) at q^((4mn - mu^2)/4m)."""
    m = phi.index
    comps = []
    for mu in range(2 * m):
        r0 = _reduce_r(mu, m)
        coeffs = {}
        for (n, r), c in phi.reduced().items():
            if r == r0:
                coeffs[4 * m * n - r * r] = c
        comps.append(FracQSeries(4 * m, coeffs, phi.prec + 1))
    return ThetaComponents(m, tuple(comps))


def theta_recombine(
    h: ThetaComponents, prec: int | None = None, weight: int = 0, level: int = 1, cusp: bool = False
) -> JacobiFormCoeffs:
    """sum_mu h_mu theta_{m,mu} as a coefficient table (reduced representatives)."""
    m = h.index
    top = min(hm.prec for hm in h.components) - 1
    prec = top if prec is None else min(prec, top)
    table = {}
    for mu, hm in enumerate(h.components):
        if hm.denom != 4 * m:
            hm = hm.with_denom(4 * m) if (4 * m) % hm.denom == 0 else hm
        if hm.denom != 4 * m:
            raise ValueError(f"component {mu} has denominator {hm.denom}, expected {4 * m}")
        r0 = _reduce_r(mu, m)
        for e, c in hm.coeffs.items():
            if e > prec:
                continue
            n, rem = divmod(e + r0 * r0, 4 * m)
            if rem:
                raise ValueError(f"h_{mu} has a term q^({e}/{4 * m}) outside -mu^2/4m + Z")
            table[(n, r0)] = c
    return JacobiFormCoeffs(weight, m, level, table, prec, cusp)


# --------------------------------------------------------------------------
# test forms


def construct_phi_10_1(prec: int) -> JacobiFormCoeffs:
    """eta^18 * theta^2, the weight 10 index 1 cusp form, complete for D <= prec."""
    if prec < 4:
        raise ValueError("prec must be at least 4")
    q_prec = (prec + 1) // 4 + 1  # n <= (D + 1)/4 for r in {0, 1}
    e18 = eta_power(18, q_prec + 1)  # q^(18/24) * product
    th = jacobi_theta(q_prec + 1)
    series = th * th * e18
    series = series.with_denom(24)
    table = {}
    for (e, r2), c in series.coeffs.items():
        if e >= 24 * q_prec:
            continue
        assert e % 24 == 0 and r2 % 2 == 0, "unexpected fractional exponent"
        n, r = e // 24, r2 // 2
        if 4 * n - r * r <= prec:
            table[(n, r)] = c
    lead = table[(1, 1)]
    table = {k: v / lead for k, v in table.items()}
    return JacobiFormCoeffs(10, 1, 1, table, prec, cusp=True)


def V_ell(phi: JacobiFormCoeffs, ell: int) -> JacobiFormCoeffs:
    """Index-raising operator: c'(n, r) = sum_{d | (n, r, ell)} d^(k-1) c(n ell / d^2, r / d)."""
    if not is_prime(ell):
        raise ValueError(f"ell must be prime, got {ell}")
    m, k = phi.index, phi.weight
    M = m * ell
    P = phi.prec

    def coeff(n: int, r: int) -> Fraction:
        total = Fraction(0)
        for d in divisors(gcd(gcd(n, r), ell)):
            total += Fraction(d) ** (k - 1) * phi.coeff(n * ell // (d * d), r // d)
        return total

    table = {}
    lo = phi.min_disc()
    for r in range(-M + 1, M + 1):
        # reduced representatives, plus one shifted copy of each to confirm the invariant
        for rr in (r, r + 2 * M):
            n = max(0, -((lo - rr * rr) // (4 * M)))
            while 4 * M * n - rr * rr <= P:
                c = coeff(n, rr)
                if c:
                    table[(n, rr)] = c
                n += 1
    # JacobiFormCoeffs re-checks the (D, r mod 2m) invariant over both copies
    out = JacobiFormCoeffs(k, M, phi.level, table, P, phi.cusp)
    for (n, r), c in table.items():
        if out.coeff(n, r) != c:
            raise InconsistentTableError((n, r), (n, r))
    return out


# --------------------------------------------------------------------------
# non-vanishing


def check_primitive_nonvanishing(phi: JacobiFormCoeffs, split: tuple[int, int] | None = None) -> dict:
    """Which theta components are nonzero (up to prec), and whether one is primitive.

    consistent = some nonzero h_mu with (mu, 2m) = 1, or with (mu, 2m) not
    dividing 2 m2 for the supplied split m = m1 m2.
    """
    m = phi.index
    if phi.is_zero():
        raise ValueError("the zero form has no nonzero theta component")
    if not is_square_free(m):
        raise ValueError(f"index {m} is not square-free")
    m1, m2 = split if split is not None else (1, m)
    if m1 * m2 != m:
        raise ValueError(f"split {m1} * {m2} does not multiply to the index {m}")
    h = theta_decompose(phi)
    nonzero = h.nonzero()
    primitive = [mu for mu in nonzero if gcd(mu, 2 * m) == 1]
    other = [mu for mu in nonzero if (2 * m2) % gcd(mu, 2 * m) != 0]
    return {
        "index": m,
        "split": [m1, m2],
        "prec": phi.prec,
        "nonzero": nonzero,
        "primitive_nonzero": primitive,
        "non_dividing_nonzero": other,
        "consistent": bool(primitive or other),
    }


# --------------------------------------------------------------------------
# numerics


def _e(x: complex) -> complex:
    return cmath.exp(2j * math.pi * x)


def theta_numeric(mu: int, m: int, tau: complex, w: complex, tol: float = 1e-15) -> tuple[complex, float]:
    """Theta_{mu,m}(tau, w) = sum_n e((2mn - mu)^2 tau / 4m + (2mn - mu) w), with a tail bound.

    The summand for k = 2mn - mu has modulus exp(-2 pi (k^2 y / 4m + k v)),
    y = Im tau, v = Im w. Summation stops once the next term on each side is
    below tol and the ratio of consecutive terms is below 1/2, after which the
    remaining terms are dominated by a geometric series.
    """
    y, v = tau.imag, w.imag
    if y <= 0:
        raise ValueError("tau must lie in the upper half-plane")

    def logmag(k):
        return -2 * math.pi * (k * k * y / (4 * m) + k * v)

    total = 0j
    tail = 0.0
    for sign in (1, -1):
        n = 0 if sign == 1 else -1
        while True:
            k = 2 * m * n - mu
            lm, lnext = logmag(k), logmag(k + sign * 2 * m)
            total += _e(k * k * tau / (4 * m) + k * w)
            ratio = math.exp(lnext - lm)
            if math.exp(lnext) < tol and ratio < 0.5:
                tail += math.exp(lnext) / (1 - ratio)
                break
            n += sign
    return total, tail


def _eps_complex(m: int, N: int, nu: int, mu: int) -> complex:
    """eps_m(nu, mu) = G(N, 2(nu - mu), 4m) / 4m as a complex number."""
    return gauss_direct(GaussSumSpec(N, 2 * (nu - mu), 4 * m)).embed() / (4 * m)


def numeric_verify_transform(
    m: int,
    N: int = 1,
    taus: Sequence[complex] = (1j, 2j),
    zs: Sequence[complex] = (0, 0.3 + 0.2j),
    tol: float = 1e-8,
    truncation: float = 1e-14,
) -> dict:
    """Theta transformation under gamma = [[1, 0], [N, 1]] at sample points.

    Left side: Theta_{mu,m}(gamma tau, z/(N tau + 1)) (N tau + 1)^(-1/2) e(-m N z^2/(N tau + 1)).
    Right side: sum_nu coefficient(nu, mu) Theta_{nu,m}(tau, z), once with the
    complex conjugate of eps_m(nu, mu) and once with eps_m itself. Each theta
    sum is cut off once its tail bound drops below ``truncation``; ``tol`` is
    the bound the reported tail must meet.
    """
    eps = [[_eps_complex(m, N, nu, mu) for mu in range(2 * m)] for nu in range(2 * m)]
    worst, worst_plain, tail_max = 0.0, 0.0, 0.0
    for tau in taus:
        for z in zs:
            j = N * tau + 1
            t2, z2 = tau / j, z / j
            right = []
            for nu in range(2 * m):
                val, tail = theta_numeric(nu, m, tau, z, truncation)
                right.append(val)
                tail_max = max(tail_max, tail)
            for mu in range(2 * m):
                val, tail = theta_numeric(mu, m, t2, z2, truncation)
                tail_max = max(tail_max, tail)
                lhs = val * cmath.sqrt(j) ** -1 * _e(-m * N * z * z / j)
                rhs = sum(eps[nu][mu].conjugate() * right[nu] for nu in range(2 * m))
                rhs_plain = sum(eps[nu][mu] * right[nu] for nu in range(2 * m))
                worst = max(worst, abs(lhs - rhs))
                worst_plain = max(worst_plain, abs(lhs - rhs_plain))
    return {
        "m": m,
        "N": N,
        "taus": [[t.real, t.imag] for t in map(complex, taus)],
        "zs": [[z.real, z.imag] for z in map(complex, zs)],
        "max_residual": worst,
        "max_residual_unconjugated": worst_plain,
        "max_tail_bound": tail_max,
        "tolerance": tol,
        "tail_ok": tail_max < tol,
    }


def numeric_verify_hrel(
    phi: JacobiFormCoeffs, N: int = 1, taus: Sequence[complex] = (2j,), tol: float = 1e-8
) -> dict:
    """(-N tau + 1)^(-k+1/2) h_mu(tau/(-N tau + 1)) against sum_nu conj(eps(nu, mu)) h_nu(tau).

    The half-odd power is the principal square root raised to 2k - 1.
    """
    m, k = phi.index, phi.weight
    h = theta_decompose(phi)
    eps = [[_eps_complex(m, N, nu, mu) for mu in range(2 * m)] for nu in range(2 * m)]
    worst, worst_plain, tail_max = 0.0, 0.0, 0.0
    for tau in taus:
        j = -N * tau + 1
        t2 = tau / j
        right = []
        for nu in range(2 * m):
            val, tail = numeric_eval(h[nu], tau)
            right.append(val)
            tail_max = max(tail_max, tail)
        for mu in range(2 * m):
            val, tail = numeric_eval(h[mu], t2)
            tail_max = max(tail_max, tail * abs(cmath.sqrt(j)) ** -(2 * k - 1))
            lhs = cmath.sqrt(j) ** -(2 * k - 1) * val
            rhs = sum(eps[nu][mu].conjugate() * right[nu] for nu in range(2 * m))
            rhs_plain = sum(eps[nu][mu] * right[nu] for nu in range(2 * m))
            worst = max(worst, abs(lhs - rhs))
            worst_plain = max(worst_plain, abs(lhs - rhs_plain))
    return {
        "index": m,
        "weight": k,
        "N": N,
        "taus": [[t.real, t.imag] for t in map(complex, taus)],
        "max_residual": worst,
        "max_residual_unconjugated": worst_plain,
        "max_tail_bound": tail_max,
        "tolerance": tol,
        "tail_ok": tail_max < tol,
    }


# --------------------------------------------------------------------------
# witness matrices


@dataclass(frozen=True)
class WitnessMatrix:
    """T = ((a, mu/2), (mu/2, p)) with a = (D + mu^2) / 4p."""

    p: int
    mu: int
    D: int
    a: Fraction = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.D + self.mu * self.mu, 4 * self.p))

    @property
    def entries(self) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        b = Fraction(self.mu, 2)
        return ((self.a, b), (b, Fraction(self.p)))

    def det(self) -> Fraction:
        (a, b), (_, d) = self.entries
        return a * d - b * b

    def is_half_integral(self) -> bool:
        (a, b), (_, d) = self.entries
        return a.denominator == 1 and d.denominator == 1 and (2 * b).denominator == 1

    def is_positive_definite(self) -> bool:
        return self.a > 0 and self.det() > 0

    def to_json(self) -> dict:
        return {
            "p": self.p,
            "mu": self.mu,
            "D": self.D,
            "entries": [[str(x) for x in row] for row in self.entries],
            "four_det": str(4 * self.det()),
        }


def build_witness(p: int, mu: int, D: int) -> WitnessMatrix:
    if p % 2 == 0 or not is_prime(p):
        raise ValueError(f"p must be an odd prime, got {p}")
    if D <= 0:
        raise ValueError(f"D must be positive, got {D}")
    if (D + mu * mu) % (4 * p):
        raise ValueError(f"D = {D} is not -mu^2 mod 4p for mu = {mu}, p = {p}")
    return WitnessMatrix(p, mu, D)
