"""Sieving a half-integral weight form down to coprime support."""

from fractions import Fraction

from thetanv.halfint import HalfIntForm, SupportRule, check_sieve_postconditions, run_sieve, synthetic_form

f = HalfIntForm(Fraction(5, 2), 12, {3: 1, 15: 2}, 60, SupportRule(6, {3}))
g, exps, trace = run_sieve(f, 3, 2)
for s in trace.steps:
    print(f"{s.op:14s} p={s.prime} stage={s.stage} level={s.level} -> {s.verdict}")
print("exponents", exps, "g =", g.coeffs, "level", g.level)

f = synthetic_form(45, 2, {3: 2, 5: 1}, bound=900, seed=7)
g, exps, trace = run_sieve(f, 45, 2)
print("planted {3: 2, 5: 1}, found", exps, "level", g.level)
print(check_sieve_postconditions(f, g, exps, 45, 2))
