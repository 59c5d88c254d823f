from fractions import Fraction
from itertools import product
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from thetanv.halfint import (
    HalfIntForm,
    HypothesisError,
    SupportRule,
    check_sieve_postconditions,
    descend,
    expected_level,
    op_U,
    op_V,
    run_sieve,
    sieve_coprime,
    sieve_primes,
    synthetic_form,
)

K = Fraction(5, 2)


def form(coeffs, level=12, bound=60, rule=None):
    return HalfIntForm(K, level, coeffs, bound, rule)


def test_form_validation():
    with pytest.raises(ValueError):
        HalfIntForm(Fraction(3), 12, {}, 10)
    with pytest.raises(ValueError):
        HalfIntForm(K, 6, {}, 10)
    with pytest.raises(ValueError):
        form({2: 1}, rule=SupportRule(2, {1}))
    f = form({1: 1}, rule=SupportRule(2, {1}))
    assert f.a(100) == 0
    with pytest.raises(ValueError):
        f.a(101)


def test_zero_verdicts():
    assert form({}).zero_verdict() == "zero_up_to_bound"
    assert form({}, rule=SupportRule.nothing_beyond()).zero_verdict() == "zero"
    assert form({}, rule=SupportRule(6, {1})).zero_verdict() == "zero_up_to_bound"
    assert form({1: 1}).zero_verdict() == "nonzero"


def test_op_V_examples():
    assert op_V(form({}), 3).stored_zero()
    v = op_V(form({1: 1}), 3)
    assert v.coeffs == {3: 1} and v.level == 36


def test_op_U_examples():
    assert op_U(form({}), 3).stored_zero()
    assert op_U(form({3: 5, 1: 2}), 3).coeffs == {1: 5}


def test_one_minus_UV_kills_exactly_p_divisible_support():
    # f | (1 - U_p V_p) keeps nothing; the relevant projection is f - V_p U_p f
    for coeffs, p, expect_zero in [({3: 1, 6: 2}, 3, True), ({3: 1, 4: 2}, 3, False), ({}, 5, True)]:
        f = form(coeffs)
        vu = op_V(op_U(f, p), p)
        rest = {n: c - vu.coeffs.get(n, 0) for n, c in f.coeffs.items()}
        assert (not any(rest.values())) == expect_zero


@given(st.dictionaries(st.integers(1, 40), st.integers(-5, 5), max_size=10), st.sampled_from([2, 3, 5, 7]))
def test_UV_identity(coeffs, p):
    f = form(coeffs, bound=40)
    assert op_U(op_V(f, p), p).coeffs == f.coeffs
    g = form({n * p: c for n, c in coeffs.items()}, level=4 * p, bound=40 * p)
    assert descend(g, p).coeffs == f.coeffs


def test_sieve_examples():
    f = form({n: 1 for n in range(1, 7)})
    assert sieve_coprime(f, 1).coeffs == f.coeffs
    s = sieve_coprime(f, 6)
    assert s.coeffs == {1: 1, 5: 1} and s.level == 12 * 36
    assert sieve_coprime(s, 6).coeffs == s.coeffs
    with pytest.raises(ValueError):
        sieve_coprime(f, 4)


def test_descend_examples():
    z = descend(form({}), 3)
    assert z.stored_zero() and z.level == 4
    assert descend(form({3: 1, 6: 2}), 3).coeffs == {1: 1, 2: 2}
    with pytest.raises(HypothesisError) as err:
        descend(form({1: 1}), 3)
    assert err.value.witness == 1
    with pytest.raises(HypothesisError):
        descend(form({5: 1}, level=12), 5)  # 5 does not divide L = 3


def test_support_rule_ops():
    r = SupportRule(6, {1, 5})
    assert r.dilate(3).allows(3) and not r.dilate(3).allows(1)
    back = r.dilate(3).contract(3)
    assert all(back.allows(n) == r.allows(n) for n in range(100))
    assert r.coprime_to(5).allows(7) and not r.coprime_to(5).allows(25)
    assert SupportRule.from_json(r.to_json()) == r


def test_json_round_trip():
    f = form({1: Fraction(1, 3), 5: -2}, rule=SupportRule(6, {1, 5}))
    assert HalfIntForm.from_json(f.to_json()) == f
    data = {"kappa_num": 5, "L": 3, "entries": [[1, 1, 1]]}
    g = HalfIntForm.from_json(data, bound=10)
    assert g.level == 12 and g.bound == 10 and g.kappa == K


def test_sieve_primes_and_level():
    assert sieve_primes(15, 2) == (2, [3, 5])
    assert sieve_primes(45, 6) == (6, [5])
    assert expected_level(3, 2, {3: 1}) == 144
    assert expected_level(15, 2, {3: 1, 5: 0}) == 18000


def test_trace_hand_example_L3():
    # a(3) = 1, a(15) = 2 and nothing else off 6Z + 3
    f = form({3: 1, 15: 2}, bound=60, rule=SupportRule(6, {3}))
    g, exps, trace = run_sieve(f, 3, 2)
    assert exps == {3: 1} and g.coeffs == {1: 1, 5: 2} and g.level == 144
    assert trace.g0.level == 48 and trace.g0.verdict == "nonzero"
    steps = [(s.op, s.stage, s.level, s.verdict) for s in trace.steps]
    assert steps == [
        ("coprime-sieve", (1, 0), 432, "zero"),
        ("descend", (1, 0), 16, "nonzero"),
        ("coprime-sieve", (1, 1), 144, "nonzero"),
    ]
    assert trace.warnings == [] and trace.diagnosis is None
    assert check_sieve_postconditions(f, g, exps, 3, 2)["ok"]


def test_trace_hand_example_L15():
    f = form({3: 1, 9: 2, 21: 3, 33: -1}, level=60, bound=40, rule=SupportRule(30, {3, 9, 21, 27}))
    g, exps, trace = run_sieve(f, 15, 2)
    assert exps == {3: 1, 5: 0}
    assert g.coeffs == {1: 1, 7: 3, 11: -1} and g.level == 18000
    levels = [(s.op, s.prime, s.stage, s.level) for s in trace.steps]
    assert levels == [
        ("coprime-sieve", 3, (1, 0), 2160),
        ("descend", 3, (1, 0), 80),
        ("coprime-sieve", 3, (1, 1), 720),
        ("coprime-sieve", 5, (2, 0), 18000),
    ]
    assert check_sieve_postconditions(f, g, exps, 15, 2)["ok"]


def test_spec_literal_input_violates_hypothesis():
    # a(6) != 0 with (6, L_f) = 2
    with pytest.raises(HypothesisError) as err:
        run_sieve(form({3: 1, 6: 1}, rule=SupportRule(3, {0})), 3, 2)
    assert err.value.witness == 6


def test_already_coprime_input_is_fixed():
    f = form({1: 1, 5: 2, 7: -1}, bound=10, rule=SupportRule(6, {1, 5}))
    g, exps, trace = run_sieve(f, 3, 2)
    assert exps == {3: 0} and g.coeffs == f.coeffs
    assert len(trace.steps) == 1


def test_run_sieve_rejects_bad_inputs():
    f = form({1: 1})
    with pytest.raises(ValueError):
        run_sieve(form({}), 3, 2)
    with pytest.raises(ValueError):
        run_sieve(f, 3, 3)
    with pytest.raises(ValueError):
        run_sieve(f, 3, 8)
    with pytest.raises(ValueError):
        run_sieve(f, 5, 2)  # level 12 != 20
    with pytest.raises(ValueError):
        run_sieve(HalfIntForm(Fraction(3, 2), 12, {1: 1}, 10), 3, 2)


def test_missing_rule_is_flagged():
    g, exps, trace = run_sieve(form({3: 1, 15: 2}, bound=60), 3, 2)
    assert exps == {3: 1}
    assert trace.steps[0].verdict == "zero_up_to_bound"
    assert any("only up to" in w for w in trace.warnings)


def test_all_stages_zero_diagnosis():
    # supported on 9Z although alpha_3 = 1 for L = 3
    f = form({9: 1, 45: 1}, bound=60, rule=SupportRule(18, {9}))
    g, exps, trace = run_sieve(f, 3, 2)
    assert g is None and trace.diagnosis
    assert [s.verdict for s in trace.steps if s.op == "coprime-sieve"] == ["zero", "zero"]


CASES = [
    (L, Lf, dict(zip(sieve_primes(L, Lf)[1], combo)))
    for L, Lf in product([3, 9, 15, 45], [2, 6])
    for combo in product(*[range({3: 2 if L % 9 == 0 else 1, 5: 1}[p] + 1) for p in sieve_primes(L, Lf)[1]])
]


@pytest.mark.parametrize("L,Lf,exps", CASES)
def test_synthetic_sieve(L, Lf, exps):
    f = synthetic_form(L, Lf, exps, bound=600, seed=L * 100 + Lf)
    g, got, trace = run_sieve(f, L, Lf)
    assert got == exps
    P = 1
    for p, i in exps.items():
        P *= p**i
    for n in range(1, g.bound + 1):
        want = f.a(P * n) if gcd(n, 4 * L) == 1 and P * n <= f.bound else 0
        assert g.a(n) == want
    assert g.level == expected_level(L, Lf, exps)
    assert check_sieve_postconditions(f, g, exps, L, Lf)["ok"]
    assert trace.warnings == []


def test_enough_synthetic_cases():
    assert len(CASES) >= 20


@settings(max_examples=30, deadline=None)
@given(st.sampled_from([3, 9, 15, 45]), st.sampled_from([2, 6]), st.integers(0, 10**6))
def test_synthetic_random_seeds(L, Lf, seed):
    primes = sieve_primes(L, Lf)[1]
    exps = {p: seed % (2 if p == 5 or L % 9 else 3) for p in primes}
    f = synthetic_form(L, Lf, exps, bound=300, seed=seed)
    g, got, _ = run_sieve(f, L, Lf)
    assert got == exps and check_sieve_postconditions(f, g, got, L, Lf)["ok"]
