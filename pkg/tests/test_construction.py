import math
from fractions import Fraction

import pytest

from conftest import brute_marker
from overlapforge import (
    EpsilonSpec,
    certify_delta,
    eps_range_min,
    initial_step,
    iterate_step,
    no_overlap_certificate,
    run,
)
from overlapforge.construction import covering, covers_without_gaps, replay_scale_markers
from overlapforge.errors import BitBudgetError, DomainError, IncompleteSpecError, NeedsMoreRounds
from overlapforge.exact import base8_zero_one_check, digit_value


def reference_construction(eps_fn, rounds, N=2, pow8_digits=False):
    """Slow reference: brute range minima, nested evaluation, counting markers."""

    def digit(a, b):
        c = math.ceil(1 / min(eps_fn(n) for n in range(a, b + 1)))
        if pow8_digits:
            e = 1
            while 8**e < c:
                e += 1
            c = 8**e
        return c

    def denom(ds):
        x = Fraction(0)
        for d in reversed(ds):
            x = 1 / (d + x)
        return x.denominator

    s, t = [1, digit(1, N)], [1]
    L = [brute_marker(denom(s))]
    t.append(digit(1, L[0]))
    M = [brute_marker(denom(t))]
    while len(s) < rounds:
        s.append(digit(L[-1], M[-1]))
        L.append(brute_marker(denom(s)))
        t.append(digit(M[-1], L[-1]))
        M.append(brute_marker(denom(t)))
    return s, t, L, M


def pow8_fn(n):
    return Fraction(1, 8**n)


def test_eps_range_min_examples(pow8):
    assert eps_range_min(pow8, 1, 2) == Fraction(1, 64)
    assert eps_range_min(pow8, 7, 22) == Fraction(1, 8**22)
    table = EpsilonSpec("table", values=(Fraction(1, 2), Fraction(1, 100)))
    assert eps_range_min(table, 1, 2) == Fraction(1, 100)
    assert table.effective(1) == Fraction(1, 8)


def test_eps_table_without_tail(pow8):
    table = EpsilonSpec("table", values=(Fraction(1, 2),))
    with pytest.raises(IncompleteSpecError):
        table.range_min(1, 2)
    with pytest.raises(DomainError):
        pow8.range_min(3, 2)


def test_eps_parse_and_records():
    for text in ("pow8", "superexp:2", "table:1/2,1/100;pow8", "table:1/3"):
        e = EpsilonSpec.parse(text)
        assert EpsilonSpec.from_record(e.to_record()) == e
    assert EpsilonSpec.parse("superexp:2").effective(3) == Fraction(1, 2**18)
    with pytest.raises(DomainError):
        EpsilonSpec.parse("geometric")


def test_initial_step_N2(pow8):
    st = initial_step(pow8, 2)
    assert digit_value(st.s_digits[2]) == 64 and st.s_table.Q(2) == 65 and st.L == (7,)
    assert digit_value(st.t_digits[2]) == 2097152 and st.t_table.Q(2) == 2097153 and st.M == (22,)
    assert brute_marker(65) == 7 and brute_marker(2097153) == 22
    assert 2 * 7 < 22
    assert st.s_table.pq(1) == (1, 1) and st.t_table.pq(1) == (1, 1)


def test_initial_step_N1(pow8):
    st = initial_step(pow8, 1)
    assert digit_value(st.s_digits[2]) == 8 and st.s_table.Q(2) == 9 and st.L == (4,)


def test_initial_step_variant(pow8):
    st = initial_step(pow8, 2, family="eighth6")
    assert digit_value(st.s_digits[2]) == 64
    assert base8_zero_one_check(st.s_table.Q(2))


def test_iterate_values(state2, state4):
    st3 = iterate_step(state2)
    assert digit_value(st3.s_digits[3]) == 8**22
    assert st3.s_table.Q(3) == 65 * 2**66 + 1 and st3.L[-1] == 73
    assert digit_value(st3.t_digits[3]) == 8**73
    assert st3.t_table.Q(3) == 2**240 + 2**219 + 1 and st3.M[-1] == 241
    assert state4.s_table.Q(4) == 8**241 * st3.s_table.Q(3) + 65
    assert state4.L == (7, 73, 796)
    assert state4.M == (22, 241, 2629)


def test_matches_reference_construction(state4):
    s, t, L, M = reference_construction(pow8_fn, 4)
    assert state4.s_digits.values() == s and state4.t_digits.values() == t
    assert list(state4.L) == L and list(state4.M) == M


def test_table_eps_matches_reference():
    vals = (Fraction(1, 3), Fraction(1, 1000), Fraction(1, 10**5), Fraction(1, 3 * 10**5)) + tuple(
        Fraction(1, 7**n + 8**n) for n in range(5, 40)
    )
    eps = EpsilonSpec("table", values=vals, tail=EpsilonSpec("pow8"))

    def fn(n):
        raw = vals[n - 1] if n <= len(vals) else Fraction(1, 8**n)
        return min(raw, Fraction(1, 8**n))

    st = run(eps, 3, N=3)
    s, t, L, M = reference_construction(fn, 3, N=3)
    assert st.s_digits.values() == s and st.t_digits.values() == t
    assert list(st.L) == L and list(st.M) == M
    assert replay_scale_markers(st)


def test_invariants_replay(state4):
    assert replay_scale_markers(state4)
    assert all(2 * L < M for L, M in zip(state4.L, state4.M))
    assert covers_without_gaps(state4)
    windows = covering(state4)
    assert windows[0] == ("s", 2, 1, 2) and windows[1] == ("t", 2, 1, 7)


def test_run_rounds_one_is_initial_step(pow8):
    assert run(pow8, 1) == initial_step(pow8)
    with pytest.raises(DomainError):
        run(pow8, 0)


def test_certify_examples(state2, state3, state4):
    c1 = certify_delta(state2, 1)
    assert c1.bound <= Fraction(1, 8) and c1.bound == Fraction(1, 130)
    c22 = certify_delta(state3, 22)
    assert (c22.side, c22.m) == ("s", 2)
    assert c22.bound == Fraction(1, 2**22 * (65 * 2**66 + 1))
    assert 65 * 2**66 + 1 > 4**22 and c22.bound < Fraction(1, 8**22)
    with pytest.raises(NeedsMoreRounds):
        certify_delta(state2, 23)
    assert certify_delta(state3, 23).bound <= Fraction(1, 8**23)
    with pytest.raises(NeedsMoreRounds):
        certify_delta(state4, 797)


def test_certificates_cover_range(state4):
    sides = {}
    for n in range(1, state4.certified_through + 1):
        c = certify_delta(state4, n)
        assert c.bound <= c.epsilon_n == Fraction(1, 8**n)
        sides.setdefault(c.side, []).append(n)
    assert set(sides) == {"s", "t"}


def test_no_overlap_examples(state2, state3, state4):
    c = no_overlap_certificate(state4, 2**10)
    assert c.witness_m == 3
    qm, qpm = state4.s_table.Q(3), state4.t_table.Q(3)
    assert 2**20 * qm < 2**93 < 2**240 <= qpm and 2**11 <= 2**241
    assert no_overlap_certificate(state3, 1).witness_m == 2
    with pytest.raises(NeedsMoreRounds):
        no_overlap_certificate(state2, 2**40)
    assert 2**80 * 65 > 2097153


def test_shadow_brackets_contain_exact(pow8, state4):
    sh = run(pow8, 4, mode="shadow")
    for m in range(2, 5):
        lo, hi = sh.L_range(m)
        assert lo <= state4.L[m - 2] <= hi
        lo, hi = sh.M_range(m)
        assert lo <= state4.M[m - 2] <= hi
        assert sh.s_log2[m - 1].lo <= math.log2(state4.s_table.Q(m)) <= sh.s_log2[m - 1].hi
    assert sh.s_digits == state4.s_digits and sh.t_digits == state4.t_digits


def test_shadow_certificate_and_budget(pow8):
    sh = run(pow8, 12, mode="shadow")
    assert all(2 * sh.L_range(m)[1] < sh.M_range(m)[0] for m in range(2, 13))
    assert no_overlap_certificate(sh, 2**1000).witness_m >= 3
    with pytest.raises(DomainError):
        certify_delta(sh, 1)


def test_bit_budget(pow8, monkeypatch):
    with pytest.raises(BitBudgetError):
        run(pow8, 4, bit_budget=1000)
    monkeypatch.setenv("OVERLAPFORGE_BIT_BUDGET", "1000")
    with pytest.raises(BitBudgetError):
        run(pow8, 4)
    monkeypatch.delenv("OVERLAPFORGE_BIT_BUDGET")
    assert run(pow8, 4).rounds == 4


def test_clamp_idempotence(pow8):
    raw = EpsilonSpec("table", values=(Fraction(1, 2), Fraction(1, 100), Fraction(1, 3)), tail=EpsilonSpec("superexp", a=1))
    for eps in (pow8, raw):
        a = run(eps, 3)
        b = run(eps.clamped(5), 3)
        assert (a.s_digits, a.t_digits, a.L, a.M) == (b.s_digits, b.t_digits, b.L, b.M)


def test_variant_zero_one(pow8):
    st = run(pow8, 4, family="eighth6")
    for tab in (st.s_table, st.t_table):
        for m in range(1, 5):
            assert base8_zero_one_check(tab.P(m)) and base8_zero_one_check(tab.Q(m))
    for n in (1, 2, 7, 22, 100, 241, st.certified_through):
        c = certify_delta(st, n)
        assert c.base == 8 and c.bound <= c.epsilon_n
        assert c.q_m <= 8**n - 1 and base8_zero_one_check(c.q_m)


def test_variant_rounds_non_power_digits():
    vals = (Fraction(1, 10), Fraction(1, 1000)) + tuple(Fraction(1, 3 * 8**n) for n in range(3, 30))
    eps = EpsilonSpec("table", values=vals, tail=EpsilonSpec("pow8"))
    st = run(eps, 3, family="eighth6")
    assert digit_value(st.s_digits[2]) == 8**4
    s, t, L, M = reference_construction(lambda n: eps.effective(n), 3, pow8_digits=True)
    assert st.s_digits.values() == s and st.t_digits.values() == t
    for tab in (st.s_table, st.t_table):
        assert all(base8_zero_one_check(tab.Q(m)) for m in range(1, 4))


def test_superexp_exact_and_shadow():
    eps = EpsilonSpec("superexp", a=1)
    st = run(eps, 3)
    assert digit_value(st.t_digits[2]) == 2**49
    for n in (1, 5, st.L[0], st.M[0], st.M[0] + 1, st.certified_through):
        c = certify_delta(st, n)
        assert c.bound <= Fraction(1, 2 ** max(n * n, 3 * n))
    with pytest.raises(BitBudgetError):
        iterate_step(st)
    sh = run(eps, 3, mode="shadow")
    # shadow rounds 2^49 up to 8^17, so brackets need only be sound, not equal
    assert sh.L_range(2)[0] <= st.L[0] <= sh.L_range(2)[1]
    assert all(2 * sh.L_range(m)[1] < sh.M_range(m)[0] for m in range(2, 4))
