from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from overlapforge.contfrac import (
    PartialQuotients,
    approx_error_bounds,
    best_approx_min,
    convergents,
    cylinder_interval,
    evaluate,
)
from overlapforge.errors import DomainError, NeedsMoreDigits
from overlapforge.exact import Pow8, RationalInterval

digit_seqs = st.lists(st.integers(1, 1000), min_size=1, max_size=50)


def direct(digits):
    """Value of the finite fraction by nested evaluation, no recurrence."""
    x = Fraction(0)
    for d in reversed(digits):
        x = Fraction(1) / (d + x)
    return x


def test_single_digit():
    t = convergents([1])
    assert t.pq(1) == (1, 1)


def test_123():
    t = convergents([1, 2, 3])
    assert [t.value(m) for m in (1, 2, 3)] == [Fraction(1), Fraction(2, 3), Fraction(7, 10)]
    assert direct([1, 2, 3]) == Fraction(7, 10)


def test_1_64():
    t = convergents([1, 64])
    assert t.pq(2) == (64, 65)
    assert direct([1, 64]) == Fraction(64, 65)


def test_symbolic_digits_match_integers():
    a = convergents((1, Pow8(2), Pow8(22)))
    b = convergents((1, 64, 8**22))
    assert a == b
    assert a.Q(3) == 65 * 2**66 + 1


def test_seeds():
    t = convergents([5])
    assert t.pq(-1) == (1, 0) and t.pq(0) == (0, 1)


def test_rejects_bad_digits():
    with pytest.raises(DomainError):
        convergents([1, 0])
    with pytest.raises(DomainError):
        convergents([])
    with pytest.raises(DomainError):
        PartialQuotients((1, 9), variant=True)
    PartialQuotients((1, Pow8(3)), variant=True)


def test_error_bounds_examples():
    assert approx_error_bounds(convergents([1, 64]), 1) == RationalInterval(Fraction(1, 66), Fraction(1, 65))
    assert approx_error_bounds(convergents([1, 1, 1]), 1) == RationalInterval(Fraction(1, 3), Fraction(1, 2))
    with pytest.raises(NeedsMoreDigits):
        approx_error_bounds(convergents([1, 64]), 2)


def test_initial_step_bound_on_extensions():
    hi = approx_error_bounds(convergents([1, 64]), 1).hi
    for tail in ([1], [7], [3, 9], [1000, 2, 5]):
        s = direct([1, 64] + tail)
        assert abs(s - 1) < hi == Fraction(1, 65)


def test_cylinder_examples():
    assert cylinder_interval([1]) == RationalInterval(Fraction(1, 2), Fraction(1))
    assert cylinder_interval([1, 64]) == RationalInterval.hull(Fraction(64, 65), Fraction(65, 66))
    assert cylinder_interval([1, 64]).contains(cylinder_interval([1, 64, 7]))


def test_best_approx_examples():
    m, b = best_approx_min(convergents([1, 64]), 63)
    assert m == 1 and b == RationalInterval(Fraction(1, 66), Fraction(1, 65))
    with pytest.raises(NeedsMoreDigits):
        best_approx_min(convergents([1, 64]), 65)
    m, b = best_approx_min(convergents([1, 2, 3]), 5)
    assert m == 2 and b == RationalInterval(Fraction(1, 13), Fraction(1, 10))


def test_best_approx_brute_minimum():
    digits = [1, 2, 3, 4, 5, 6]
    x = direct(digits + [7, 8])
    t = convergents(digits)
    for Q in range(1, t.Q(5)):
        m, bound = best_approx_min(t, Q)
        brute = min(abs(q * x - round(q * x)) for q in range(1, Q + 1))
        assert brute == abs(t.Q(m) * x - t.P(m))
        assert bound.lo <= brute <= bound.hi


@given(digit_seqs)
def test_determinant_and_monotone(digits):
    t = convergents(digits)
    for m in range(0, len(digits) + 1):
        p, q = t.pq(m)
        pp, qq = t.pq(m - 1)
        assert p * qq - pp * q == (-1) ** (m + 1)
    assert all(t.Q(m) < t.Q(m + 1) for m in range(1, len(digits)))
    assert t.value(len(digits)) == direct(digits)


@given(digit_seqs, st.lists(st.integers(1, 1000), min_size=1, max_size=5))
def test_prefix_cylinders_enclose_extensions(digits, more):
    x = direct(digits + more)
    for k in range(1, len(digits) + 1):
        assert x in cylinder_interval(digits[:k])


@given(digit_seqs, st.integers(1, 1000))
def test_cylinder_width_and_nesting(digits, extra):
    t = convergents(digits)
    k = len(digits)
    c = cylinder_interval(digits)
    assert c.width == Fraction(1, t.Q(k) * (t.Q(k) + t.Q(k - 1)))
    assert c.contains(cylinder_interval(digits + [extra]))


@given(
    st.lists(st.integers(1, 1000), min_size=2, max_size=30),
    st.lists(st.integers(1, 1000), min_size=0, max_size=4),
    st.integers(2, 1000),
)
def test_property1_strict(digits, middle, last):
    # a final digit of 1 would merge into its predecessor, so extensions end in >= 2
    x = direct(digits + middle + [last])
    t = convergents(digits)
    for m in range(1, len(digits)):
        err = abs(x - t.value(m))
        assert Fraction(1, t.Q(m) * (t.Q(m + 1) + t.Q(m))) < err < Fraction(1, t.Q(m) * t.Q(m + 1))


@settings(max_examples=60)
@given(st.lists(st.integers(1, 6), min_size=3, max_size=8), st.lists(st.integers(1, 50), min_size=4, max_size=6))
def test_property3_exhaustive(digits, tail):
    x = direct(digits + tail)
    t = convergents(digits)
    for m in range(1, len(digits)):
        ref = abs(t.Q(m) * x - t.P(m))
        for q in range(1, min(200, t.Q(m + 1) - 1) + 1):
            assert abs(q * x - round(q * x)) >= ref


def test_evaluate_matches_direct():
    assert evaluate([1, Pow8(1), 3]) == direct([1, 8, 3])
