"""Continued-fraction convergents, error enclosures and cylinder hulls.

The expansions here are of numbers in (0, 1)::

    s = 1/(z1 + 1/(z2 + 1/(z3 + ...)))

with convergents ``p_m/q_m`` seeded by ``p_-1=1, q_-1=0, p_0=0, q_0=1``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .errors import DomainError, NeedsMoreDigits
from .exact import Digit, Pow8, RationalInterval, digit_mul, digit_value


@dataclass(frozen=True)
class PartialQuotients:
    """Digits ``(z_1, ..., z_k)``; with ``variant`` every ``z_m`` (m >= 2) is a power of 8."""

    digits: tuple
    variant: bool = False

    def __post_init__(self):
        digits = tuple(self.digits)
        object.__setattr__(self, "digits", digits)
        for i, d in enumerate(digits, start=1):
            if isinstance(d, Pow8):
                if d.exponent < 1 and i >= 2 and self.variant:
                    raise DomainError(f"digit {i} must be 8^e with e >= 1")
                continue
            if isinstance(d, bool) or not isinstance(d, int):
                raise DomainError(f"digit {i} is not an integer: {d!r}")
            if d < 1:
                raise DomainError(f"digit {i} must be >= 1, got {d}")
            if self.variant and i >= 2:
                raise DomainError(f"variant digit {i} must be a power of 8, got {d}")

    def __len__(self) -> int:
        return len(self.digits)

    def __getitem__(self, m: int) -> Digit:
        """1-based access, ``q[1]`` is the first digit."""
        if not 1 <= m <= len(self.digits):
            raise IndexError(m)
        return self.digits[m - 1]

    def extend(self, d: Digit) -> "PartialQuotients":
        return PartialQuotients(self.digits + (d,), self.variant)

    def values(self) -> list:
        return [digit_value(d) for d in self.digits]


@dataclass(frozen=True)
class ConvergentTable:
    """Convergents ``(p_m, q_m)`` for ``m = -1, 0, 1, ..., k``."""

    p: tuple
    q: tuple

    @property
    def depth(self) -> int:
        return len(self.p) - 2

    def pq(self, m: int) -> tuple:
        if not -1 <= m <= self.depth:
            raise NeedsMoreDigits(f"convergent index {m} outside -1..{self.depth}")
        return self.p[m + 1], self.q[m + 1]

    def P(self, m: int) -> int:
        return self.pq(m)[0]

    def Q(self, m: int) -> int:
        return self.pq(m)[1]

    def value(self, m: int) -> Fraction:
        p, q = self.pq(m)
        return Fraction(p, q)


def _as_quotients(q) -> PartialQuotients:
    if isinstance(q, PartialQuotients):
        return q
    return PartialQuotients(tuple(q))


def convergents(q: PartialQuotients | Sequence[Digit]) -> ConvergentTable:
    """Run the three-term recurrence over the digits."""
    q = _as_quotients(q)
    if not q.digits:
        raise DomainError("convergents needs at least one digit")
    ps = [1, 0]
    qs = [0, 1]
    for d in q.digits:
        ps.append(digit_mul(d, ps[-1]) + ps[-2])
        qs.append(digit_mul(d, qs[-1]) + qs[-2])
    return ConvergentTable(tuple(ps), tuple(qs))


def extend_table(t: ConvergentTable, d: Digit) -> ConvergentTable:
    """Append one convergent without recomputing the prefix."""
    p = digit_mul(d, t.p[-1]) + t.p[-2]
    q = digit_mul(d, t.q[-1]) + t.q[-2]
    return ConvergentTable(t.p + (p,), t.q + (q,))


def approx_error_bounds(t: ConvergentTable, m: int) -> RationalInterval:
    """Enclosure ``[1/(q_m(q_{m+1}+q_m)), 1/(q_m q_{m+1})]`` of ``|s - p_m/q_m|``."""
    if not 1 <= m <= t.depth - 1:
        raise NeedsMoreDigits(f"approx_error_bounds needs 1 <= m <= {t.depth - 1}, got {m}")
    qm, qn = t.Q(m), t.Q(m + 1)
    return RationalInterval(Fraction(1, qm * (qn + qm)), Fraction(1, qm * qn))


def cylinder_interval(q: PartialQuotients | Sequence[Digit], table: ConvergentTable | None = None) -> RationalInterval:
    """Closed hull of every number whose expansion begins with ``q``.

    The endpoints are ``p_k/q_k`` and the mediant ``(p_k+p_{k-1})/(q_k+q_{k-1})``.
    """
    q = _as_quotients(q)
    t = table if table is not None else convergents(q)
    k = len(q)
    pk, qk = t.pq(k)
    pj, qj = t.pq(k - 1)
    return RationalInterval.hull(Fraction(pk, qk), Fraction(pk + pj, qk + qj))


def best_approx_min(t: ConvergentTable, Q: int) -> tuple:
    """Locate the best approximation with denominator at most ``Q``.

    Returns ``(m, bound)`` where ``m`` is the largest index with ``q_m <= Q``
    and ``bound = [1/(q_{m+1}+q_m), 1/q_{m+1}]`` encloses ``|q_m s - p_m|``,
    which is also the minimum of ``|q s - p|`` over ``1 <= q <= Q``.
    """
    if Q < 1:
        raise DomainError("best_approx_min needs Q >= 1")
    m = None
    for i in range(0, t.depth + 1):
        if t.Q(i) <= Q:
            m = i
        else:
            break
    if m is None:
        raise DomainError("no convergent denominator <= Q")
    if m + 1 > t.depth:
        raise NeedsMoreDigits(f"need q_{m + 1} to bound |q_{m} s - p_{m}|; table has depth {t.depth}")
    qm, qn = t.Q(m), t.Q(m + 1)
    return m, RationalInterval(Fraction(1, qn + qm), Fraction(1, qn))


def evaluate(digits: Sequence[Digit]) -> Fraction:
    """Exact value of the finite expansion ``1/(z1 + 1/(z2 + ...))``."""
    x = Fraction(0)
    for d in reversed(list(digits)):
        x = 1 / (digit_value(d) + x)
    return x
