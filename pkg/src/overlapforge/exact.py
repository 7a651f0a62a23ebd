"""Exact numeric substrate: rationals, closed rational intervals, log2 brackets.

Rationals are :class:`fractions.Fraction`, which is always stored reduced
with a positive denominator and compares by cross-multiplication.  No
floating point is used on any certified path.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Union

from .errors import DomainError, StateParseError

BigRational = Fraction
Number = Union[int, Fraction]


@dataclass(frozen=True)
class Pow8:
    """A power of eight kept as its exponent, so products become shifts."""

    exponent: int

    def __post_init__(self):
        if not isinstance(self.exponent, int) or self.exponent < 0:
            raise DomainError(f"pow8 exponent must be a non-negative int, got {self.exponent!r}")

    @property
    def value(self) -> int:
        return 1 << (3 * self.exponent)

    @property
    def log2(self) -> int:
        return 3 * self.exponent

    def __int__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return f"Pow8({self.exponent})"


Digit = Union[int, Pow8]


def digit_value(d: Digit) -> int:
    return d.value if isinstance(d, Pow8) else d


def digit_mul(d: Digit, x: int) -> int:
    """Return ``d * x``; a shift when ``d`` is symbolic."""
    if isinstance(d, Pow8):
        return x << (3 * d.exponent) if x >= 0 else -((-x) << (3 * d.exponent))
    return d * x


def as_pow8(n: int) -> Digit:
    """Return ``Pow8(e)`` if ``n == 8**e`` with ``e >= 1``, else ``n`` unchanged."""
    if n >= 8 and n & (n - 1) == 0 and (n.bit_length() - 1) % 3 == 0:
        return Pow8((n.bit_length() - 1) // 3)
    return n


def pow8_ceiling(n: int) -> Pow8:
    """Smallest power of eight (exponent >= 1) that is ``>= n``."""
    if n < 1:
        raise DomainError("pow8_ceiling needs n >= 1")
    e = max(1, -(-((n - 1).bit_length()) // 3))
    while (1 << (3 * e)) < n:
        e += 1
    while e > 1 and (1 << (3 * (e - 1))) >= n:
        e -= 1
    return Pow8(e)


@dataclass(frozen=True)
class RationalInterval:
    """Closed interval ``[lo, hi]`` with exact rational endpoints."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise DomainError(f"empty interval [{self.lo}, {self.hi}]")

    @classmethod
    def point(cls, x: Number) -> "RationalInterval":
        return cls(x, x)

    @classmethod
    def hull(cls, *xs: Number) -> "RationalInterval":
        return cls(min(xs), max(xs))

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    @property
    def midpoint(self) -> Fraction:
        return (self.lo + self.hi) / 2

    @property
    def is_point(self) -> bool:
        return self.lo == self.hi

    def contains(self, x: Union[Number, "RationalInterval"]) -> bool:
        if isinstance(x, RationalInterval):
            return self.lo <= x.lo and x.hi <= self.hi
        return self.lo <= x <= self.hi

    __contains__ = contains

    def excludes_zero(self) -> bool:
        return self.lo > 0 or self.hi < 0

    def __add__(self, other: Union[Number, "RationalInterval"]) -> "RationalInterval":
        if isinstance(other, RationalInterval):
            return RationalInterval(self.lo + other.lo, self.hi + other.hi)
        return RationalInterval(self.lo + other, self.hi + other)

    __radd__ = __add__

    def __sub__(self, other: Union[Number, "RationalInterval"]) -> "RationalInterval":
        if isinstance(other, RationalInterval):
            return RationalInterval(self.lo - other.hi, self.hi - other.lo)
        return RationalInterval(self.lo - other, self.hi - other)

    def __neg__(self) -> "RationalInterval":
        return RationalInterval(-self.hi, -self.lo)

    def scale(self, k: Number) -> "RationalInterval":
        a, b = self.lo * k, self.hi * k
        return RationalInterval(a, b) if a <= b else RationalInterval(b, a)

    def __abs__(self) -> "RationalInterval":
        if self.lo >= 0:
            return self
        if self.hi <= 0:
            return -self
        return RationalInterval(0, max(-self.lo, self.hi))

    def __repr__(self) -> str:
        return f"[{self.lo}, {self.hi}]"


def interval_combine(a: RationalInterval, b: RationalInterval, op: str, scale: int = 1) -> RationalInterval:
    """Enclose ``{scale * (x op y) : x in a, y in b}`` for op in add/sub/abs_diff."""
    if op == "add":
        r = a + b
    elif op == "sub":
        r = a - b
    elif op == "abs_diff":
        r = abs(a - b)
    else:
        raise DomainError(f"unknown interval op {op!r}")
    return r.scale(scale)


@dataclass(frozen=True)
class Log2Bounds:
    """Bracket ``[lo, hi]`` on ``log2(x)`` of some positive quantity ``x``."""

    lo: Fraction
    hi: Fraction

    def __post_init__(self):
        object.__setattr__(self, "lo", Fraction(self.lo))
        object.__setattr__(self, "hi", Fraction(self.hi))
        if self.lo > self.hi:
            raise DomainError("Log2Bounds needs lo <= hi")

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, v: Number) -> bool:
        return self.lo <= v <= self.hi

    def __add__(self, other: Union[Number, "Log2Bounds"]) -> "Log2Bounds":
        if isinstance(other, Log2Bounds):
            return Log2Bounds(self.lo + other.lo, self.hi + other.hi)
        return Log2Bounds(self.lo + other, self.hi + other)

    def widen_hi(self, delta: Number) -> "Log2Bounds":
        return Log2Bounds(self.lo, self.hi + delta)


def _floor_log2(num: int, den: int) -> int:
    k = num.bit_length() - den.bit_length()
    if k >= 0:
        if num < den << k:
            k -= 1
    elif num << -k < den:
        k -= 1
    return k


def log2_bounds(x: Number, precision_bits: int = 53) -> Log2Bounds:
    """Bracket ``log2(x)`` with width ``2**-precision_bits`` (exact for powers of two)."""
    x = Fraction(x)
    if x <= 0:
        raise DomainError("log2_bounds needs x > 0")
    if precision_bits < 0:
        raise DomainError("precision_bits must be >= 0")
    num, den = x.numerator, x.denominator
    k = _floor_log2(num, den)
    if x == Fraction(2) ** k:
        return Log2Bounds(k, k)
    p = precision_bits
    w = 2 * p + 32
    while True:
        bits = _fraction_bits(num, den, k, p, w)
        if bits is not None:
            return Log2Bounds(k + Fraction(bits, 1 << p), k + Fraction(bits + 1, 1 << p))
        w *= 2


def _fraction_bits(num: int, den: int, k: int, p: int, w: int):
    # y = x / 2^k in (1, 2), held as fixed point [ylo, yhi] * 2^-w
    if k >= 0:
        n, d = num << w, den << k
    else:
        n, d = num << (w - k), den
    ylo = n // d
    yhi = -((-n) // d)
    two = 2 << w
    bits = 0
    for _ in range(p):
        ylo = (ylo * ylo) >> w
        yhi = -((-(yhi * yhi)) >> w)
        bits <<= 1
        if ylo >= two:
            bits |= 1
            ylo >>= 1
            yhi = -((-yhi) >> 1)
        elif yhi >= two:
            return None
    return bits


def base8_zero_one_check(n: int) -> bool:
    """True iff every base-8 digit of ``n`` is 0 or 1."""
    if n < 0:
        raise DomainError("base8_zero_one_check needs n >= 0")
    # each octal digit occupies 3 bits; only the low bit of each may be set
    mask = int("6" * max(1, -(-n.bit_length() // 3)), 8)
    return n & mask == 0


# -- serialization -----------------------------------------------------------

# past this size decimal strings hit the interpreter's conversion limit and get slow
_DECIMAL_BITS = 12000


def encode_int(n: int):
    """Decimal string, or ``{"pow2": k}`` / ``{"hex": ...}`` for very large values."""
    if n.bit_length() <= _DECIMAL_BITS:
        return str(n)
    if n > 0 and n & (n - 1) == 0:
        return {"pow2": n.bit_length() - 1}
    return {"hex": format(n, "x")} if n > 0 else {"hex": "-" + format(-n, "x")}


def json_int(n: int):
    """Plain JSON number when small, else the :func:`encode_int` form."""
    return n if n.bit_length() <= _DECIMAL_BITS else encode_int(n)


def decode_int(obj) -> int:
    if isinstance(obj, bool):
        raise StateParseError(f"expected integer, got {obj!r}")
    if isinstance(obj, int):
        return obj
    if isinstance(obj, str):
        try:
            return int(obj, 10)
        except ValueError:
            raise StateParseError(f"bad decimal integer {obj!r}") from None
    if isinstance(obj, dict) and len(obj) == 1:
        (key, v), = obj.items()
        try:
            if key == "pow8":
                return Pow8(decode_int(v)).value
            if key == "pow2":
                e = decode_int(v)
                if e < 0:
                    raise StateParseError(f"negative exponent in {obj!r}")
                return 1 << e
            if key == "hex" and isinstance(v, str):
                return int(v, 16)
        except (ValueError, DomainError):
            raise StateParseError(f"bad integer {obj!r}") from None
    raise StateParseError(f"expected integer, got {obj!r}")


def encode_digit(d: Digit):
    if isinstance(d, Pow8):
        return {"pow8": d.exponent}
    return encode_int(d)


def decode_digit(obj) -> Digit:
    if isinstance(obj, dict) and set(obj) == {"pow8"}:
        e = obj["pow8"]
        if isinstance(e, bool) or not isinstance(e, int):
            e = decode_int(e)
        try:
            return Pow8(e)
        except DomainError as exc:
            raise StateParseError(str(exc)) from None
    return decode_int(obj)


def encode_rational(x: Number):
    x = Fraction(x)
    if max(x.numerator.bit_length(), x.denominator.bit_length()) > _DECIMAL_BITS:
        return {"num": encode_int(x.numerator), "den": encode_int(x.denominator)}
    return f"{x.numerator}/{x.denominator}"


def decode_rational(s) -> Fraction:
    if isinstance(s, int) and not isinstance(s, bool):
        return Fraction(s)
    if isinstance(s, dict) and set(s) == {"num", "den"}:
        num, den = decode_int(s["num"]), decode_int(s["den"])
        if den <= 0:
            raise StateParseError(f"non-positive denominator in {s!r}")
        return Fraction(num, den)
    if not isinstance(s, str):
        raise StateParseError(f"expected 'num/den' string, got {s!r}")
    num, sep, den = s.partition("/")
    try:
        if not sep:
            return Fraction(int(num, 10))
        d = int(den, 10)
        if d <= 0:
            raise StateParseError(f"non-positive denominator in {s!r}")
        return Fraction(int(num, 10), d)
    except ValueError:
        raise StateParseError(f"bad rational {s!r}") from None
