"""The three IFS families, coded cylinder images and the brute-force Δ_n oracle.

Every depth-``n`` image ``phi_a(0)`` of a family with contraction ``1/b`` is
``(A + B*s + C*t) / b**n`` for an integer triple ``(A, B, C)``: digit ``i`` of
the word contributes ``b**(n-i)`` times its translation pattern.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .errors import DomainError, ResourceCapError
from .exact import RationalInterval, encode_rational, log2_bounds

DEFAULT_ENUMERATION_CAP = 10


class IfsFamily(str, Enum):
    HALF6 = "half6"
    EIGHTH6 = "eighth6"
    HALF8 = "half8"

    @property
    def base(self) -> int:
        return 8 if self is IfsFamily.EIGHTH6 else 2

    @property
    def patterns(self) -> tuple:
        """Translation of each map as ``(omega, delta, delta')``, in map order."""
        six = ((0, 0, 0), (1, 0, 0), (0, 1, 0), (1, 1, 0), (0, 0, 1), (1, 0, 1))
        if self is IfsFamily.HALF8:
            return six + ((0, 1, 1), (1, 1, 1))
        return six

    @property
    def map_count(self) -> int:
        return len(self.patterns)

    @property
    def ratio(self) -> Fraction:
        return Fraction(1, self.base)


def as_family(f) -> IfsFamily:
    try:
        return IfsFamily(f)
    except ValueError:
        raise DomainError(f"unknown IFS family {f!r}") from None


@dataclass(frozen=True, order=True)
class CodedPoint:
    A: int
    B: int
    C: int
    n: int = field(compare=False)

    @property
    def triple(self) -> tuple:
        return (self.A, self.B, self.C)

    def value(self, s, t, base: int = 2):
        return (self.A + self.B * s + self.C * t) / Fraction(base) ** self.n


@dataclass(frozen=True)
class DeltaReport:
    n: int
    min_gap: RationalInterval
    attained_pair: tuple
    point_count: int
    inconclusive: bool = False

    def to_record(self) -> dict:
        a, b = self.attained_pair
        return {
            "n": self.n,
            "min_gap": {"lo": _ratstr(self.min_gap.lo), "hi": _ratstr(self.min_gap.hi)},
            "attained_pair": [[str(v) for v in a.triple], [str(v) for v in b.triple]],
            "point_count": self.point_count,
            "inconclusive": self.inconclusive,
        }


def _ratstr(x: Fraction):
    return encode_rational(x)


def _check_depth(n: int, cap: int | None) -> int:
    if cap is None:
        cap = int(os.environ.get("OVERLAPFORGE_ENUM_CAP", DEFAULT_ENUMERATION_CAP))
    if n < 1:
        raise DomainError("depth n must be >= 1")
    if n > cap:
        raise ResourceCapError(f"depth {n} exceeds enumeration cap {cap}")
    return n


def word_to_coded(family, word: Sequence[int]) -> CodedPoint:
    """Coded triple of ``phi_{w1} o ... o phi_{wn}(0)`` for 1-based map indices."""
    family = as_family(family)
    pats = family.patterns
    b = family.base
    A = B = C = 0
    for w in word:
        if not 1 <= w <= len(pats):
            raise DomainError(f"map index {w} outside 1..{len(pats)}")
        o, d, e = pats[w - 1]
        A, B, C = A * b + o, B * b + d, C * b + e
    return CodedPoint(A, B, C, len(word))


def compose_at_zero(family, word: Sequence[int], s, t):
    """Evaluate ``phi_w(0)`` by literally composing the maps (innermost last)."""
    family = as_family(family)
    r = family.ratio
    x = Fraction(0)
    for w in reversed(word):
        o, d, e = family.patterns[w - 1]
        x = r * (x + o + d * s + e * t)
    return x


def coded_arrays(family, n: int, cap: int | None = None) -> tuple:
    """``(A, B, C)`` as int64 arrays in lexicographic word order."""
    family = as_family(family)
    _check_depth(n, cap)
    pats = np.array(family.patterns, dtype=np.int64)
    k, b = len(pats), family.base
    A = np.zeros(1, dtype=np.int64)
    B = np.zeros(1, dtype=np.int64)
    C = np.zeros(1, dtype=np.int64)
    for _ in range(n):
        m = len(A)
        A = np.repeat(A * b, k) + np.tile(pats[:, 0], m)
        B = np.repeat(B * b, k) + np.tile(pats[:, 1], m)
        C = np.repeat(C * b, k) + np.tile(pats[:, 2], m)
    return A, B, C


def enumerate_coded_points(family, n: int, cap: int | None = None) -> list:
    A, B, C = coded_arrays(family, n, cap)
    return [CodedPoint(int(a), int(b), int(c), n) for a, b, c in zip(A.tolist(), B.tolist(), C.tolist())]


def _scaled(s_enc: RationalInterval, t_enc: RationalInterval) -> tuple:
    D = math.lcm(s_enc.lo.denominator, s_enc.hi.denominator, t_enc.lo.denominator, t_enc.hi.denominator)
    return (
        D,
        int(s_enc.lo * D),
        int(s_enc.hi * D),
        int(t_enc.lo * D),
        int(t_enc.hi * D),
    )


def _affine_range(dA: int, dB: int, dC: int, D: int, S: tuple, T: tuple) -> tuple:
    base = dA * D
    bs = (dB * S[0], dB * S[1])
    ct = (dC * T[0], dC * T[1])
    return base + min(bs) + min(ct), base + max(bs) + max(ct)


def _sup_abs(lo: int, hi: int) -> int:
    return max(abs(lo), abs(hi))


def _adjacent_chunk(args) -> tuple:
    """Best adjacent pair (by sup |difference|) over ``order[start:stop+1]``."""
    trip, order, start, stop, D, S, T = args
    best = None
    for i in range(start, stop):
        a, c = trip[order[i]], trip[order[i + 1]]
        lo, hi = _affine_range(c[0] - a[0], c[1] - a[1], c[2] - a[2], D, S, T)
        key = (_sup_abs(lo, hi), min(a, c), max(a, c))
        if best is None or key < best:
            best = key
    return best


def _chunks(total: int, workers: int) -> list:
    step = max(1, -(-total // workers))
    return [(i, min(i + step, total)) for i in range(0, total, step)]


def delta_brute(
    family,
    n: int,
    s_enc: RationalInterval,
    t_enc: RationalInterval,
    workers: int = 1,
    cap: int | None = None,
) -> DeltaReport:
    """Certified enclosure of Δ_n, uniform over ``s in s_enc, t in t_enc``.

    ``hi`` is the smallest worst-case distance among neighbours in midpoint
    order; ``lo`` is the smallest separation between point enclosures over
    all pairs.  For point enclosures both equal the exact Δ_n.
    """
    family = as_family(family)
    for enc in (s_enc, t_enc):
        if enc.lo < 0 or enc.hi > 1:
            raise DomainError("parameter enclosures must lie in [0, 1]")
    A, B, C = coded_arrays(family, n, cap)
    D, s_lo, s_hi, t_lo, t_hi = _scaled(s_enc, t_enc)
    S, T = (s_lo, s_hi), (t_lo, t_hi)
    trip = list(zip(A.tolist(), B.tolist(), C.tolist()))
    # B, C >= 0 so each point's enclosure is attained at the matching endpoints
    xlo = [a * D + b * s_lo + c * t_lo for a, b, c in trip]
    xhi = [a * D + b * s_hi + c * t_hi for a, b, c in trip]
    N = len(trip)
    scale = D * family.base**n

    order = sorted(range(N), key=lambda i: (xlo[i] + xhi[i], trip[i]))
    spans = _chunks(N - 1, max(1, workers))
    tasks = [(trip, order, a, b, D, S, T) for a, b in spans]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            results = list(ex.map(_adjacent_chunk, tasks))
    else:
        results = [_adjacent_chunk(task) for task in tasks]
    hi_num, pa, pb = min(r for r in results if r is not None)

    by_lo = sorted(range(N), key=lambda i: (xlo[i], trip[i]))
    lo_num = None
    run_max = xhi[by_lo[0]]
    for j in by_lo[1:]:
        sep = max(0, xlo[j] - run_max)
        if lo_num is None or sep < lo_num:
            lo_num = sep
            if sep == 0:
                break
        if xhi[j] > run_max:
            run_max = xhi[j]

    gap = RationalInterval(Fraction(lo_num, scale), Fraction(hi_num, scale))
    pair = (CodedPoint(*pa, n), CodedPoint(*pb, n))
    # lo == hi == 0 is a genuine coincidence, not a failure to separate
    return DeltaReport(n, gap, pair, N, inconclusive=lo_num == 0 and hi_num > 0)


def difference_triples(family, n: int, cap: int | None = None) -> set:
    """All nonzero ``(dA, dB, dC)`` realised by two distinct depth-n codes, up to sign."""
    family = as_family(family)
    _check_depth(n, cap)
    pats = family.patterns
    b = family.base
    steps = sorted({(p[0] - q[0], p[1] - q[1], p[2] - q[2]) for p in pats for q in pats})
    cur = {(0, 0, 0)}
    for _ in range(n):
        cur = {(x * b + u, y * b + v, z * b + w) for (x, y, z) in cur for (u, v, w) in steps}
    cur.discard((0, 0, 0))
    return {d if d > (0, 0, 0) else (-d[0], -d[1], -d[2]) for d in cur}


def _exclusion_chunk(args) -> list:
    triples, D, S, T = args
    bad = []
    for dA, dB, dC in triples:
        lo, hi = _affine_range(dA, dB, dC, D, S, T)
        if lo <= 0 <= hi:
            bad.append((dA, dB, dC))
    return bad


@dataclass(frozen=True)
class ExclusionResult:
    n: int
    certified: bool
    checked: int
    witnesses: tuple

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "certified_no_overlap": self.certified,
            "checked": self.checked,
            "witnesses": [[str(v) for v in w] for w in self.witnesses],
        }


def overlap_exclusion_search(
    family,
    n: int,
    s_enc: RationalInterval,
    t_enc: RationalInterval,
    workers: int = 1,
    cap: int | None = None,
) -> ExclusionResult:
    """Certify that no two distinct depth-n words give the same map.

    Every realisable difference triple must have ``dA + dB*s + dC*t``
    bounded away from zero over the enclosures; triples that are not are
    returned as witnesses.
    """
    family = as_family(family)
    triples = sorted(difference_triples(family, n, cap))
    D, s_lo, s_hi, t_lo, t_hi = _scaled(s_enc, t_enc)
    S, T = (s_lo, s_hi), (t_lo, t_hi)
    spans = _chunks(len(triples), max(1, workers))
    tasks = [(triples[a:b], D, S, T) for a, b in spans]
    if workers > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=workers) as ex:
            parts = list(ex.map(_exclusion_chunk, tasks))
    else:
        parts = [_exclusion_chunk(task) for task in tasks]
    bad = tuple(w for part in parts for w in part)
    return ExclusionResult(n, not bad, len(triples), bad)


@dataclass(frozen=True)
class DimensionResult:
    family: IfsFamily
    value: float
    enclosure: RationalInterval
    comparison: str  # "<", "=", ">" against 1

    def to_record(self) -> dict:
        return {
            "family": self.family.value,
            "value": repr(self.value),
            "enclosure": [_ratstr(self.enclosure.lo), _ratstr(self.enclosure.hi)],
            "compared_to_one": self.comparison,
        }


def similarity_dimension(family, precision_bits: int = 60) -> DimensionResult:
    """Solve ``sum |r_i|**d = 1``; with one shared ratio ``d = log(k)/log(1/r)``."""
    family = as_family(family)
    num = log2_bounds(family.map_count, precision_bits)
    den = log2_bounds(family.base, precision_bits)
    # base is a power of two, so den is exact
    assert den.lo == den.hi
    enc = RationalInterval(num.lo / den.lo, num.hi / den.lo)
    if enc.lo > 1:
        cmp = ">"
    elif enc.hi < 1:
        cmp = "<"
    elif enc.is_point and enc.lo == 1:
        cmp = "="
    else:  # pragma: no cover - unreachable for the three families
        raise DomainError("enclosure straddles 1")
    value = float(enc.midpoint) if not enc.is_point else float(enc.lo)
    return DimensionResult(family, value, enc, cmp)
