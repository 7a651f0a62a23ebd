"""Digit-selection construction of ``s`` and ``t`` and its certificates.

Two continued fractions are grown in lockstep.  Each new digit of ``s`` is
``ceil(1 / min eps_n)`` over the window ``[L, M]`` of the previous round, and
each new digit of ``t`` likewise over ``[M, L_next]``.  The convergent
denominators' dyadic sizes ``L_m`` (for ``s``) and ``M_m`` (for ``t``) then
alternate so that, together, the two sides cover every depth ``n``.

Exact mode carries every convergent as a Python int.  Shadow mode keeps only
power-of-8 digit exponents and two-sided log2 brackets on the denominators,
which reaches rounds where the integers could never be materialised.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional

from .contfrac import (
    ConvergentTable,
    PartialQuotients,
    best_approx_min,
    convergents,
    extend_table,
)
from .errors import (
    BitBudgetError,
    DomainError,
    IncompleteSpecError,
    InvariantViolation,
    NeedsMoreDigits,
    NeedsMoreRounds,
)
from .exact import (
    Digit,
    Log2Bounds,
    Pow8,
    as_pow8,
    base8_zero_one_check,
    decode_rational,
    encode_int,
    digit_value,
    encode_rational,
    log2_bounds,
    pow8_ceiling,
)
from .ifs import IfsFamily, as_family

DEFAULT_BIT_BUDGET = 1 << 24
_LOG2_GUARD = 64


def default_bit_budget() -> int:
    raw = os.environ.get("OVERLAPFORGE_BIT_BUDGET")
    return int(raw) if raw else DEFAULT_BIT_BUDGET


# -- epsilon sequences --------------------------------------------------------

_CLOSED_FORMS = ("pow8", "superexp")


@dataclass(frozen=True)
class EpsilonSpec:
    """Target sequence ``eps_n``, always clamped to ``min(eps_n, 8**-n)``.

    ``pow8``: ``eps_n = 8**-n``.  ``superexp``: ``eps_n = 2**-(a*n*n)``.
    ``table``: explicit rationals, continued by an optional closed-form,
    non-increasing ``tail`` sequence.
    """

    kind: str = "pow8"
    a: int = 1
    values: tuple = ()
    tail: Optional["EpsilonSpec"] = None

    def __post_init__(self):
        if self.kind not in _CLOSED_FORMS + ("table",):
            raise DomainError(f"unknown epsilon kind {self.kind!r}")
        if self.kind == "superexp" and (not isinstance(self.a, int) or self.a < 1):
            raise DomainError("superexp needs integer a >= 1")
        if self.kind == "table":
            vals = tuple(Fraction(v) for v in self.values)
            if any(v <= 0 for v in vals):
                raise DomainError("epsilon table entries must be positive")
            object.__setattr__(self, "values", vals)
            if self.tail is not None and self.tail.kind not in _CLOSED_FORMS:
                raise DomainError("table tail must be a closed form (pow8 or superexp)")

    # exact values

    def _raw_log2(self, n: int) -> int:
        """``-log2(raw eps_n)`` for the closed forms."""
        return 3 * n if self.kind == "pow8" else self.a * n * n

    def raw(self, n: int) -> Fraction:
        if n < 1:
            raise DomainError("epsilon index starts at 1")
        if self.kind in _CLOSED_FORMS:
            return Fraction(1, 1 << self._raw_log2(n))
        if n <= len(self.values):
            return self.values[n - 1]
        if self.tail is None:
            raise IncompleteSpecError(f"epsilon table has {len(self.values)} entries and no tail; asked for n={n}")
        return self.tail.raw(n)

    def effective(self, n: int) -> Fraction:
        return min(self.raw(n), Fraction(1, 1 << (3 * n)))

    def range_min(self, a: int, b: int) -> Fraction:
        """Exact ``min(effective eps_n : a <= n <= b)``."""
        if not 1 <= a <= b:
            raise DomainError(f"bad epsilon range [{a}, {b}]")
        if self.kind in _CLOSED_FORMS:
            return self.effective(b)
        best = Fraction(1, 1 << (3 * b))
        for n in range(a, min(b, len(self.values)) + 1):
            best = min(best, self.values[n - 1])
        if b > len(self.values):
            if self.tail is None:
                raise IncompleteSpecError(f"epsilon table has {len(self.values)} entries and no tail; asked for n={b}")
            best = min(best, self.tail.raw(b))
        return best

    def range_min_dyadic(self, a: int, b: int) -> Optional[int]:
        """``k`` with ``range_min(a, b) == 2**-k`` when that is known in O(1)."""
        if self.kind in _CLOSED_FORMS:
            return max(3 * b, self._raw_log2(b))
        if b <= len(self.values):
            return None
        if self.tail is None:
            raise IncompleteSpecError(f"epsilon table has {len(self.values)} entries and no tail; asked for n={b}")
        if all(self.values[n - 1] >= Fraction(1, 1 << (3 * b)) for n in range(a, len(self.values) + 1)):
            return max(3 * b, self.tail._raw_log2(b))
        return None

    def need_bits(self, a: int, b: int) -> Fraction:
        """Upper bound on ``log2(1 / range_min(a, b))``; closed forms only beyond the table."""
        k = self.range_min_dyadic(a, b)
        if k is not None:
            return Fraction(k)
        best = Fraction(3 * b)
        for n in range(a, min(b, len(self.values)) + 1):
            best = max(best, -log2_bounds(self.values[n - 1], 32).lo)
        if b > len(self.values):
            best = max(best, Fraction(self.tail._raw_log2(b)))
        return best

    def log2_effective(self, n: int) -> Log2Bounds:
        if self.kind in _CLOSED_FORMS or (n > len(self.values) and self.tail is not None):
            k = max(3 * n, (self if self.kind in _CLOSED_FORMS else self.tail)._raw_log2(n))
            return Log2Bounds(-k, -k)
        return log2_bounds(self.effective(n), 53)

    def clamped(self, upto: int) -> "EpsilonSpec":
        """Table of the first ``upto`` effective values followed by the raw tail."""
        vals = tuple(self.effective(n) for n in range(1, upto + 1))
        tail = self if self.kind in _CLOSED_FORMS else self.tail
        return EpsilonSpec("table", values=vals, tail=tail)

    def to_record(self) -> dict:
        if self.kind == "pow8":
            return {"kind": "pow8", "params": {}}
        if self.kind == "superexp":
            return {"kind": "superexp", "params": {"a": self.a}}
        return {
            "kind": "table",
            "params": {
                "values": [encode_rational(v) for v in self.values],
                "tail": self.tail.to_record() if self.tail is not None else None,
            },
        }

    @classmethod
    def from_record(cls, rec: dict) -> "EpsilonSpec":
        kind = rec["kind"]
        params = rec.get("params") or {}
        if kind == "pow8":
            return cls("pow8")
        if kind == "superexp":
            return cls("superexp", a=int(params["a"]))
        if kind == "table":
            tail = params.get("tail")
            return cls(
                "table",
                values=tuple(decode_rational(v) for v in params["values"]),
                tail=cls.from_record(tail) if tail else None,
            )
        raise DomainError(f"unknown epsilon kind {kind!r}")

    @classmethod
    def parse(cls, text: str) -> "EpsilonSpec":
        """Parse ``pow8``, ``superexp:A`` or ``table:v1,v2,...[;tail]``."""
        kind, _, rest = text.partition(":")
        if kind == "pow8" and not rest:
            return cls("pow8")
        if kind == "superexp":
            return cls("superexp", a=int(rest or 1))
        if kind == "table":
            vals, _, tail = rest.partition(";")
            return cls(
                "table",
                values=tuple(decode_rational(v.strip()) for v in vals.split(",") if v.strip()),
                tail=cls.parse(tail) if tail else None,
            )
        raise DomainError(f"cannot parse epsilon sequence {text!r}")


def eps_range_min(eps: EpsilonSpec, a: int, b: int) -> Fraction:
    return eps.range_min(a, b)


# -- scale markers ------------------------------------------------------------

def scale_marker(q: int) -> int:
    """The ``L`` with ``2**(L-1) - 1 <= q < 2**L - 1``."""
    return (q + 1).bit_length()


def marker_holds(L: int, q: int) -> bool:
    return (1 << (L - 1)) - 1 <= q < (1 << L) - 1


def _marker_range(b: Log2Bounds) -> tuple:
    lo_floor = math.floor(b.lo)
    # log2(q + 1) <= log2(q) + 2**(1 - log2 q), capped for bracket size
    guard = min(max(lo_floor - 1, 0), _LOG2_GUARD)
    hi = b.hi + Fraction(1, 1 << guard)
    return lo_floor + 1, math.floor(hi) + 1


def _next_log2(prev: Log2Bounds, d: Pow8) -> Log2Bounds:
    e3 = d.log2
    # q_m = z q_{m-1} + q_{m-2} with q_{m-2} <= q_{m-1}: extra factor < 1 + 2**-3e
    slack = Fraction(1, 1 << min(e3 - 1, _LOG2_GUARD))
    return Log2Bounds(prev.lo + e3, prev.hi + e3 + slack)


def _digit_log2_lower(d: Digit) -> int:
    return d.log2 if isinstance(d, Pow8) else d.bit_length() - 1


# -- state --------------------------------------------------------------------

@dataclass(frozen=True)
class ConstructionState:
    """Full trace of the construction.

    ``L[i]`` and ``M[i]`` belong to round ``m = i + 2``.  In shadow mode
    ``shadow_L``/``shadow_M`` hold ``(lo, hi)`` brackets, ``L``/``M`` are empty
    and the convergent tables are absent.
    """

    family: IfsFamily
    eps: EpsilonSpec
    N: int
    mode: str
    s_digits: PartialQuotients
    t_digits: PartialQuotients
    L: tuple = ()
    M: tuple = ()
    s_table: Optional[ConvergentTable] = field(default=None, compare=False, repr=False)
    t_table: Optional[ConvergentTable] = field(default=None, compare=False, repr=False)
    shadow_L: tuple = ()
    shadow_M: tuple = ()
    s_log2: tuple = field(default=(), repr=False)  # s_log2[i] brackets log2 q_(i+1)
    t_log2: tuple = field(default=(), repr=False)
    bit_budget: int = field(default=DEFAULT_BIT_BUDGET, compare=False, repr=False)

    @property
    def rounds(self) -> int:
        return len(self.s_digits)

    @property
    def variant(self) -> bool:
        return self.family is IfsFamily.EIGHTH6

    @property
    def exact(self) -> bool:
        return self.mode == "exact"

    def L_range(self, m: int) -> tuple:
        if self.exact:
            v = self.L[m - 2]
            return v, v
        return self.shadow_L[m - 2]

    def M_range(self, m: int) -> tuple:
        if self.exact:
            v = self.M[m - 2]
            return v, v
        return self.shadow_M[m - 2]

    @property
    def certified_through(self) -> int:
        """Largest ``n`` for which every ``1..n`` is covered."""
        return self.L_range(self.rounds)[0]

    def widening(self) -> list:
        """Bracket widths ``(L_hi - L_lo, M_hi - M_lo)`` per round (zeros in exact mode)."""
        return [
            (self.L_range(m)[1] - self.L_range(m)[0], self.M_range(m)[1] - self.M_range(m)[0])
            for m in range(2, self.rounds + 1)
        ]


def _choose_digit(eps: EpsilonSpec, a: int, b: int, mode: str, variant: bool, budget: int) -> Digit:
    if mode == "shadow":
        need = eps.need_bits(a, b)
        return Pow8(max(1, math.ceil(need / 3)))
    k = eps.range_min_dyadic(a, b)
    if k is not None:
        if variant or k % 3 == 0:
            return Pow8(max(1, -(-k // 3)))
        if k > budget:
            raise BitBudgetError(f"digit needs {k} bits > budget {budget}; use shadow mode")
        return 1 << k
    m = eps.range_min(a, b)
    c = -(-m.denominator // m.numerator)
    return pow8_ceiling(c) if variant else as_pow8(c)


def _check_budget(d: Digit, table: ConvergentTable, budget: int):
    bits = _digit_log2_lower(d) + 1 + table.q[-1].bit_length()
    if bits > budget:
        raise BitBudgetError(
            f"next convergent needs ~{bits} bits > budget {budget}; use shadow mode or raise OVERLAPFORGE_BIT_BUDGET"
        )


def initial_step(
    eps: EpsilonSpec,
    N: int = 2,
    family=IfsFamily.HALF6,
    mode: str = "exact",
    bit_budget: Optional[int] = None,
) -> ConstructionState:
    """Rounds 1 and 2: ``z_1 = z'_1 = 1``, ``z_2`` from ``[1, N]``, ``z'_2`` from ``[1, L_2]``."""
    family = as_family(family)
    if N < 1:
        raise DomainError("N must be >= 1")
    if mode not in ("exact", "shadow"):
        raise DomainError(f"unknown mode {mode!r}")
    budget = default_bit_budget() if bit_budget is None else bit_budget
    variant = family is IfsFamily.EIGHTH6
    base = dict(family=family, eps=eps, N=N, mode=mode, bit_budget=budget)

    if mode == "exact":
        z2 = _choose_digit(eps, 1, N, mode, variant, budget)
        s_digits = PartialQuotients((1, z2), variant)
        s_table = convergents(s_digits)
        L2 = scale_marker(s_table.Q(2))
        w2 = _choose_digit(eps, 1, L2, mode, variant, budget)
        t_digits = PartialQuotients((1, w2), variant)
        t_table = convergents(t_digits)
        M2 = scale_marker(t_table.Q(2))
        if not 2 * L2 < M2:
            raise InvariantViolation(f"2*L_2 = {2 * L2} >= M_2 = {M2}")
        return ConstructionState(
            s_digits=s_digits, t_digits=t_digits, L=(L2,), M=(M2,), s_table=s_table, t_table=t_table, **base
        )

    one = Log2Bounds(0, 0)
    z2 = _choose_digit(eps, 1, N, mode, variant, budget)
    sb = _next_log2(one, z2)
    L2 = _marker_range(sb)
    w2 = _choose_digit(eps, 1, L2[1], mode, variant, budget)
    tb = _next_log2(one, w2)
    M2 = _marker_range(tb)
    if not 2 * L2[1] < M2[0]:
        raise InvariantViolation(f"conservative 2*L_2 = {2 * L2[1]} >= M_2 = {M2[0]}")
    return ConstructionState(
        s_digits=PartialQuotients((1, z2), variant),
        t_digits=PartialQuotients((1, w2), variant),
        shadow_L=(L2,),
        shadow_M=(M2,),
        s_log2=(one, sb),
        t_log2=(one, tb),
        **base,
    )


def iterate_step(state: ConstructionState) -> ConstructionState:
    """Append ``z_{k+1}`` from ``[L_k, M_k]`` and ``z'_{k+1}`` from ``[M_k, L_{k+1}]``."""
    k = state.rounds
    eps, variant, budget = state.eps, state.variant, state.bit_budget
    if state.exact:
        Lk, Mk = state.L[-1], state.M[-1]
        z = _choose_digit(eps, Lk, Mk, "exact", variant, budget)
        _check_budget(z, state.s_table, budget)
        s_table = extend_table(state.s_table, z)
        Ln = scale_marker(s_table.Q(k + 1))
        w = _choose_digit(eps, Mk, Ln, "exact", variant, budget)
        _check_budget(w, state.t_table, budget)
        t_table = extend_table(state.t_table, w)
        Mn = scale_marker(t_table.Q(k + 1))
        if not 2 * Ln < Mn:
            raise InvariantViolation(f"2*L_{k + 1} = {2 * Ln} >= M_{k + 1} = {Mn}")
        return _replace(
            state,
            s_digits=state.s_digits.extend(z),
            t_digits=state.t_digits.extend(w),
            s_table=s_table,
            t_table=t_table,
            L=state.L + (Ln,),
            M=state.M + (Mn,),
        )

    (Llo, _), (Mlo, Mhi) = state.shadow_L[-1], state.shadow_M[-1]
    z = _choose_digit(eps, Llo, Mhi, "shadow", variant, budget)
    sb = _next_log2(state.s_log2[-1], z)
    Ln = _marker_range(sb)
    w = _choose_digit(eps, Mlo, Ln[1], "shadow", variant, budget)
    tb = _next_log2(state.t_log2[-1], w)
    Mn = _marker_range(tb)
    if Mn[1].bit_length() > budget:
        raise BitBudgetError(f"shadow markers need {Mn[1].bit_length()} bits > budget {budget}")
    if not 2 * Ln[1] < Mn[0]:
        raise InvariantViolation(f"conservative 2*L_{k + 1} = {2 * Ln[1]} >= M_{k + 1} = {Mn[0]}")
    return _replace(
        state,
        s_digits=state.s_digits.extend(z),
        t_digits=state.t_digits.extend(w),
        shadow_L=state.shadow_L + (Ln,),
        shadow_M=state.shadow_M + (Mn,),
        s_log2=state.s_log2 + (sb,),
        t_log2=state.t_log2 + (tb,),
    )


def _replace(state: ConstructionState, **changes) -> ConstructionState:
    from dataclasses import replace

    return replace(state, **changes)


def run(
    eps: EpsilonSpec,
    rounds: int,
    mode: str = "exact",
    family=IfsFamily.HALF6,
    N: int = 2,
    bit_budget: Optional[int] = None,
) -> ConstructionState:
    """Build a state whose digit sequences have length ``max(rounds, 2)``."""
    if rounds < 1:
        raise DomainError("rounds must be >= 1")
    state = initial_step(eps, N, family, mode, bit_budget)
    while state.rounds < rounds:
        state = iterate_step(state)
    return state


def covering(state: ConstructionState) -> list:
    """Depth windows ``(side, round, a, b)`` certified by each digit choice."""
    out = [("s", 2, 1, state.N), ("t", 2, 1, state.L_range(2)[0])]
    for m in range(2, state.rounds):
        L, M, Ln = state.L_range(m)[0], state.M_range(m)[0], state.L_range(m + 1)[0]
        out.append(("s", m + 1, L, M))
        out.append(("t", m + 1, M, Ln))
    return out


def covers_without_gaps(state: ConstructionState) -> bool:
    upto = state.certified_through
    reach = 0
    for _, _, a, b in sorted(covering(state), key=lambda w: w[2]):
        if a > reach + 1:
            return False
        reach = max(reach, b)
    return reach >= upto


def replay_scale_markers(state: ConstructionState) -> bool:
    """Exact-mode check of every defining double inequality and ``2L < M``."""
    if not state.exact:
        raise DomainError("replay_scale_markers needs exact mode")
    for i, (L, M) in enumerate(zip(state.L, state.M)):
        m = i + 2
        if not marker_holds(L, state.s_table.Q(m)) or not marker_holds(M, state.t_table.Q(m)):
            return False
        if not 2 * L < M:
            return False
    return True


# -- certificates -------------------------------------------------------------

@dataclass(frozen=True)
class DeltaCertificate:
    """``Delta_n <= bound <= eps_n`` via the ``q_m`` convergent of one side."""

    n: int
    bound: Fraction
    epsilon_n: Fraction
    side: str
    m: int
    base: int
    p_m: int
    q_m: int
    q_next: int

    @property
    def round(self) -> int:
        return self.m + 1

    @property
    def trace(self) -> dict:
        b = self.base
        return {
            "side": self.side,
            "m": self.m,
            "inclusion": f"(p + x q)/{b}^n with 0 <= p, q <= {b}^n - 1" + (", base-8 digits in {0,1}" if b == 8 else ""),
            "inequality": "|q_m x - p_m| < 1/q_{m+1}",
            "bound": "1/(base^n * q_{m+1})",
        }

    def to_record(self) -> dict:
        return {
            "n": self.n,
            "bound": encode_rational(self.bound),
            "epsilon_n": encode_rational(self.epsilon_n),
            "side": self.side,
            "m": self.m,
            "base": self.base,
            "p_m": encode_int(self.p_m),
            "q_m": encode_int(self.q_m),
            "q_next": encode_int(self.q_next),
            "trace": self.trace,
        }


def _side_bound(table: ConvergentTable, Q: int) -> tuple:
    try:
        m, _ = best_approx_min(table, Q)
    except NeedsMoreDigits:
        # every listed q_m fits under Q; the deepest usable pair is (k-1, k)
        m = table.depth - 1
    return m, table.P(m), table.Q(m), table.Q(m + 1)


def certify_delta(state: ConstructionState, n: int) -> DeltaCertificate:
    """Certify ``Delta_n <= eps_n`` from the side whose window covers ``n``."""
    if not state.exact:
        raise DomainError("certify_delta needs an exact-mode state")
    if n < 1:
        raise DomainError("n must be >= 1")
    if n > state.certified_through:
        raise NeedsMoreRounds(f"n={n} exceeds certified range 1..{state.certified_through}; iterate further")
    b = 8 if state.variant else 2
    Q = b**n - 1
    eps_n = state.eps.effective(n)
    preferred = next(side for side, _, lo, hi in covering(state) if lo <= n <= hi)
    sides = [preferred, "t" if preferred == "s" else "s"]
    for side in sides:
        table = state.s_table if side == "s" else state.t_table
        m, p, q, q_next = _side_bound(table, Q)
        if m < 0 or q > Q or p > Q:
            continue
        if state.variant and not (base8_zero_one_check(p) and base8_zero_one_check(q)):
            continue
        bound = Fraction(1, b**n * q_next)
        if bound <= eps_n:
            return DeltaCertificate(n, bound, eps_n, side, m, b, p, q, q_next)
    raise InvariantViolation(f"no side certifies Delta_{n} <= eps_{n}")


@dataclass(frozen=True)
class NoOverlapCertificate:
    """Rules out ``t = (a/b) s + c/d`` for ``1 <= |a|, |b|, |d| <= B`` at round ``witness_m``."""

    B: int
    witness_m: int
    mode: str
    checks: dict

    def to_record(self) -> dict:
        return {"B": encode_int(self.B), "witness_m": self.witness_m, "mode": self.mode, "checks": self.checks}


def _no_overlap_checks(state: ConstructionState, B: int, m: int) -> Optional[dict]:
    Mlo = state.M_range(m)[0]
    if state.exact:
        qm, qpm = state.s_table.Q(m), state.t_table.Q(m)
        ok_i = B * B * qm < qpm
        ok_ii = 2 * B <= (1 << Mlo)
        rec = {
            "q_m": encode_int(qm),
            "q_prime_m": encode_int(qpm),
            "M_m": Mlo,
            "denominator": f"B^2 * q_m < q'_m: {ok_i}",
            "quality": f"2B <= 2^M_m: {ok_ii}",
        }
    else:
        lb = log2_bounds(B, 32)
        lhs = 2 * lb.hi + state.s_log2[m - 1].hi
        ok_i = lhs < state.t_log2[m - 1].lo
        ok_ii = log2_bounds(2 * B, 32).hi <= Mlo
        rec = {
            "log2_lhs_hi": encode_rational(lhs),
            "log2_q_prime_m_lo": encode_rational(state.t_log2[m - 1].lo),
            "M_m_lo": Mlo,
            "denominator": f"2 log2 B + log2 q_m < log2 q'_m: {ok_i}",
            "quality": f"log2(2B) <= M_m: {ok_ii}",
        }
    # the s digit after round m is at least 8^M_m; stored if present, else forced by the clamp
    if m + 1 <= state.rounds:
        ok_iii = _digit_log2_lower(state.s_digits[m + 1]) >= 3 * Mlo
    else:
        ok_iii = True
    rec["next_s_digit"] = f"z_(m+1) >= 8^M_m: {ok_iii}"
    if ok_i and ok_ii and ok_iii:
        return rec
    return None


def no_overlap_certificate(state: ConstructionState, B: int) -> NoOverlapCertificate:
    """Smallest round ``m >= 2`` at which both exact checks close the argument."""
    if B < 1:
        raise DomainError("coefficient bound B must be >= 1")
    for m in range(2, state.rounds + 1):
        rec = _no_overlap_checks(state, B, m)
        if rec is not None:
            return NoOverlapCertificate(B, m, state.mode, rec)
    raise NeedsMoreRounds(f"no witness for B={B} within {state.rounds} rounds")
