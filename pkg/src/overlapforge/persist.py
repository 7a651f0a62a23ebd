"""JSON state files, certificate files with replay, and CSV export."""

from __future__ import annotations

import csv
import io
import json
import math
from fractions import Fraction
from pathlib import Path

from .contfrac import PartialQuotients, convergents
from .construction import (
    ConstructionState,
    DeltaCertificate,
    EpsilonSpec,
    NoOverlapCertificate,
    _choose_digit,
    _no_overlap_checks,
    marker_holds,
    run,
)
from .errors import DomainError, OverlapForgeError, StateIntegrityError, StateParseError
from .exact import (
    Log2Bounds,
    base8_zero_one_check,
    decode_digit,
    decode_int,
    decode_rational,
    digit_value,
    encode_digit,
    encode_int,
    json_int,
    encode_rational,
)
from .ifs import as_family

STATE_FORMAT = "overlapforge-state/1"
CERT_FORMAT = "overlapforge-certificate/1"


# -- state --------------------------------------------------------------------

def state_to_record(state: ConstructionState, include_convergents: bool = False) -> dict:
    rec = {
        "format": STATE_FORMAT,
        "family": state.family.value,
        "eps": state.eps.to_record(),
        "N": state.N,
        "mode": state.mode,
        "rounds": state.rounds,
        "s_digits": [encode_digit(d) for d in state.s_digits.digits],
        "t_digits": [encode_digit(d) for d in state.t_digits.digits],
    }
    if state.exact:
        rec["L"] = [json_int(v) for v in state.L]
        rec["M"] = [json_int(v) for v in state.M]
        if include_convergents:
            rec["convergents"] = {
                side: {"p": [encode_int(v) for v in tab.p], "q": [encode_int(v) for v in tab.q]}
                for side, tab in (("s", state.s_table), ("t", state.t_table))
            }
    else:
        rec["L"] = [[json_int(v) for v in r] for r in state.shadow_L]
        rec["M"] = [[json_int(v) for v in r] for r in state.shadow_M]
        rec["s_log2"] = [[encode_rational(b.lo), encode_rational(b.hi)] for b in state.s_log2]
        rec["t_log2"] = [[encode_rational(b.lo), encode_rational(b.hi)] for b in state.t_log2]
    return rec


def _field(rec: dict, name: str, kind=None):
    if not isinstance(rec, dict) or name not in rec:
        raise StateParseError(f"missing field {name!r}")
    v = rec[name]
    if kind is not None and (not isinstance(v, kind) or isinstance(v, bool)):
        raise StateParseError(f"field {name!r} has wrong type {type(v).__name__}")
    return v


def _int_list(rec: dict, name: str) -> list:
    vals = _field(rec, name, list)
    out = []
    for i, v in enumerate(vals):
        try:
            out.append(decode_int(v) if isinstance(v, dict) else v)
        except StateParseError:
            raise StateParseError(f"field {name}[{i}] is not an integer") from None
        if isinstance(out[-1], bool) or not isinstance(out[-1], int):
            raise StateParseError(f"field {name}[{i}] is not an integer")
    return out


def _range_list(rec: dict, name: str) -> list:
    vals = _field(rec, name, list)
    out = []
    for i, v in enumerate(vals):
        if not (isinstance(v, list) and len(v) == 2):
            raise StateParseError(f"field {name}[{i}] is not a [lo, hi] integer pair")
        out.append(tuple(_int_list({name: v}, name)))
    return out


def _digits(rec: dict, name: str, variant: bool) -> PartialQuotients:
    raw = _field(rec, name, list)
    try:
        digits = tuple(decode_digit(d) for d in raw)
    except StateParseError as exc:
        raise StateParseError(f"field {name}: {exc}") from None
    try:
        return PartialQuotients(digits, variant)
    except DomainError as exc:
        raise StateIntegrityError(f"field {name}: {exc}") from None


def state_from_record(rec: dict, replay: bool = True) -> ConstructionState:
    """Rebuild a state; with ``replay`` every inequality is re-verified."""
    if _field(rec, "format", str) != STATE_FORMAT:
        raise StateParseError(f"unsupported format {rec.get('format')!r}")
    try:
        family = as_family(_field(rec, "family", str))
        eps = EpsilonSpec.from_record(_field(rec, "eps", dict))
    except (DomainError, KeyError, TypeError, ValueError) as exc:
        raise StateParseError(f"bad family/eps: {exc}") from None
    N = _field(rec, "N", int)
    mode = _field(rec, "mode", str)
    rounds = _field(rec, "rounds", int)
    if mode not in ("exact", "shadow"):
        raise StateParseError(f"field 'mode' must be exact or shadow, got {mode!r}")
    variant = family.value == "eighth6"
    s_digits = _digits(rec, "s_digits", variant)
    t_digits = _digits(rec, "t_digits", variant)
    if mode == "exact":
        L, M = _int_list(rec, "L"), _int_list(rec, "M")
        state = ConstructionState(
            family=family, eps=eps, N=N, mode=mode, s_digits=s_digits, t_digits=t_digits,
            L=tuple(L), M=tuple(M),
            s_table=convergents(s_digits) if s_digits.digits else None,
            t_table=convergents(t_digits) if t_digits.digits else None,
        )
    else:
        def brackets(name):
            try:
                return tuple(Log2Bounds(decode_rational(a), decode_rational(b)) for a, b in _field(rec, name, list))
            except (DomainError, ValueError, TypeError) as exc:
                raise StateParseError(f"field {name}: {exc}") from None

        state = ConstructionState(
            family=family, eps=eps, N=N, mode=mode, s_digits=s_digits, t_digits=t_digits,
            shadow_L=tuple(_range_list(rec, "L")), shadow_M=tuple(_range_list(rec, "M")),
            s_log2=brackets("s_log2"), t_log2=brackets("t_log2"),
        )
    if replay:
        replay_state(state, rounds, rec.get("convergents"))
    return state


def replay_state(state: ConstructionState, rounds: int, conv: dict | None = None) -> None:
    """Raise :class:`StateIntegrityError` unless every recorded quantity replays."""
    k = len(state.s_digits)
    if rounds != k or len(state.t_digits) != k or k < 2:
        raise StateIntegrityError(f"rounds={rounds} disagrees with digit counts {k}/{len(state.t_digits)}")
    if state.N < 1:
        raise StateIntegrityError("N must be >= 1")
    if digit_value(state.s_digits[1]) != 1 or digit_value(state.t_digits[1]) != 1:
        raise StateIntegrityError("first digits of s and t must be 1")
    if state.exact:
        if len(state.L) != k - 1 or len(state.M) != k - 1:
            raise StateIntegrityError("L/M length must equal rounds - 1")
        for i in range(k - 1):
            m = i + 2
            if not marker_holds(state.L[i], state.s_table.Q(m)):
                raise StateIntegrityError(f"L_{m}={state.L[i]} fails 2^(L-1)-1 <= q_{m} < 2^L-1")
            if not marker_holds(state.M[i], state.t_table.Q(m)):
                raise StateIntegrityError(f"M_{m}={state.M[i]} fails 2^(M-1)-1 <= q'_{m} < 2^M-1")
            if not 2 * state.L[i] < state.M[i]:
                raise StateIntegrityError(f"2*L_{m} >= M_{m}")
        # every digit must be the one the selection rule produces
        variant, budget = state.variant, state.bit_budget
        windows_s = [(1, state.N)] + [(state.L[i], state.M[i]) for i in range(k - 2)]
        windows_t = [(1, state.L[0])] + [(state.M[i], state.L[i + 1]) for i in range(k - 2)]
        for j, (a, b) in enumerate(windows_s, start=2):
            if digit_value(_choose_digit(state.eps, a, b, "exact", variant, budget)) != digit_value(state.s_digits[j]):
                raise StateIntegrityError(f"s digit {j} does not follow the selection rule on [{a}, {b}]")
        for j, (a, b) in enumerate(windows_t, start=2):
            if digit_value(_choose_digit(state.eps, a, b, "exact", variant, budget)) != digit_value(state.t_digits[j]):
                raise StateIntegrityError(f"t digit {j} does not follow the selection rule on [{a}, {b}]")
        if conv is not None:
            for side, tab in (("s", state.s_table), ("t", state.t_table)):
                try:
                    p = [decode_int(v) for v in conv[side]["p"]]
                    q = [decode_int(v) for v in conv[side]["q"]]
                except (KeyError, TypeError, StateParseError) as exc:
                    raise StateParseError(f"field convergents.{side}: {exc}") from None
                if tuple(p) != tab.p or tuple(q) != tab.q:
                    raise StateIntegrityError(f"stored convergents for {side} do not match the digits")
    # a fresh run must reproduce the file field for field
    try:
        fresh = run(state.eps, k, state.mode, state.family, state.N, state.bit_budget)
    except OverlapForgeError as exc:
        raise StateIntegrityError(f"construction replay failed: {exc}") from None
    for name in ("s_digits", "t_digits", "L", "M", "shadow_L", "shadow_M", "s_log2", "t_log2"):
        if getattr(fresh, name) != getattr(state, name):
            raise StateIntegrityError(f"field {name!r} differs from a fresh construction replay")


def dump_state(state: ConstructionState, path, include_convergents: bool = False) -> None:
    Path(path).write_text(json.dumps(state_to_record(state, include_convergents), indent=1) + "\n", encoding="utf-8")


def _load_json(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise StateParseError(f"cannot read {path}: {exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise StateParseError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_state(path) -> ConstructionState:
    return state_from_record(_load_json(path))


# -- certificates -------------------------------------------------------------

def certificate_record(state: ConstructionState, deltas: list = (), overlaps: list = ()) -> dict:
    return {
        "format": CERT_FORMAT,
        "state": state_to_record(state),
        "delta": [c.to_record() for c in deltas],
        "no_overlap": [c.to_record() for c in overlaps],
    }


def dump_certificate(path, state: ConstructionState, deltas: list = (), overlaps: list = ()) -> None:
    Path(path).write_text(json.dumps(certificate_record(state, deltas, overlaps), indent=1) + "\n", encoding="utf-8")


def delta_certificate_from_record(rec: dict) -> DeltaCertificate:
    try:
        return DeltaCertificate(
            n=int(rec["n"]),
            bound=decode_rational(rec["bound"]),
            epsilon_n=decode_rational(rec["epsilon_n"]),
            side=str(rec["side"]),
            m=int(rec["m"]),
            base=int(rec["base"]),
            p_m=decode_int(rec["p_m"]),
            q_m=decode_int(rec["q_m"]),
            q_next=decode_int(rec["q_next"]),
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise StateParseError(f"bad delta certificate record: {exc}") from None


def replay_certificate(rec: dict) -> dict:
    """Re-verify every inequality in a certificate file; return a summary."""
    if _field(rec, "format", str) != CERT_FORMAT:
        raise StateParseError(f"unsupported certificate format {rec.get('format')!r}")
    state = state_from_record(_field(rec, "state", dict))
    s_tab, t_tab = convergents(state.s_digits), convergents(state.t_digits)
    base = 8 if state.variant else 2
    checked = 0
    for raw in rec.get("delta", []):
        c = delta_certificate_from_record(raw)
        tab = {"s": s_tab, "t": t_tab}.get(c.side)
        if tab is None or not 0 <= c.m < tab.depth:
            raise StateIntegrityError(f"n={c.n}: bad side/m")
        Q = base**c.n - 1
        problems = []
        if c.base != base:
            problems.append("base")
        if (c.p_m, c.q_m, c.q_next) != (tab.P(c.m), tab.Q(c.m), tab.Q(c.m + 1)):
            problems.append("convergents")
        if not (c.q_m <= Q and c.p_m <= Q):
            problems.append("p_m, q_m <= base^n - 1")
        if base == 8 and not (base8_zero_one_check(c.p_m) and base8_zero_one_check(c.q_m)):
            problems.append("base-8 zero-one digits")
        if c.bound != Fraction(1, base**c.n * c.q_next):
            problems.append("bound = 1/(base^n q_next)")
        if c.epsilon_n != state.eps.effective(c.n):
            problems.append("epsilon_n")
        if not c.bound <= c.epsilon_n:
            problems.append("bound <= epsilon_n")
        if problems:
            raise StateIntegrityError(f"delta certificate n={c.n} fails: {', '.join(problems)}")
        checked += 1
    overlaps = 0
    for raw in rec.get("no_overlap", []):
        try:
            B, m = decode_int(raw["B"]), int(raw["witness_m"])
        except (KeyError, TypeError, ValueError) as exc:
            raise StateParseError(f"bad no-overlap record: {exc}") from None
        if not 2 <= m <= state.rounds:
            raise StateIntegrityError(f"witness_m={m} outside constructed rounds")
        if B < 1 or _no_overlap_checks(state, B, m) is None:
            raise StateIntegrityError(f"no-overlap certificate B={B} m={m} does not replay")
        overlaps += 1
    return {"delta_checked": checked, "no_overlap_checked": overlaps, "rounds": state.rounds}


def load_and_replay_certificate(path) -> dict:
    return replay_certificate(_load_json(path))


# -- CSV ----------------------------------------------------------------------

CSV_COLUMNS = ["n", "eps_num", "eps_den", "bound_num", "bound_den", "log2_eps", "log2_bound", "side", "round"]


def _log2_float(x: Fraction) -> str:
    # advisory only; verdicts rest on the exact columns
    return f"{math.log2(x.numerator) - math.log2(x.denominator):.15g}"


def delta_csv(certs: list) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_COLUMNS)
    for c in sorted(certs, key=lambda c: c.n):
        w.writerow([
            c.n,
            c.epsilon_n.numerator, c.epsilon_n.denominator,
            c.bound.numerator, c.bound.denominator,
            _log2_float(c.epsilon_n), _log2_float(c.bound),
            c.side, c.round,
        ])
    return buf.getvalue()


MARKER_COLUMNS = ["m", "s_digit_log2", "t_digit_log2", "L_lo", "L_hi", "M_lo", "M_hi"]


def markers_csv(state: ConstructionState) -> str:
    """Per-round digit sizes and scale markers, for plotting growth."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(MARKER_COLUMNS)
    for m in range(2, state.rounds + 1):
        sd, td = state.s_digits[m], state.t_digits[m]
        w.writerow([
            m,
            sd.log2 if hasattr(sd, "log2") else f"{math.log2(sd):.15g}",
            td.log2 if hasattr(td, "log2") else f"{math.log2(td):.15g}",
            *state.L_range(m), *state.M_range(m),
        ])
    return buf.getvalue()
