"""Command-line front end: ``overlapforge <command> ...``.

Exit codes: 0 success, 1 domain error, 2 parse error, 3 invariant or
integrity failure, 4 needs more rounds, 5 resource cap.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import persist
from .construction import EpsilonSpec, certify_delta, no_overlap_certificate, run
from .contfrac import cylinder_interval
from .errors import (
    InvariantViolation,
    NeedsMoreDigits,
    NeedsMoreRounds,
    OverlapForgeError,
    ResourceCapError,
    StateIntegrityError,
    StateParseError,
)
from .exact import RationalInterval, decode_rational
from .ifs import delta_brute, overlap_exclusion_search, similarity_dimension

EXIT_OK = 0
EXIT_DOMAIN = 1
EXIT_PARSE = 2
EXIT_INVARIANT = 3
EXIT_MORE_ROUNDS = 4
EXIT_RESOURCE = 5

FAMILIES = ("half6", "eighth6", "half8")


def parse_range(text: str) -> tuple:
    """Inclusive ``a..b`` (or a single ``n``)."""
    a, sep, b = text.partition("..")
    try:
        lo = int(a)
        hi = int(b) if sep else lo
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; expected a..b") from None
    if lo < 1 or hi < lo:
        raise argparse.ArgumentTypeError(f"bad range {text!r}; need 1 <= a <= b")
    return lo, hi


def _eps(text: str) -> EpsilonSpec:
    try:
        return EpsilonSpec.parse(text)
    except (OverlapForgeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text!r}")
    return v


def _bound(text: str) -> int:
    # accepts 1024 or 2^10
    if "^" in text:
        b, _, e = text.partition("^")
        return _positive(b) ** int(e)
    return _positive(text)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="overlapforge", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("construct", help="run the digit-selection construction")
    c.add_argument("--eps", type=_eps, default=EpsilonSpec("pow8"), help="pow8 | superexp:A | table:v1,v2,...[;tail]")
    c.add_argument("--rounds", type=_positive, default=4)
    c.add_argument("--N", type=_positive, default=2)
    c.add_argument("--family", choices=FAMILIES, default="half6")
    c.add_argument("--mode", choices=("exact", "shadow"), default="exact")
    c.add_argument("--convergents", action="store_true", help="store p_m, q_m in the state file")
    c.add_argument("--out", type=Path)

    cert = sub.add_parser("certify", help="certify Delta_n <= eps_n, or replay a certificate")
    src = cert.add_mutually_exclusive_group(required=True)
    src.add_argument("--state", type=Path)
    src.add_argument("--replay", type=Path, metavar="CERT")
    cert.add_argument("--n", type=parse_range, help="inclusive range a..b (default: whole certified range)")
    cert.add_argument("--relation-bound", type=_bound, metavar="B", help="also embed a no-overlap certificate")
    cert.add_argument("--csv", type=Path)
    cert.add_argument("--out", type=Path)

    d = sub.add_parser("delta", help="brute-force enclosure of Delta_n")
    d.add_argument("--depth", type=_positive, required=True)
    d.add_argument("--state", type=Path, help="use the state's cylinder enclosures")
    d.add_argument("--family", choices=FAMILIES)
    d.add_argument("--s", type=decode_rational, help="rational s (point enclosure)")
    d.add_argument("--t", type=decode_rational, help="rational t (point enclosure)")
    d.add_argument("--workers", type=_positive, default=1)

    o = sub.add_parser("overlap", help="exact-overlap exclusion or relation certificate")
    o.add_argument("--state", type=Path, required=True)
    og = o.add_mutually_exclusive_group(required=True)
    og.add_argument("--depth", type=_positive, help="exclusion search over all depth-n difference triples")
    og.add_argument("--relation-bound", type=_bound, metavar="B", help="certificate for |a|,|b|,|d| <= B")
    o.add_argument("--workers", type=_positive, default=1)

    dim = sub.add_parser("dimension", help="similarity dimension of a family")
    dim.add_argument("--family", choices=FAMILIES, required=True)

    e = sub.add_parser("export", help="per-round marker table as CSV")
    e.add_argument("--state", type=Path, required=True)
    e.add_argument("--csv", type=Path)
    return p


def _emit(obj, out: Path | None = None):
    text = json.dumps(obj, indent=1) + "\n"
    if out is None:
        sys.stdout.write(text)
    else:
        out.write_text(text, encoding="utf-8")


def _enclosures(state):
    return cylinder_interval(state.s_digits, state.s_table), cylinder_interval(state.t_digits, state.t_table)


def cmd_construct(args) -> int:
    state = run(args.eps, args.rounds, args.mode, args.family, args.N)
    rec = persist.state_to_record(state, args.convergents)
    _emit(rec, args.out)
    if args.out is not None:
        L = rec["L"]
        print(f"wrote {args.out}: rounds={state.rounds} L={L} M={rec['M']}", file=sys.stderr)
    return EXIT_OK


def cmd_certify(args) -> int:
    if args.replay is not None:
        summary = persist.load_and_replay_certificate(args.replay)
        _emit({"replay": "ok", **summary}, args.out)
        return EXIT_OK
    state = persist.load_state(args.state)
    lo, hi = args.n if args.n else (1, state.certified_through)
    certs = [certify_delta(state, n) for n in range(lo, hi + 1)]
    overlaps = [no_overlap_certificate(state, args.relation_bound)] if args.relation_bound else []
    if args.csv is not None:
        args.csv.write_text(persist.delta_csv(certs), encoding="utf-8")
    if args.out is not None:
        persist.dump_certificate(args.out, state, certs, overlaps)
    print(f"certified Delta_n <= eps_n for n in {lo}..{hi} ({len(certs)} bounds)", file=sys.stderr)
    return EXIT_OK


def cmd_delta(args) -> int:
    if args.state is not None:
        if args.s is not None or args.t is not None or args.family is not None:
            raise argparse.ArgumentTypeError("--state excludes --s/--t/--family")
        state = persist.load_state(args.state)
        if not state.exact:
            raise argparse.ArgumentTypeError("delta needs an exact-mode state")
        family = state.family
        s_enc, t_enc = _enclosures(state)
    else:
        if args.s is None or args.t is None:
            raise argparse.ArgumentTypeError("give --state or both --s and --t")
        family = args.family or "half6"
        s_enc, t_enc = RationalInterval.point(args.s), RationalInterval.point(args.t)
    report = delta_brute(family, args.depth, s_enc, t_enc, workers=args.workers)
    _emit(report.to_record())
    return EXIT_OK


def cmd_overlap(args) -> int:
    state = persist.load_state(args.state)
    if args.depth is not None:
        if not state.exact:
            raise argparse.ArgumentTypeError("exclusion search needs an exact-mode state")
        s_enc, t_enc = _enclosures(state)
        res = overlap_exclusion_search(state.family, args.depth, s_enc, t_enc, workers=args.workers)
        _emit(res.to_record())
        return EXIT_OK if res.certified else EXIT_INVARIANT
    cert = no_overlap_certificate(state, args.relation_bound)
    _emit(cert.to_record())
    return EXIT_OK


def cmd_dimension(args) -> int:
    res = similarity_dimension(args.family)
    verdict = {"<": "below 1", ">": "above 1", "=": "equal to 1"}[res.comparison]
    print(f"dim_S {args.family} = {res.value!r} ({verdict})")
    return EXIT_OK


def cmd_export(args) -> int:
    state = persist.load_state(args.state)
    text = persist.markers_csv(state)
    if args.csv is None:
        sys.stdout.write(text)
    else:
        args.csv.write_text(text, encoding="utf-8")
    return EXIT_OK


COMMANDS = {
    "construct": cmd_construct,
    "certify": cmd_certify,
    "delta": cmd_delta,
    "overlap": cmd_overlap,
    "dimension": cmd_dimension,
    "export": cmd_export,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except argparse.ArgumentTypeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except StateParseError as exc:
        print(f"parse error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (StateIntegrityError, InvariantViolation) as exc:
        print(f"integrity error: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except (NeedsMoreRounds, NeedsMoreDigits) as exc:
        print(f"needs more rounds: {exc}", file=sys.stderr)
        return EXIT_MORE_ROUNDS
    except ResourceCapError as exc:
        print(f"resource cap: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except OverlapForgeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
