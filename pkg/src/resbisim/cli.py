"""Command-line front end.

Exit codes: 0 positive (YES, witness found, certificate valid), 1 negative,
2 input error, 3 budget exhausted.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import fixtures
from .basis import RESOURCE_BISIM, BasisQuery, Stratum, enumerate_basis
from .multiset import ResourceSyntaxError, format_resource, parse_resource
from .net import NetError, load_net
from .strata import DEFAULT_CAP, eqlev, refute_similarity
from .tableau import (
    LITERAL,
    SYMMETRIC,
    CertificateFormatError,
    Decider,
    Outcome,
    certificate_from_json,
    verify_certificate,
)

EXIT_POSITIVE, EXIT_NEGATIVE, EXIT_INPUT, EXIT_BUDGET = 0, 1, 2, 3


class InputError(Exception):
    pass


def _resolve_net_path(name: str) -> Path:
    p = Path(name)
    if p.exists():
        return p
    bundled = fixtures.FIXTURE_DIR / p.name
    if not p.parent.parts and bundled.exists():
        return bundled
    raise InputError(f"net file not found: {name}")


def _load(name):
    path = _resolve_net_path(name)
    try:
        return load_net(path)
    except NetError as exc:
        raise InputError(f"{path}: {exc}") from None
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"{path}: {exc}") from None


def _resource(net, text):
    try:
        return parse_resource(net.places, text)
    except ResourceSyntaxError as exc:
        raise InputError(f"bad resource {text!r}: {exc}") from None


def _emit(args, human: str, record: dict):
    if args.format == "machine":
        print(json.dumps(record, ensure_ascii=False, sort_keys=True))
    else:
        print(human)


def cmd_check(args) -> int:
    net = _load(args.net)
    r, s = _resource(net, args.r), _resource(net, args.s)
    mode = LITERAL if args.literal else SYMMETRIC
    verdict = Decider(net, mode).decide(r, s, budget=args.budget)
    st = verdict.stats
    stats = {"nodes": st.nodes, "expands": st.expands, "reduces": st.reduces,
             "backtracks": st.backtracks, "rounds": st.rounds}
    record = {"command": "check", "r": format_resource(r), "s": format_resource(s),
              "outcome": verdict.outcome.value, "stats": stats}
    stat_line = ", ".join(f"{k}={v}" for k, v in stats.items())
    if verdict.outcome is Outcome.BUDGET_EXCEEDED:
        _emit(args, f"BUDGET-EXCEEDED after {st.nodes} nodes ({stat_line})", record)
        return EXIT_BUDGET
    if verdict.outcome is Outcome.NO:
        level = eqlev(net, r, s, args.cap)
        record["witness"] = str(verdict.witness)
        record["eqlev"] = str(level)
        human = (f"NO (all selection branches exhausted)\n  {verdict.witness}\n"
                 f"  eqlev (oracle, cap {args.cap}): {level}\n  {stat_line}")
        _emit(args, human, record)
        return EXIT_NEGATIVE
    cert = verdict.certificate
    lines = [f"YES ({stat_line})", f"  certificate: {cert.root.size()} nodes"]
    if args.cert:
        Path(args.cert).write_text(cert.to_json(), encoding="utf-8")
        lines.append(f"  written to {args.cert}")
        record["certificate"] = args.cert
    code = EXIT_POSITIVE
    if args.verify:
        # re-read what was written, so the check covers serialization as well
        check = verify_certificate(net, certificate_from_json(net, cert.to_json()), (r, s))
        record["verified"] = check.ok
        lines.append(f"  verify: {'ok' if check else check}")
        if not check:
            code = EXIT_NEGATIVE
    _emit(args, "\n".join(lines), record)
    return code


def cmd_eqlev(args) -> int:
    net = _load(args.net)
    r, s = _resource(net, args.r), _resource(net, args.s)
    level = eqlev(net, r, s, args.cap)
    _emit(args, str(level), {"command": "eqlev", "r": format_resource(r), "s": format_resource(s),
                             "eqlev": str(level), "cap": args.cap})
    return EXIT_POSITIVE


def cmd_refute_sim(args) -> int:
    net = _load(args.net)
    r, s = _resource(net, args.r), _resource(net, args.s)
    w = refute_similarity(net, r, s, args.context, args.level)
    record = {"command": "refute-sim", "r": format_resource(r), "s": format_resource(s),
              "context_bound": args.context, "level_bound": args.level}
    if w is None:
        record["witness"] = None
        _emit(args, "no refutation found within bounds", record)
        return EXIT_NEGATIVE
    record["witness"] = {"w": format_resource(w.context), "level": w.level, "side": w.side,
                         "transition": w.firing.transition.name}
    _emit(args, f"witness: {w}", record)
    return EXIT_POSITIVE


def cmd_verify(args) -> int:
    net = _load(args.net)
    try:
        text = Path(args.cert).read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise InputError(f"{args.cert}: {exc}") from None
    try:
        cert = certificate_from_json(net, text)
    except CertificateFormatError as exc:
        raise InputError(f"{args.cert}: {exc}") from None
    check = verify_certificate(net, cert)
    record = {"command": "verify", "valid": check.ok}
    if not check:
        record["node_path"] = check.node_path
        record["reason"] = check.message
    _emit(args, "valid" if check else f"invalid at {check}", record)
    return EXIT_POSITIVE if check else EXIT_NEGATIVE


def cmd_basis(args) -> int:
    net = _load(args.net)
    relation = RESOURCE_BISIM if args.bisim else Stratum(args.k)
    q = BasisQuery(relation, args.max_card, include_symmetric=args.symmetric)
    pairs = enumerate_basis(net, q, jobs=args.jobs)
    if args.format == "machine":
        for r, s in pairs:
            print(json.dumps({"command": "basis", "r": format_resource(r), "s": format_resource(s)},
                             ensure_ascii=False, sort_keys=True))
    else:
        print(f"# basis candidates up to bound |r|,|s| <= {args.max_card} for {relation}: {len(pairs)} pair(s)")
        for r, s in pairs:
            print(f"({r}, {s})")
    return EXIT_POSITIVE


def cmd_parse(args) -> int:
    net = _load(args.net)
    _emit(args, f"ok: {len(net.places)} places, {len(net.transitions)} transitions",
          {"command": "parse", "ok": True, "places": list(net.places),
           "transitions": [t.name for t in net.transitions], "fingerprint": net.fingerprint()})
    return EXIT_POSITIVE


def _nonneg(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("must be non-negative")
    return v


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be positive")
    return v


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="resbisim",
        description="Decide resource bisimilarity of markings in labeled Petri nets.",
        epilog="Resources use the syntax 'A:2,B:1' (quote them in the shell); '-' or '' is empty. "
               "A net name that is not an existing file is looked up among the bundled fixtures.")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("human", "machine"), default="human",
                        help="machine: one JSON record per result")
    sub = parser.add_subparsers(dest="command", required=True)

    def pair_command(name, func, help_text):
        p = sub.add_parser(name, help=help_text, parents=[common])
        p.add_argument("net")
        p.add_argument("r")
        p.add_argument("s")
        p.set_defaults(func=func)
        return p

    p = pair_command("check", cmd_check, "decide r ≃ s with the tableau search")
    p.add_argument("--budget", type=_positive, help="give up after this many tableau nodes")
    p.add_argument("--cert", metavar="PATH", help="write the certificate here on YES")
    p.add_argument("--verify", action="store_true", help="re-check the certificate before exiting")
    p.add_argument("--literal", action="store_true",
                   help="REDUCE only against ancestors in their stored orientation")
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP, help="eqlev cap reported on NO")

    p = pair_command("eqlev", cmd_eqlev, "equivalence level from the strata oracle")
    p.add_argument("--cap", type=_positive, default=DEFAULT_CAP)

    p = pair_command("refute-sim", cmd_refute_sim, "search contexts refuting resource similarity")
    p.add_argument("--context", type=_nonneg, default=2, help="largest context size")
    p.add_argument("--level", type=_nonneg, default=4, help="largest stratum checked")

    p = sub.add_parser("verify", help="check a certificate against a net", parents=[common])
    p.add_argument("net")
    p.add_argument("cert")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("basis", help="bounded basis of a congruence", parents=[common])
    p.add_argument("net")
    which = p.add_mutually_exclusive_group(required=True)
    which.add_argument("--k", type=_nonneg, help="stratum index")
    which.add_argument("--bisim", action="store_true", help="resource bisimilarity itself")
    p.add_argument("--max-card", type=_nonneg, required=True)
    p.add_argument("--symmetric", action="store_true", help="keep both orientations of each pair")
    p.add_argument("--jobs", type=_positive, default=1, help="parallel membership tests")
    p.set_defaults(func=cmd_basis)

    p = sub.add_parser("parse", help="syntax-check a net file", parents=[common])
    p.add_argument("net")
    p.set_defaults(func=cmd_parse)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
