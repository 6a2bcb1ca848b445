"""Command-line interface with stable machine-readable output.

Values print as exact rationals "p/q" by default; ``--decimal K`` appends a
K-digit decimal rendering for human convenience (never used inside
certificates).  Exit codes: 0 success, 1 computation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import registry as registry_mod
from . import reproduce as reproduce_mod
from .branch import BranchLocalType, infer_triple, pair_log_discrepancy, parse
from .flags import (
    s_blowup,
    s_blowup_point_bound,
    s_line,
    s_line_point_bound,
)
from .registry import FamilyRecord, Registry, batch_verdict, load_default
from .scroll import M, ScrollTriple, s_closed_form, s_toric_valuation
from .verdict import (
    AssertedHypotheses,
    Hypothesis,
    Verdict,
    certify_polystable,
    certify_stable,
    full_verdict,
)


def _parse_triple(text: str) -> ScrollTriple:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("triple must be d1,d2,d3")
    try:
        return ScrollTriple(*(int(p) for p in parts))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _parse_vector(text: str) -> tuple[int, int, int]:
    parts = text.split(",")
    if len(parts) != 3:
        raise argparse.ArgumentTypeError("valuation must be a,b,c")
    return tuple(int(p) for p in parts)


def _parse_weights(text: str) -> tuple[int, int]:
    parts = text.split(",")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError("weights must be a1,a2")
    return tuple(int(p) for p in parts)


class _Output:
    def __init__(self, as_json: bool, decimal: int | None):
        self.as_json = as_json
        self.decimal = decimal

    def rational(self, value: Fraction) -> str:
        text = str(value)
        if self.decimal is not None:
            scaled = value * 10 ** self.decimal
            approx = round(scaled) / Fraction(10 ** self.decimal)
            text += f" ~ {float(approx):.{self.decimal}f}"
        return text

    def emit_value(self, value: Fraction, payload: dict) -> None:
        if self.as_json:
            payload = dict(payload)
            payload["value"] = str(value)
            if self.decimal is not None:
                payload["decimal"] = f"{float(value):.{self.decimal}f}"
            print(json.dumps(payload, sort_keys=True))
        else:
            print(self.rational(value))

    def emit_verdict(self, verdict: Verdict, payload: dict) -> None:
        if self.as_json:
            doc = dict(payload)
            doc.update(verdict.to_dict())
            print(json.dumps(doc, sort_keys=True))
            return
        print(f"status: {verdict.status.value}")
        if verdict.reason:
            print(f"reason: {verdict.reason}")
        if verdict.certificate:
            print("certificate:")
            for item in verdict.certificate:
                print(
                    f"  {item.name} = {self.rational(item.value)} "
                    f"{item.relation} {item.bound}   [{item.provenance}]"
                )
        if verdict.asserted.flags:
            print("asserted: " + ", ".join(verdict.asserted.to_list()))


def _load_registry(args) -> Registry:
    if args.registry:
        return registry_mod.load(args.registry)
    return load_default()


def _cmd_svalue(args, out: _Output) -> int:
    t = args.triple
    if (args.divisor is None) == (args.valuation is None):
        raise UsageError("svalue needs exactly one of --divisor or --valuation")
    if args.divisor is not None:
        value = s_closed_form(t, args.divisor)
        out.emit_value(value, {"triple": t.as_tuple(), "divisor": args.divisor})
    else:
        value = s_toric_valuation(t, M, args.valuation)
        out.emit_value(value, {"triple": t.as_tuple(), "valuation": list(args.valuation)})
    return 0


def _cmd_flag(args, out: _Output) -> int:
    t = args.triple
    if args.mode == "line":
        value = (
            s_line_point_bound(t, args.i1) if args.point_bound else s_line(t, args.i1)
        )
        payload = {"triple": t.as_tuple(), "flag": "line", "i1": args.i1,
                   "point_bound": args.point_bound}
    else:
        a1, a2 = args.weights
        value = (
            s_blowup_point_bound(t, a1, a2) if args.point_bound else s_blowup(t, a1, a2)
        )
        payload = {"triple": t.as_tuple(), "flag": "blowup", "weights": [a1, a2],
                   "point_bound": args.point_bound}
    out.emit_value(value, payload)
    return 0


def _cmd_avalue(args, out: _Output) -> int:
    t = args.triple
    poly = parse(args.branch)
    pld = pair_log_discrepancy(t, args.valuation, poly)
    payload = {
        "triple": t.as_tuple(),
        "valuation": list(args.valuation),
        "ambient_a": str(pld.ambient_a),
        "branch_ord": str(pld.branch_ord),
    }
    out.emit_value(pld.value, payload)
    return 0


def _cmd_verdict(args, out: _Output) -> int:
    if (args.family is None) == (args.triple is None):
        raise UsageError("verdict needs exactly one of --family or --triple")
    if args.family is not None:
        reg = _load_registry(args)
        record = reg.get(args.family)
        verdict = full_verdict(record)
        out.emit_verdict(verdict, {"family": args.family})
        return 0
    t = args.triple
    asserted = AssertedHypotheses.of(*(Hypothesis(a) for a in args.asserts))
    branch = parse(args.branch) if args.branch else None
    if args.futaki is not None:
        if branch is None:
            raise UsageError("--futaki requires --branch")
        verdict = certify_polystable(t, branch, args.futaki, asserted)
    elif branch is not None and (args.p3 or args.line_component):
        verdict = certify_stable(
            t,
            branch,
            p3_type=BranchLocalType(args.p3) if args.p3 else None,
            line_component=args.line_component,
            asserted=asserted,
        )
    else:
        record = FamilyRecord(
            id="<adhoc>",
            triple=t,
            branch_text=args.branch,
            provenance={"triple": registry_mod.Provenance("user"),
                        **({"branch": registry_mod.Provenance("user")} if args.branch else {})},
        )
        verdict = full_verdict(record)
    out.emit_verdict(verdict, {"triple": t.as_tuple()})
    return 0


def _cmd_family(args, out: _Output) -> int:
    if args.action == "list":
        reg = _load_registry(args)
        rows = batch_verdict(reg)
        if out.as_json:
            doc = [
                {"id": r.id,
                 **({"error": r.error} if r.error else r.verdict.to_dict())}
                for r in rows
            ]
            print(json.dumps(doc, sort_keys=True))
        else:
            for r in rows:
                text = r.error if r.error else f"{r.verdict.status.value}" + (
                    f" ({r.verdict.reason})" if r.verdict.reason else ""
                )
                print(f"{r.id:6s} {text}")
        return 0
    if args.action == "show":
        if not args.id:
            raise UsageError("family show needs an id")
        reg = _load_registry(args)
        record = reg.get(args.id)
        print(json.dumps(record.to_dict(), indent=2, sort_keys=True))
        return 0
    if args.action == "add":
        if not args.record_json:
            raise UsageError("family add needs a record JSON argument")
        if not args.registry:
            raise UsageError("family add needs --registry (the shipped registry is read-only)")
        reg = registry_mod.load(args.registry)
        record = FamilyRecord.from_dict(json.loads(args.record_json))
        reg.add(record)
        registry_mod.save(reg, args.registry)
        print(f"added {record.id} (registry version {reg.version})")
        return 0
    if args.action == "infer-triple":
        if not args.branch:
            raise UsageError("family infer-triple needs --branch")
        poly = parse(args.branch)
        triples = infer_triple(poly.observations(), degree=args.degree)
        listing = sorted(t.as_tuple() for t in triples)
        if out.as_json:
            print(json.dumps({"triples": [list(t) for t in listing]}))
        else:
            for t in listing:
                print(f"{t[0]},{t[1]},{t[2]}")
        return 0
    raise UsageError(f"unknown family action {args.action!r}")


def _cmd_reproduce(args, out: _Output) -> int:
    reg = _load_registry(args)
    result = reproduce_mod.run(args.name, dmax=args.dmax, reg=reg)
    if out.as_json:
        print(json.dumps({
            "name": result.name,
            "ok": result.ok,
            "lines": [
                {"label": l.label, "got": l.got, "expected": l.expected, "ok": l.ok}
                for l in result.lines
            ],
        }, sort_keys=True))
    else:
        for l in result.lines:
            mark = "ok " if l.ok else "FAIL"
            print(f"[{mark}] {l.label}: {l.got} (expected {l.expected})")
        print(f"{result.name}: {'all checks passed' if result.ok else 'MISMATCH'}")
    return 0 if result.ok else 1


class UsageError(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--registry", help="path to a registry JSON file")
    common.add_argument("--json", action="store_true", help="machine-readable output")
    common.add_argument("--decimal", type=int, metavar="K",
                        help="append a K-digit decimal rendering")

    parser = argparse.ArgumentParser(
        prog="scrollk",
        description="Exact K-stability invariants of double covers of rational scrolls.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("svalue", parents=[common],
                       help="expected vanishing order of a toric divisor or valuation")
    p.add_argument("--triple", type=_parse_triple, required=True)
    p.add_argument("--divisor", choices=["D1", "D2", "D3", "F1", "F2"])
    p.add_argument("--valuation", type=_parse_vector, metavar="a,b,c",
                   help="integer vector; write --valuation=-1,-1,0 when it starts with a minus")
    p.set_defaults(func=_cmd_svalue)

    p = sub.add_parser("flag", parents=[common], help="fiber flag S-values and bounds")
    p.add_argument("--triple", type=_parse_triple, required=True)
    flag_sub = p.add_subparsers(dest="mode", required=True)
    pl = flag_sub.add_parser("line", parents=[common])
    pl.add_argument("--i1", type=int, required=True, choices=[1, 2, 3])
    pl.add_argument("--point-bound", action="store_true")
    pl.set_defaults(func=_cmd_flag, mode="line")
    pb = flag_sub.add_parser("blowup", parents=[common])
    pb.add_argument("--weights", type=_parse_weights, required=True, metavar="a1,a2")
    pb.add_argument("--point-bound", action="store_true")
    pb.set_defaults(func=_cmd_flag, mode="blowup")

    p = sub.add_parser("avalue", parents=[common],
                       help="pair log discrepancy along a toric valuation")
    p.add_argument("--triple", type=_parse_triple, required=True)
    p.add_argument("--branch", required=True)
    p.add_argument("--valuation", type=_parse_vector, required=True, metavar="a,b,c")
    p.set_defaults(func=_cmd_avalue)

    p = sub.add_parser("verdict", parents=[common],
                       help="run the decision procedure on a family or ad-hoc data")
    p.add_argument("--family", metavar="ID")
    p.add_argument("--triple", type=_parse_triple)
    p.add_argument("--branch")
    p.add_argument("--p3", choices=[t.value for t in BranchLocalType])
    p.add_argument("--line-component", type=int, choices=[1, 2, 3])
    p.add_argument("--futaki", type=_parse_vector, metavar="a,b,c")
    p.add_argument("--assert", dest="asserts", action="append", default=[],
                   choices=[h.value for h in Hypothesis],
                   help="record an unverifiable hypothesis (repeatable)")
    p.set_defaults(func=_cmd_verdict)

    p = sub.add_parser("family", parents=[common], help="registry operations")
    p.add_argument("action", choices=["list", "show", "add", "infer-triple"])
    p.add_argument("id", nargs="?", help="family id (for show)")
    p.add_argument("--record-json", help="record document (for add)")
    p.add_argument("--branch", help="branch polynomial (for infer-triple)")
    p.add_argument("--degree", type=int,
                   help="anticanonical degree constraint (for infer-triple)")
    p.set_defaults(func=_cmd_family)

    p = sub.add_parser("reproduce", parents=[common],
                       help="recompute a worked example and verify it")
    p.add_argument("name", choices=sorted(reproduce_mod.ALL))
    p.add_argument("--dmax", type=int, default=None)
    p.set_defaults(func=_cmd_reproduce)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    out = _Output(args.json, args.decimal)
    try:
        return args.func(args, out)
    except UsageError as exc:
        parser.error(str(exc))  # exits 2
    except BrokenPipeError:
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
