"""Command-line front end: ``qmcert check|certify|verify|fixtures``.

Machine-readable JSON goes to ``--out`` (or stdout); the human summary goes
to stderr.  Exit codes: 0 ok, 2 identity failure, 3 leaf failure,
4 assumption falsified, 5 search exhausted, 64 parse/usage error, 66 I/O error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import replace
from fractions import Fraction

from .certgen import SearchLimits, search_certificate
from .errors import QmCertError, SearchExhausted
from .frame import build_simplex, check_assumptions
from .qmodule import assemble
from .serialize import (
    InstanceFormatError,
    certificate_from_json,
    certificate_to_json,
    dumps,
    instance_from_json,
    report_to_json,
    verdict_to_json,
)
from .verify import Verdict, verify_certificate, verify_fixture_identities

EXIT_OK = 0
EXIT_IDENTITY = 2
EXIT_LEAF = 3
EXIT_ASSUMPTION = 4
EXIT_EXHAUSTED = 5
EXIT_PARSE = 64
EXIT_IO = 66

TIERS = {"sturm": "A", "sos": "B"}

log = logging.getLogger("qmcert")


class CliError(Exception):
    def __init__(self, code: int, message: str):
        self.code = code
        super().__init__(message)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise CliError(EXIT_PARSE, f"{self.prog}: {message}")


def _read_json(path: str, what: str):
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot read {what} {path}: {exc.strerror or exc}") from None
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CliError(EXIT_PARSE, f"{path}: invalid JSON: {exc.msg}, line {exc.lineno}, column {exc.colno}") from None


def _write(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    try:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as exc:
        raise CliError(EXIT_IO, f"cannot write {path}: {exc.strerror or exc}") from None


def _say(msg: str) -> None:
    print(msg, file=sys.stderr)


def _load_instance(path: str):
    data = _read_json(path, "instance")
    try:
        return instance_from_json(data)
    except InstanceFormatError as exc:
        raise CliError(EXIT_PARSE, f"{path}: {exc}") from None


def _options(args, options: dict) -> dict:
    out = dict(options)
    for key in ("tier", "seed", "samples"):
        value = getattr(args, key, None)
        if value is not None:
            out[key] = value
    return out


def _limits(args, limits: SearchLimits) -> SearchLimits:
    changes = {}
    for flag, field in (("max_k", "max_k"), ("max_lambda_doublings", "max_lambda_doublings"),
                        ("max_kappa", "max_kappa"), ("max_terms", "max_terms")):
        value = getattr(args, flag, None)
        if value is not None:
            changes[field] = value
    return replace(limits, **changes)


def _summarize_report(report) -> None:
    for key, st in report.entries.items():
        wit = "" if st.witness is None else " witness=(" + ", ".join(str(Fraction(v)) for v in _flat(st.witness)) + ")"
        _say(f"  {key:32s} {st.status:15s}{wit}  {st.detail}")


def _flat(w):
    if isinstance(w, (tuple, list)):
        for x in w:
            yield from _flat(x)
    else:
        yield w


def cmd_check(args) -> int:
    inst, _, options = _load_instance(args.instance)
    options = _options(args, options)
    frame = build_simplex(inst.n, inst.N)
    report = check_assumptions(inst, frame, samples=options["samples"], seed=options["seed"])
    _write(dumps(report_to_json(report)), args.out)
    _say(f"assumption check for {args.instance}:")
    _summarize_report(report)
    if report.falsified():
        _say("FALSIFIED: " + ", ".join(report.falsified()))
        return EXIT_ASSUMPTION
    if report.inconclusive():
        _say("warning: inconclusive: " + ", ".join(report.inconclusive()))
    return EXIT_OK


def cmd_certify(args) -> int:
    inst, limits, options = _load_instance(args.instance)
    options = _options(args, options)
    limits = _limits(args, limits)
    frame = build_simplex(inst.n, inst.N)
    report = check_assumptions(inst, frame, samples=options["samples"], seed=options["seed"])
    if report.falsified():
        _say("warning: assumptions falsified (" + ", ".join(report.falsified())
             + "); the search will continue but cannot be expected to succeed")
        _summarize_report(report)

    trace_fh = None
    if args.trace:
        try:
            trace_fh = open(args.trace, "w", encoding="utf-8")
        except OSError as exc:
            raise CliError(EXIT_IO, f"cannot write {args.trace}: {exc.strerror or exc}") from None

    def on_attempt(entry):
        if trace_fh is not None:
            trace_fh.write(json.dumps(entry) + "\n")
        log.info("attempt %s", entry)

    try:
        result = search_certificate(inst, limits, frame=frame, on_attempt=on_attempt)
    except SearchExhausted as exc:
        for entry in exc.trace:
            sys.stdout.write(json.dumps(entry) + "\n")
        _say(f"search exhausted after {len(exc.trace)} attempts "
             f"(max_k={limits.max_k}, max_lambda_doublings={limits.max_lambda_doublings}, max_kappa={limits.max_kappa})")
        return EXIT_EXHAUSTED
    except QmCertError as exc:
        _say(f"instance violates an assumption: {exc}")
        return EXIT_ASSUMPTION
    finally:
        if trace_fh is not None:
            trace_fh.close()

    cert = assemble(inst, result.params, result.expansion, TIERS[options["tier"]])
    verdict = verify_certificate(inst, cert)
    if not verdict.ok:
        _say("internal error: assembled certificate failed self-verification")
        for path, reason in verdict.leaf_failures[:10]:
            _say(f"  {path}: {reason}")
        return verdict.exit_code()
    _write(dumps(certificate_to_json(cert, inst.n)), args.out)
    p = result.params
    _say(f"certified: M={cert.M} lambda={p.lam} k={p.k} kappa={cert.kappa} tier={cert.tier}")
    _say(f"  {verdict.statement}")
    return EXIT_OK


def cmd_verify(args) -> int:
    inst, _, _ = _load_instance(args.instance)
    data = _read_json(args.certificate, "certificate")
    try:
        cert = certificate_from_json(data)
        cert_n = data["n"]
    except InstanceFormatError as exc:
        raise CliError(EXIT_PARSE, f"{args.certificate}: {exc}") from None
    reason = None
    if cert_n != inst.n:
        reason = f"certificate is over n={cert_n}, instance has n={inst.n}"
    else:
        try:
            verdict = verify_certificate(inst, cert)
        except (QmCertError, ValueError, ArithmeticError) as exc:
            reason = f"certificate cannot be evaluated: {exc}"
    if reason is not None:
        # nothing to compare against: the whole of q^M f is unaccounted for
        lhs = inst.q.to_multipoly(inst.n) ** cert.M * inst.f
        verdict = Verdict(False, False, "A", mismatch=lhs, leaf_failures=[("root", reason)])
    _write(dumps(verdict_to_json(verdict)), args.out)
    if verdict.ok:
        _say(f"verified (tier {verdict.tier}): {verdict.statement}")
    else:
        if not verdict.identity_ok:
            _say(f"identity FAILED: q^M f minus the tree has {len(verdict.mismatch.terms)} nonzero terms")
        for path, reason in verdict.leaf_failures[:20]:
            _say(f"  leaf failure at {path}: {reason}")
    return verdict.exit_code()


def cmd_fixtures(args, fixtures=None) -> int:
    verdict = verify_fixture_identities(fixtures)
    if args.out:
        _write(dumps(verdict_to_json(verdict)), args.out)
    for name, ok in verdict.checks:
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    return EXIT_OK if verdict.ok else EXIT_IDENTITY


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="qmcert", description="Exact positivity certificates in quadratic modules.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log every search attempt")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--out", help="write the JSON artifact here instead of stdout")

    def sampling(p):
        p.add_argument("--seed", type=int, help="seed for assumption sampling (default 0)")
        p.add_argument("--samples", type=int, help="number of random sample points (default 200)")

    p = sub.add_parser("check", help="check the standing assumptions of an instance")
    p.add_argument("instance")
    common(p)
    sampling(p)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("certify", help="search for and write a certificate")
    p.add_argument("instance")
    common(p)
    sampling(p)
    p.add_argument("--max-k", type=int)
    p.add_argument("--max-lambda-doublings", type=int)
    p.add_argument("--max-kappa", type=int)
    p.add_argument("--max-terms", type=int)
    p.add_argument("--tier", choices=sorted(TIERS))
    p.add_argument("--trace", help="write one JSON line per search attempt to this file")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("verify", help="independently verify a certificate")
    p.add_argument("instance")
    p.add_argument("certificate")
    common(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("fixtures", help="verify the built-in identities")
    common(p)
    p.set_defaults(func=cmd_fixtures)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                            format="%(levelname)s %(message)s")
        return args.func(args)
    except CliError as exc:
        _say(str(exc))
        return exc.code


if __name__ == "__main__":
    sys.exit(main())
