"""JSON encoding of instances, certificates, verdicts and assumption reports.

Polynomials are written in the text grammar understood by
:func:`qmcert.polyring.parse`; rationals are strings such as ``"4/3"``.
"""

from __future__ import annotations

import json
from datetime import datetime, timezone
from fractions import Fraction
from typing import Any

from .certgen import HParameters, SearchLimits
from .errors import PolyParseError, QmCertError
from .frame import AssumptionReport, ProblemInstance
from .polyring import MultiPoly, format_poly, parse
from .qmodule import (
    BallW,
    Certificate,
    Constant,
    Generator,
    Power,
    PositiveUnivariate,
    Product,
    QmElement,
    Square,
    Sum,
)
from .uniposit import SturmCertificate, TwoSquares, UniPoly
from .verify import Verdict

CERTIFICATE_FORMAT = "qmcert-certificate"
SCHEMA_VERSION = 1
MISMATCH_TERM_CAP = 200


class InstanceFormatError(QmCertError):
    """Instance or certificate document that cannot be decoded.

    ``location`` names the offending field, ``line``/``column`` point into
    the JSON text or into the polynomial string.
    """

    def __init__(self, message: str, location: str = "", line: int | None = None, column: int | None = None):
        self.location = location
        self.line = line
        self.column = column
        parts = [message]
        if location:
            parts.append(f"in {location}")
        if line is not None:
            parts.append(f"line {line}")
        if column is not None:
            parts.append(f"column {column}")
        super().__init__(", ".join(parts))


def tool_version() -> str:
    from . import __version__

    return __version__


# ---------------------------------------------------------------------------
# scalars and polynomials
# ---------------------------------------------------------------------------

def _q(x) -> str:
    return str(Fraction(x))


def _rational(value, where: str) -> Fraction:
    if isinstance(value, bool) or not isinstance(value, (str, int)):
        raise InstanceFormatError("expected a rational string", where)
    try:
        return Fraction(value)
    except (ValueError, ZeroDivisionError) as exc:
        raise InstanceFormatError(f"bad rational {value!r}: {exc}", where) from None


def _poly(text, n: int, where: str) -> MultiPoly:
    if not isinstance(text, str):
        raise InstanceFormatError("expected a polynomial string", where)
    try:
        return parse(text, n)
    except PolyParseError as exc:
        raise InstanceFormatError(exc.message, where, 1, exc.column) from None
    except QmCertError as exc:
        raise InstanceFormatError(str(exc), where) from None


def uni_to_str(p: UniPoly) -> str:
    return p.to_str()


def _uni(text, where: str) -> UniPoly:
    p = _poly(text, 1, where)
    try:
        return UniPoly.from_multipoly(p)
    except ValueError as exc:
        raise InstanceFormatError(str(exc), where) from None


def _int(value, where: str) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InstanceFormatError("expected an integer", where)
    return value


def _get(d: dict, key: str, where: str):
    if not isinstance(d, dict):
        raise InstanceFormatError("expected an object", where)
    if key not in d:
        raise InstanceFormatError(f"missing field {key!r}", where)
    return d[key]


# ---------------------------------------------------------------------------
# instances
# ---------------------------------------------------------------------------

def _squares_to_json(squares) -> list:
    return [{"weight": _q(w), "poly": format_poly(p)} for w, p in squares]


def _squares_from_json(items, n: int, where: str) -> tuple:
    if not isinstance(items, list):
        raise InstanceFormatError("expected a list of weighted squares", where)
    out = []
    for i, item in enumerate(items):
        loc = f"{where}[{i}]"
        out.append((_rational(_get(item, "weight", loc), loc + ".weight"),
                    _poly(_get(item, "poly", loc), n, loc + ".poly")))
    return tuple(out)


def qm_element_to_json(elem: QmElement) -> dict:
    return {
        "sigma0": _squares_to_json(elem.sigma0),
        "generators": [{"index": idx, "squares": _squares_to_json(sq)} for idx, sq in elem.generators],
    }


def qm_element_from_json(d: dict, n: int, where: str = "witness") -> QmElement:
    sigma0 = _squares_from_json(d.get("sigma0", []), n, where + ".sigma0")
    gens = []
    for i, item in enumerate(d.get("generators", [])):
        loc = f"{where}.generators[{i}]"
        gens.append((_int(_get(item, "index", loc), loc + ".index"),
                     _squares_from_json(_get(item, "squares", loc), n, loc + ".squares")))
    return QmElement(sigma0, tuple(gens))


def instance_to_json(inst: ProblemInstance, limits: SearchLimits | None = None, options: dict | None = None) -> dict:
    out: dict[str, Any] = {
        "n": inst.n,
        "g": [format_poly(gi) for gi in inst.g],
        "f": format_poly(inst.f),
        "q": uni_to_str(inst.q),
        "N": _q(inst.N),
    }
    if inst.archimedean_witness is not None:
        out["witness"] = qm_element_to_json(inst.archimedean_witness)
    if limits is not None:
        out["limits"] = limits.to_json()
    if options:
        out["options"] = dict(options)
    return out


DEFAULT_OPTIONS = {"tier": "sturm", "seed": 0, "samples": 200}


def instance_from_json(d: dict) -> tuple[ProblemInstance, SearchLimits, dict]:
    """Decode an instance document; returns ``(instance, limits, options)``."""
    if not isinstance(d, dict):
        raise InstanceFormatError("instance must be a JSON object")
    n = _int(_get(d, "n", "instance"), "n")
    if n < 1:
        raise InstanceFormatError("n must be at least 1", "n")
    g_raw = _get(d, "g", "instance")
    if not isinstance(g_raw, list):
        raise InstanceFormatError("expected a list of polynomial strings", "g")
    g = [_poly(t, n, f"g[{i}]") for i, t in enumerate(g_raw)]
    f = _poly(_get(d, "f", "instance"), n, "f")
    q = _uni(_get(d, "q", "instance"), "q")
    N = _rational(_get(d, "N", "instance"), "N")
    witness = None
    if d.get("witness") is not None:
        witness = qm_element_from_json(d["witness"], n)
    limits = SearchLimits()
    if d.get("limits") is not None:
        try:
            limits = SearchLimits.from_json(d["limits"])
        except (TypeError, ValueError) as exc:
            raise InstanceFormatError(str(exc), "limits") from None
    options = dict(DEFAULT_OPTIONS)
    options.update(d.get("options") or {})
    if options["tier"] not in ("sturm", "sos"):
        raise InstanceFormatError("tier must be 'sturm' or 'sos'", "options.tier")
    try:
        inst = ProblemInstance(n, g, f, q, N, witness)
    except QmCertError as exc:
        raise InstanceFormatError(str(exc), "instance") from None
    return inst, limits, options


# ---------------------------------------------------------------------------
# certificate trees
# ---------------------------------------------------------------------------

def sturm_to_json(c: SturmCertificate) -> dict:
    return {
        "claim": c.claim,
        "sturm_chain": [uni_to_str(p) for p in c.sturm_chain],
        "sign_variation_counts": list(c.sign_variation_counts),
        "sample_points": [_q(x) for x in c.sample_points],
    }


def sturm_from_json(d: dict, where: str) -> SturmCertificate:
    return SturmCertificate(
        claim=_get(d, "claim", where),
        sturm_chain=tuple(_uni(t, f"{where}.sturm_chain[{i}]") for i, t in enumerate(_get(d, "sturm_chain", where))),
        sign_variation_counts=tuple(_get(d, "sign_variation_counts", where)),
        sample_points=tuple(_rational(x, where + ".sample_points") for x in d.get("sample_points", [])),
    )


def _two_squares_to_json(ts: TwoSquares | None):
    if ts is None:
        return None
    return {
        "s1": uni_to_str(ts.s1),
        "s2": uni_to_str(ts.s2),
        "remainder": uni_to_str(ts.remainder),
        "remainder_certificate": None if ts.remainder_certificate is None else sturm_to_json(ts.remainder_certificate),
    }


def _two_squares_from_json(d, where: str) -> TwoSquares | None:
    if d is None:
        return None
    rc = d.get("remainder_certificate")
    return TwoSquares(
        _uni(_get(d, "s1", where), where + ".s1"),
        _uni(_get(d, "s2", where), where + ".s2"),
        _uni(_get(d, "remainder", where), where + ".remainder"),
        None if rc is None else sturm_from_json(rc, where + ".remainder_certificate"),
    )


def tree_to_json(node) -> dict:
    if isinstance(node, Sum):
        return {"node": "sum", "children": [tree_to_json(c) for c in node.children]}
    if isinstance(node, Product):
        return {"node": "product", "children": [tree_to_json(c) for c in node.children]}
    if isinstance(node, Power):
        return {"node": "power", "exponent": node.exponent, "base": tree_to_json(node.base)}
    if isinstance(node, Square):
        return {"node": "square", "poly": format_poly(node.poly)}
    if isinstance(node, PositiveUnivariate):
        return {
            "node": "positive_univariate",
            "poly": uni_to_str(node.poly),
            "certificate": sturm_to_json(node.certificate),
            "two_squares": _two_squares_to_json(node.two_squares),
        }
    if isinstance(node, Generator):
        return {"node": "generator", "index": node.index}
    if isinstance(node, BallW):
        return {"node": "ball_w"}
    if isinstance(node, Constant):
        return {"node": "constant", "value": _q(node.value)}
    raise TypeError(f"not a certificate node: {node!r}")


def tree_from_json(d: dict, n: int, where: str = "tree"):
    kind = _get(d, "node", where)
    if kind in ("sum", "product"):
        kids = _get(d, "children", where)
        if not isinstance(kids, list):
            raise InstanceFormatError("children must be a list", where)
        children = tuple(tree_from_json(c, n, f"{where}.{i}") for i, c in enumerate(kids))
        return Sum(children) if kind == "sum" else Product(children)
    if kind == "power":
        return Power(tree_from_json(_get(d, "base", where), n, where + ".base"),
                     _int(_get(d, "exponent", where), where + ".exponent"))
    if kind == "square":
        return Square(_poly(_get(d, "poly", where), n, where + ".poly"))
    if kind == "positive_univariate":
        return PositiveUnivariate(
            _uni(_get(d, "poly", where), where + ".poly"),
            sturm_from_json(_get(d, "certificate", where), where + ".certificate"),
            _two_squares_from_json(d.get("two_squares"), where + ".two_squares"),
        )
    if kind == "generator":
        return Generator(_int(_get(d, "index", where), where + ".index"))
    if kind == "ball_w":
        return BallW()
    if kind == "constant":
        return Constant(_rational(_get(d, "value", where), where + ".value"))
    raise InstanceFormatError(f"unknown node kind {kind!r}", where)


TIER_NAMES = {"A": "sturm", "B": "sos"}


def certificate_to_json(cert: Certificate, n: int, created: str | None = None) -> dict:
    if created is None:
        created = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return {
        "format": CERTIFICATE_FORMAT,
        "schema_version": SCHEMA_VERSION,
        "tool_version": tool_version(),
        "created": created,
        "n": n,
        "M": cert.M,
        "tier": cert.tier,
        "kappa": cert.kappa,
        "simplex_a": None if cert.frame_a is None else _q(cert.frame_a),
        "parameters": None if cert.params is None else cert.params.to_json(),
        "warnings": list(cert.warnings),
        "tree": tree_to_json(cert.tree),
    }


def certificate_from_json(d: dict) -> Certificate:
    if not isinstance(d, dict) or d.get("format") != CERTIFICATE_FORMAT:
        raise InstanceFormatError("not a certificate document", "format")
    n = _int(_get(d, "n", "certificate"), "n")
    params = d.get("parameters")
    try:
        params = None if params is None else HParameters.from_json(params)
    except (KeyError, TypeError, ValueError) as exc:
        raise InstanceFormatError(f"bad parameters: {exc}", "parameters") from None
    M = _int(_get(d, "M", "certificate"), "M")
    if M < 0:
        raise InstanceFormatError("M must be non-negative", "M")
    a = d.get("simplex_a")
    return Certificate(
        M=M,
        tree=tree_from_json(_get(d, "tree", "certificate"), n),
        tier=d.get("tier", "A"),
        params=params,
        kappa=d.get("kappa"),
        frame_a=None if a is None else _rational(a, "simplex_a"),
        warnings=list(d.get("warnings", [])),
    )


# ---------------------------------------------------------------------------
# verdicts and reports
# ---------------------------------------------------------------------------

def verdict_to_json(v: Verdict, cap: int = MISMATCH_TERM_CAP) -> dict:
    mismatch = None
    if v.mismatch is not None:
        terms = v.mismatch.terms
        shown = v.mismatch
        if len(terms) > cap:
            keep = sorted(terms, key=lambda m: (-sum(m), m))[:cap]
            shown = MultiPoly(v.mismatch.n, {m: terms[m] for m in keep})
        mismatch = {
            "difference": format_poly(shown),
            "terms": len(terms),
            "truncated": len(terms) > cap,
        }
    out = {
        "ok": v.ok,
        "identity_ok": v.identity_ok,
        "leaves_ok": v.leaves_ok,
        "tier": v.tier,
        "statement": v.statement,
        "mismatch": mismatch,
        "leaf_failures": [{"path": p, "reason": r} for p, r in v.leaf_failures],
    }
    if v.checks:
        out["checks"] = [{"name": name, "ok": ok} for name, ok in v.checks]
    return out


def _witness_json(w):
    if w is None:
        return None
    if isinstance(w, (tuple, list)):
        return [_witness_json(x) for x in w]
    if isinstance(w, (Fraction, int)) and not isinstance(w, bool):
        return _q(w)
    return str(w)


def report_to_json(report: AssumptionReport) -> dict:
    return {
        "falsified": report.falsified(),
        "inconclusive": report.inconclusive(),
        "assumptions": {
            key: {"status": st.status, "witness": _witness_json(st.witness), "detail": st.detail}
            for key, st in report.entries.items()
        },
    }


def dumps(obj: dict) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"
