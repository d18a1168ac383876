"""Construction of the auxiliary polynomial h and its Polya expansion.

``h`` is homogeneous in ``(Y, Z)``; after substituting the barycentric
coordinates of the simplex for ``X`` it becomes a form in ``l0..ln`` whose
coefficients are binary forms in ``(Y, Z)``.  Multiplying by powers of
``l0 + ... + ln`` (which equals 1 on the simplex) eventually makes every
coefficient positive on the closed upper half plane, provided ``h`` is
positive on simplex x curve.  The parameters ``lambda`` and ``k`` that make
``h`` positive are not computable in general, so they are searched.
"""

from __future__ import annotations

import itertools
import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import comb, gcd
from typing import Callable

from .errors import DegreeMismatch, KappaExhausted, OddDegreeInput, SearchExhausted
from .frame import CurveData, ProblemInstance, SimplexFrame, build_curve, build_simplex
from .polyring import Y, Z, MultiPoly
from .uniposit import POSITIVE, BinaryForm, UniPoly, sturm_positive

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class HParameters:
    r: int
    e: tuple
    M: int
    Mi: tuple
    H_degree: int
    k: int
    m: int
    m_list: tuple
    m0: int
    alpha: tuple = ()
    lam: Fraction | None = None

    def to_json(self) -> dict:
        return {
            "r": self.r,
            "e": list(self.e),
            "alpha": [str(a) for a in self.alpha],
            "lambda": str(self.lam),
            "k": self.k,
            "M": self.M,
            "Mi": list(self.Mi),
            "H_degree": self.H_degree,
            "m": self.m,
            "m_list": list(self.m_list),
            "m0": self.m0,
        }

    @classmethod
    def from_json(cls, d: dict) -> "HParameters":
        return cls(
            r=d["r"], e=tuple(d["e"]), M=d["M"], Mi=tuple(d["Mi"]), H_degree=d["H_degree"],
            k=d["k"], m=d["m"], m_list=tuple(d["m_list"]), m0=d["m0"],
            alpha=tuple(Fraction(a) for a in d["alpha"]),
            lam=Fraction(d["lambda"]) if d.get("lambda") not in (None, "None") else None,
        )


def derive_exponents(m: int, m_list, m0: int, k: int) -> HParameters:
    """Degree bookkeeping: ``r``, ``e_i``, ``M``, ``M_i`` and the degree of h."""
    m_list = tuple(m_list)
    if m % 2 or any(mi % 2 for mi in m_list):
        raise OddDegreeInput(f"deg_Y(f)={m}, deg_Y(g)={list(m_list)} must all be even")
    if m0 < 2 or m0 % 2:
        raise OddDegreeInput(f"deg(q)={m0} must be even and positive")
    if k < 0:
        raise ValueError("k must be non-negative")
    r = m % m0
    e = tuple((-mi) % m0 for mi in m_list)
    term_deg = [r + (2 * k + 1) * (mi + ei) for mi, ei in zip(m_list, e)]
    H = max([m] + term_deg)
    assert (H - m) % m0 == 0 and all((H - t) % m0 == 0 for t in term_deg)
    M = (H - m) // m0
    Mi = tuple((H - t) // m0 for t in term_deg)
    return HParameters(r=r, e=e, M=M, Mi=Mi, H_degree=H, k=k, m=m, m_list=m_list, m0=m0)


def compute_alpha(inst: ProblemInstance, frame: SimplexFrame, curve: CurveData, e) -> list[Fraction]:
    """``alpha_i = 1 / (bound_i + 1)`` with ``bound_i`` a coefficient-norm bound.

    ``|x^gamma| <= B^|gamma|`` on the simplex's bounding box and
    ``|y^j z^l|``, ``(y^2+z^2)^(e/2)`` are bounded by powers of ``rho2``.
    """
    lo, hi = frame.box()
    bx = max(abs(lo), abs(hi))
    rho2 = curve.rho2_upper
    n = inst.n
    out = []
    for gi, ei in zip(inst.g, e):
        gt = gi.homogenize_y()
        bound = Fraction(0)
        for mono, c in gt.terms.items():
            bound += abs(c) * bx ** sum(mono[:n]) * rho2 ** (mono[n] + mono[n + 1] + ei)
        out.append(1 / (bound + 1))
    return out


def _yz_square_sum(n: int) -> MultiPoly:
    return MultiPoly.var(n, Y, 2) + MultiPoly.var(n, Z, 2)


def build_h(inst: ProblemInstance, params: HParameters) -> MultiPoly:
    n = inst.n
    qt = inst.q.to_multipoly(n).homogenize_y()
    ft = inst.f.homogenize_y()
    s2 = _yz_square_sum(n)
    h = qt ** params.M * ft
    correction = MultiPoly.zero(n)
    for gi, ai, ei, mi, Mi in zip(inst.g, params.alpha, params.e, params.m_list, params.Mi):
        if (mi + ei) % params.m0:
            raise DegreeMismatch("m_i + e_i is not a multiple of m0")
        G = (s2 ** (ei // 2) * gi.homogenize_y()).scale(ai)
        bracket = G - qt ** ((mi + ei) // params.m0)
        correction = correction + G * bracket ** (2 * params.k) * qt ** Mi
    h = h - (s2 ** (params.r // 2) * correction).scale(params.lam)
    if not h.is_homogeneous_yz(params.H_degree):
        raise DegreeMismatch(f"h is not homogeneous of degree {params.H_degree} in (Y, Z)")
    return h


# ---------------------------------------------------------------------------
# barycentric substitution
# ---------------------------------------------------------------------------

def _lmul(a: dict, b: dict) -> dict:
    out: dict = {}
    for ka, va in a.items():
        for kb, vb in b.items():
            k = tuple([x + y for x, y in zip(ka, kb)])
            out[k] = out.get(k, 0) + va * vb
    return {k: v for k, v in out.items() if v}


def _linear(coefs) -> dict:
    size = len(coefs)
    out = {}
    for i, c in enumerate(coefs):
        if c:
            k = [0] * size
            k[i] = 1
            out[tuple(k)] = Fraction(c)
    return out


class _PowerCache:
    def __init__(self, base: dict, size: int):
        self.powers = [{(0,) * size: Fraction(1)}, base]
        self.base = base

    def __getitem__(self, e: int) -> dict:
        while len(self.powers) <= e:
            self.powers.append(_lmul(self.powers[-1], self.base))
        return self.powers[e]


def barycentric_homogenize(h: MultiPoly, frame: SimplexFrame) -> dict:
    """Rewrite ``h`` as a form in ``l0..ln`` with binary-form coefficients.

    Every X-monomial of degree below ``deg_X(h)`` is padded with powers of
    ``l0 + ... + ln``.  Returns ``{beta: BinaryForm}`` with ``|beta| = deg_X(h)``.
    """
    n = frame.n
    if h.n != n:
        raise ValueError("polynomial and frame disagree on n")
    if h.is_zero():
        return {}
    form_deg = h.total_degree([n, n + 1])
    if not h.is_homogeneous_yz(form_deg):
        raise DegreeMismatch("h is not homogeneous in (Y, Z)")
    d = h.x_degree()
    size = n + 1
    grouped: dict[tuple, list] = {}
    for mono, c in h.terms.items():
        vec = grouped.setdefault(mono[:n], [Fraction(0)] * (form_deg + 1))
        vec[mono[n]] += c
    xs = frame.x_in_barycentric()
    x_pows = [_PowerCache(_linear(xs[j]), size) for j in range(n)]
    sigma = _PowerCache(_linear([1] * size), size)
    out: dict[tuple, list] = {}
    for gamma, vec in grouped.items():
        poly = sigma[d - sum(gamma)]
        for j, ej in enumerate(gamma):
            if ej:
                poly = _lmul(poly, x_pows[j][ej])
        for beta, c in poly.items():
            acc = out.setdefault(beta, [Fraction(0)] * (form_deg + 1))
            for t, v in enumerate(vec):
                if v:
                    acc[t] += c * v
    return {beta: BinaryForm(form_deg, tuple(v)) for beta, v in out.items() if any(v)}


# ---------------------------------------------------------------------------
# Polya iteration
# ---------------------------------------------------------------------------

@dataclass
class PolyaExpansion:
    kappa: int
    coefficients: dict
    frame: SimplexFrame
    form_degree: int = 0

    def reexpand(self) -> MultiPoly:
        """``sum_beta b_beta(Y, Z) * l^beta`` as a polynomial in X, Y, Z."""
        n = self.frame.n
        ells = self.frame.barycentric
        total = MultiPoly.zero(n)
        for beta, form in self.coefficients.items():
            term = form.to_multipoly(n)
            for li, bi in zip(ells, beta):
                if bi:
                    term = term * li ** bi
            total = total + term
        return total


_SAMPLE_Y = (-2, -1, 1, 2)


def _form_positive_int(c: list[int]) -> tuple[bool, int | None]:
    """Positivity of ``sum c_j y^j z^(d-j)`` on the upper half plane.

    Returns ``(ok, witness_value)``; the witness is a sampled negative value
    when the form is refuted cheaply.
    """
    d = len(c) - 1
    if c[0] <= 0:
        return False, c[0]
    if c[d] <= 0:
        return False, c[d]
    if d == 0:
        return True, None
    for y in _SAMPLE_Y:
        v = 0
        for coef in reversed(c):
            v = v * y + coef
        if v <= 0:
            return False, v
    # AM-GM: push each odd term onto its even neighbours
    even = list(c)
    ok = True
    for j in range(1, d, 2):
        if c[j]:
            half = Fraction(abs(c[j]), 2)
            even[j - 1] -= half
            even[j + 1] -= half
    for j in range(0, d + 1, 2):
        if even[j] < 0 or ((j == 0 or j == d) and even[j] <= 0):
            ok = False
            break
    if ok:
        return True, None
    cert = sturm_positive(UniPoly(c))
    return cert.claim == POSITIVE, None


def _level_size(n: int, kappa: int) -> int:
    return comb(kappa + n, n)


def polya_iterate(H: dict, frame: SimplexFrame, kappa_max: int, max_terms: int = 10 ** 7,
                  strict: bool = False, on_level: Callable | None = None) -> PolyaExpansion:
    """Multiply by ``(l0 + ... + ln)`` until every coefficient is positive.

    Identically zero coefficients are dropped from the expansion unless
    ``strict`` is set, in which case every ``beta`` of the level must carry a
    positive coefficient.
    """
    if not H:
        raise KappaExhausted(kappa_max, "h is identically zero")
    degs = {sum(b) for b in H}
    if len(degs) != 1:
        raise ValueError("H is not homogeneous in the barycentric variables")
    d = degs.pop()
    form_deg = next(iter(H.values())).degree
    size = frame.n + 1
    den = 1
    for form in H.values():
        for c in form.coeffs:
            den = den * c.denominator // gcd(den, c.denominator)
    cur = {b: [int(c * den) for c in form.coeffs] for b, form in H.items()}
    units = [tuple(1 if t == i else 0 for t in range(size)) for i in range(size)]
    worst = None
    for kappa in range(d, kappa_max + 1):
        if kappa > d:
            nxt: dict = {}
            for beta, vec in cur.items():
                for u in units:
                    key = tuple([x + y for x, y in zip(beta, u)])
                    acc = nxt.get(key)
                    if acc is None:
                        nxt[key] = list(vec)
                    else:
                        for t, v in enumerate(vec):
                            acc[t] += v
            cur = {b: v for b, v in nxt.items() if any(v)}
        if len(cur) * (form_deg + 1) > max_terms:
            raise KappaExhausted(kappa, f"term cap {max_terms} exceeded at kappa={kappa}", worst)
        ok = not (strict and len(cur) < _level_size(frame.n, kappa))
        level_worst = None
        if ok:
            for beta, vec in cur.items():
                good, val = _form_positive_int(vec)
                if not good:
                    ok = False
                    if val is not None:
                        level_worst = (beta, Fraction(val, den))
                    else:
                        level_worst = (beta, None)
                    break
        if on_level is not None:
            on_level(kappa, ok)
        if ok:
            coeffs = {b: BinaryForm(form_deg, tuple(Fraction(c, den) for c in v)) for b, v in cur.items()}
            return PolyaExpansion(kappa, coeffs, frame, form_deg)
        if level_worst is not None:
            worst = level_worst
    raise KappaExhausted(kappa_max, "", worst)


# ---------------------------------------------------------------------------
# parameter search
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SearchLimits:
    max_k: int = 8
    max_lambda_doublings: int = 10
    max_kappa: int = 60
    max_terms: int = 10 ** 7
    lambda0: Fraction = Fraction(1)
    k0: int = 1
    strict: bool = False

    def to_json(self) -> dict:
        return {
            "max_k": self.max_k,
            "max_lambda_doublings": self.max_lambda_doublings,
            "max_kappa": self.max_kappa,
            "max_terms": self.max_terms,
            "lambda0": str(self.lambda0),
            "k0": self.k0,
            "strict": self.strict,
        }

    @classmethod
    def from_json(cls, d: dict) -> "SearchLimits":
        kw = dict(d)
        if "lambda0" in kw:
            kw["lambda0"] = Fraction(kw["lambda0"])
        return cls(**kw)


@dataclass
class SearchResult:
    params: HParameters
    expansion: PolyaExpansion
    frame: SimplexFrame
    curve: CurveData
    trace: list = field(default_factory=list)


def _simplex_samples(frame: SimplexFrame, den: int = 4) -> list[tuple]:
    """Rational points of the simplex: a barycentric grid plus lattice points."""
    n = frame.n
    pts = set()
    for combo in itertools.product(range(den + 1), repeat=n + 1):
        if sum(combo) != den:
            continue
        x = tuple(sum(Fraction(w, den) * v[j] for w, v in zip(combo, frame.vertices)) for j in range(n))
        pts.add(x)
    lo, hi = frame.box()
    span = range(int(lo) - 1, int(hi) + 2)
    if len(span) ** n <= 2000:
        for x in itertools.product(span, repeat=n):
            x = tuple(Fraction(v) for v in x)
            if frame.contains(x):
                pts.add(x)
    return sorted(pts)


_YZ_SAMPLES = [(1, 0), (-1, 0), (0, 1), (1, 1), (-1, 1), (2, 1), (-2, 1), (1, 2), (-1, 2)]


def h_sample_witness(h: MultiPoly, frame: SimplexFrame) -> tuple | None:
    """A point of simplex x upper half plane where ``h <= 0``, if sampled.

    Such a point rules out every Polya level, since a positive expansion makes
    ``h`` positive there.
    """
    for x in _simplex_samples(frame):
        pt = {j + 1: v for j, v in enumerate(x)}
        for y, z in _YZ_SAMPLES:
            pt[Y] = Fraction(y)
            pt[Z] = Fraction(z)
            if h.eval(pt) <= 0:
                return x + (Fraction(y), Fraction(z))
    return None


def _check_even(inst: ProblemInstance) -> tuple[int, list[int]]:
    m = inst.f.degree_in(Y)
    m_list = [gi.degree_in(Y) for gi in inst.g]
    if m % 2 or any(mi % 2 for mi in m_list):
        raise OddDegreeInput(f"deg_Y(f)={m}, deg_Y(g)={m_list} must all be even")
    return m, m_list


def search_certificate(inst: ProblemInstance, limits: SearchLimits = SearchLimits(),
                       frame: SimplexFrame | None = None, curve: CurveData | None = None,
                       on_attempt: Callable | None = None) -> SearchResult:
    """Deterministic doubling schedule over ``lambda`` (outer) and ``k`` (inner)."""
    m, m_list = _check_even(inst)
    frame = frame or build_simplex(inst.n, inst.N)
    curve = curve or build_curve(inst.q)
    m0 = curve.m0
    ks = []
    k = limits.k0
    while k <= limits.max_k:
        ks.append(k)
        k *= 2
    base = derive_exponents(m, m_list, m0, ks[0] if ks else 0)
    alpha = tuple(compute_alpha(inst, frame, curve, base.e))
    trace: list[dict] = []
    for j in range(limits.max_lambda_doublings + 1):
        lam = limits.lambda0 * 2 ** j
        for k in ks:
            params = replace(derive_exponents(m, m_list, m0, k), alpha=alpha, lam=lam)
            entry = {"lambda": str(lam), "k": k, "M": params.M, "H_degree": params.H_degree}
            h = build_h(inst, params)
            bad = h_sample_witness(h, frame)
            if bad is not None:
                entry.update(status="h-nonpositive", kappa=None, witness=[str(v) for v in bad])
                _emit(trace, entry, on_attempt)
                continue
            H = barycentric_homogenize(h, frame)
            dx = h.x_degree()
            if dx > limits.max_kappa:
                entry.update(status="degree-exceeds-kappa", kappa=dx, witness=None)
                _emit(trace, entry, on_attempt)
                continue
            try:
                exp = polya_iterate(H, frame, limits.max_kappa, limits.max_terms, limits.strict)
            except KappaExhausted as exc:
                w = exc.witness
                entry.update(status="kappa-exhausted", kappa=exc.kappa_max,
                             witness=None if w is None else {"beta": list(w[0]), "value": None if w[1] is None else str(w[1])})
                _emit(trace, entry, on_attempt)
                continue
            entry.update(status="success", kappa=exp.kappa, witness=None)
            _emit(trace, entry, on_attempt)
            return SearchResult(params, exp, frame, curve, trace)
    raise SearchExhausted(trace)


def _emit(trace: list, entry: dict, hook) -> None:
    trace.append(entry)
    log.debug("attempt %s", entry)
    if hook is not None:
        hook(entry)
