"""Univariate and binary-form positivity over the rationals.

Tier A evidence is a :class:`SturmCertificate`: the Sturm chain of the
square-free part plus its sign-variation counts at infinity, which anyone can
recompute.  Tier B evidence is a :class:`TwoSquares` decomposition
``p = s1^2 + s2^2 + remainder`` whose remainder carries its own Tier A
certificate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import gcd
from typing import Iterable, Sequence

from .errors import ConstantQ, NotPositive, OddDegree, PrecisionExhausted, ZeroPolynomial
from .polyring import Y, Z, MultiPoly

POSITIVE = "positive-on-R"
NONNEG = "nonneg-on-R"
HAS_ROOT = "has-real-root"
NEGATIVE = "negative-on-R"

CLAIMS = (POSITIVE, NONNEG, HAS_ROOT, NEGATIVE)


class UniPoly:
    """Dense univariate polynomial, coefficients lowest degree first."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Iterable = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and not cs[-1]:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def from_roots(cls, roots: Sequence, lead=1) -> "UniPoly":
        p = cls([lead])
        for r in roots:
            p = p * cls([-Fraction(r), 1])
        return p

    @classmethod
    def from_multipoly(cls, p: MultiPoly) -> "UniPoly":
        """Read a polynomial that only involves ``Y``."""
        if p.variables() - {Y}:
            raise ValueError(f"{p} is not univariate in Y")
        if p.is_zero():
            return cls()
        d = p.degree_in(Y)
        cs = [Fraction(0)] * (d + 1)
        for m, c in p.terms.items():
            cs[m[p.n]] = c
        return cls(cs)

    def to_multipoly(self, n: int, var: int = Y) -> MultiPoly:
        out = {}
        for k, c in enumerate(self.coeffs):
            if c:
                out.update(MultiPoly.monomial(n, {var: k}, c).terms)
        return MultiPoly(n, out)

    # -- protocol -----------------------------------------------------------
    def __eq__(self, other) -> bool:
        return isinstance(other, UniPoly) and self.coeffs == other.coeffs

    def __hash__(self) -> int:
        return hash(self.coeffs)

    def __repr__(self) -> str:
        return f"UniPoly({self.to_str()!r})"

    def to_str(self) -> str:
        return str(self.to_multipoly(0))

    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    @property
    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __add__(self, other: "UniPoly") -> "UniPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        return UniPoly([x + (b[i] if i < len(b) else 0) for i, x in enumerate(a)])

    def __neg__(self) -> "UniPoly":
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        return self + (-other)

    def __mul__(self, other) -> "UniPoly":
        if not isinstance(other, UniPoly):
            c = Fraction(other)
            return UniPoly([x * c for x in self.coeffs])
        a, b = self.coeffs, other.coeffs
        if not a or not b:
            return UniPoly()
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return UniPoly(out)

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "UniPoly":
        result = UniPoly([1])
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    def __call__(self, x) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def deriv(self) -> "UniPoly":
        return UniPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def divmod(self, other: "UniPoly") -> tuple["UniPoly", "UniPoly"]:
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        d = other.degree
        lead = other.lc
        if len(rem) - 1 < d:
            return UniPoly(), self
        quot = [Fraction(0)] * (len(rem) - d)
        for k in range(len(rem) - 1 - d, -1, -1):
            c = rem[k + d] / lead
            quot[k] = c
            if c:
                for j, oc in enumerate(other.coeffs):
                    rem[k + j] -= c * oc
        return UniPoly(quot), UniPoly(rem[:d])

    def primitive(self) -> "UniPoly":
        """Positive rational multiple with coprime integer coefficients."""
        if not self.coeffs:
            return self
        den = 1
        for c in self.coeffs:
            den = den * c.denominator // gcd(den, c.denominator)
        ints = [int(c * den) for c in self.coeffs]
        g = 0
        for v in ints:
            g = gcd(g, v)
        return UniPoly([Fraction(v, g) for v in ints])

    def sign_at_pos_inf(self) -> int:
        return (self.lc > 0) - (self.lc < 0)

    def sign_at_neg_inf(self) -> int:
        s = self.sign_at_pos_inf()
        return s if self.degree % 2 == 0 else -s


def poly_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    while not b.is_zero():
        a, b = b, a.divmod(b)[1]
    if a.is_zero():
        return a
    a = a.primitive()
    return -a if a.lc < 0 else a


def squarefree_part(p: UniPoly) -> UniPoly:
    """``p / gcd(p, p')`` made primitive (same real roots, all simple)."""
    if p.is_zero():
        raise ZeroPolynomial("square-free part of zero")
    if p.degree <= 0:
        return UniPoly([1])
    g = poly_gcd(p, p.deriv())
    q, r = p.divmod(g)
    assert r.is_zero()
    return q.primitive()


def sturm_chain(p: UniPoly) -> list[UniPoly]:
    """Sturm chain of the square-free part, each member made primitive."""
    s = squarefree_part(p)
    chain = [s]
    if s.degree >= 1:
        chain.append(s.deriv().primitive())
        while True:
            r = chain[-2].divmod(chain[-1])[1]
            if r.is_zero():
                break
            chain.append((-r).primitive())
    return chain


def _variations(signs: Iterable[int]) -> int:
    last = 0
    count = 0
    for s in signs:
        if s == 0:
            continue
        if last and s != last:
            count += 1
        last = s
    return count


def variations_at(chain: Sequence[UniPoly], x) -> int:
    vals = [q(x) for q in chain]
    return _variations((v > 0) - (v < 0) for v in vals)


def variations_at_inf(chain: Sequence[UniPoly]) -> tuple[int, int]:
    neg = _variations(q.sign_at_neg_inf() for q in chain)
    pos = _variations(q.sign_at_pos_inf() for q in chain)
    return neg, pos


def count_roots(chain: Sequence[UniPoly], lo, hi) -> int:
    """Distinct real roots in ``(lo, hi]`` (endpoints must not be roots)."""
    return variations_at(chain, lo) - variations_at(chain, hi)


@dataclass(frozen=True)
class SturmCertificate:
    claim: str
    sturm_chain: tuple
    sign_variation_counts: tuple
    # sign of p at points separating its real roots; only for nonneg claims
    sample_points: tuple = ()


def _cauchy_bound(p: UniPoly) -> Fraction:
    lead = abs(p.lc)
    return 1 + max((abs(c) / lead for c in p.coeffs[:-1]), default=Fraction(0))


def isolate_real_roots(p: UniPoly, width=None) -> list[tuple[Fraction, Fraction]]:
    """Disjoint rational intervals ``[lo, hi]``, one per distinct real root.

    Endpoints are never roots.  With ``width`` given every interval is refined
    until ``hi - lo <= width``.
    """
    if p.is_zero():
        raise ZeroPolynomial("root isolation of zero")
    chain = sturm_chain(p)
    s = chain[0]
    if s.degree <= 0:
        return []
    bound = _cauchy_bound(s)
    lo, hi = -bound, bound
    # bound is strict for the square-free part; endpoints are not roots
    total = variations_at_inf(chain)
    if total[0] == total[1]:
        return []
    out: list[tuple[Fraction, Fraction]] = []
    stack = [(lo, hi, count_roots(chain, lo, hi))]
    while stack:
        a, b, k = stack.pop()
        if k == 0:
            continue
        if k == 1:
            out.append((a, b))
            continue
        mid = _nonroot_mid(s, a, b)
        stack.append((mid, b, count_roots(chain, mid, b)))
        stack.append((a, mid, count_roots(chain, a, mid)))
    out.sort()
    if width is not None:
        out = [refine_root(p, iv, width, chain) for iv in out]
    return out


def _nonroot_mid(s: UniPoly, a: Fraction, b: Fraction) -> Fraction:
    mid = (a + b) / 2
    step = (b - a) / 4
    k = 1
    while s(mid) == 0:
        mid = (a + b) / 2 + step / k
        k += 1
    return mid


def refine_root(p: UniPoly, interval, width, chain=None) -> tuple[Fraction, Fraction]:
    chain = chain or sturm_chain(p)
    s = chain[0]
    a, b = Fraction(interval[0]), Fraction(interval[1])
    width = Fraction(width)
    while b - a > width:
        mid = _nonroot_mid(s, a, b)
        if count_roots(chain, a, mid):
            b = mid
        else:
            a = mid
    return a, b


def _classify(p: UniPoly, chain: list[UniPoly]) -> tuple[str, tuple]:
    if p.degree == 0:
        return (POSITIVE if p.lc > 0 else NEGATIVE), ()
    neg, pos = variations_at_inf(chain)
    if neg == pos:
        return (POSITIVE if p(0) > 0 else NEGATIVE), ()
    if p.lc < 0 or p.degree % 2:
        return HAS_ROOT, ()
    intervals = isolate_real_roots(p)
    points = sorted({x for iv in intervals for x in iv})
    if all(p(x) > 0 for x in points):
        return NONNEG, tuple(points)
    return HAS_ROOT, ()


def sturm_positive(p: UniPoly) -> SturmCertificate:
    """Certify (or refute) positivity of ``p`` on the whole real line."""
    if p.is_zero():
        raise ZeroPolynomial("positivity of the zero polynomial")
    if p.degree == 0:
        claim = POSITIVE if p.lc > 0 else NEGATIVE
        return SturmCertificate(claim, (), (0, 0))
    chain = sturm_chain(p)
    claim, points = _classify(p, chain)
    return SturmCertificate(claim, tuple(chain), variations_at_inf(chain), points)


def check_sturm_certificate(p: UniPoly, cert: SturmCertificate) -> list[str]:
    """Recompute the evidence from scratch; return the list of problems."""
    if cert.claim not in CLAIMS:
        return [f"unknown claim {cert.claim!r}"]
    if p.is_zero():
        return ["subject is the zero polynomial"]
    fresh = sturm_positive(p)
    problems = []
    if tuple(cert.sturm_chain) != fresh.sturm_chain:
        problems.append("stored Sturm chain does not match recomputation")
    if tuple(cert.sign_variation_counts) != fresh.sign_variation_counts:
        problems.append("stored variation counts do not match recomputation")
    if cert.claim != fresh.claim:
        problems.append(f"claim {cert.claim} but polynomial is {fresh.claim}")
    return problems


# ---------------------------------------------------------------------------
# binary forms
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class BinaryForm:
    """``sum_j c_j Y^j Z^(d-j)``; ``coeffs[j]`` is ``c_j``."""

    degree: int
    coeffs: tuple

    def __post_init__(self):
        cs = tuple(Fraction(c) for c in self.coeffs)
        if len(cs) < self.degree + 1:
            cs = cs + (Fraction(0),) * (self.degree + 1 - len(cs))
        if len(cs) != self.degree + 1:
            raise ValueError("too many coefficients for the degree")
        object.__setattr__(self, "coeffs", cs)

    @classmethod
    def from_multipoly(cls, p: MultiPoly, degree: int | None = None) -> "BinaryForm":
        if p.variables() - {Y, Z}:
            raise ValueError(f"{p} is not a form in Y, Z")
        if degree is None:
            degree = p.total_degree() if not p.is_zero() else 0
        cs = [Fraction(0)] * (degree + 1)
        for m, c in p.terms.items():
            if m[p.n] + m[p.n + 1] != degree:
                raise ValueError(f"{p} is not homogeneous of degree {degree}")
            cs[m[p.n]] = c
        return cls(degree, tuple(cs))

    def to_multipoly(self, n: int) -> MultiPoly:
        out = {}
        for j, c in enumerate(self.coeffs):
            if c:
                out.update(MultiPoly.monomial(n, {Y: j, Z: self.degree - j}, c).terms)
        return MultiPoly(n, out)

    def dehomogenize(self) -> UniPoly:
        return UniPoly(self.coeffs)

    def is_zero(self) -> bool:
        return not any(self.coeffs)

    def __call__(self, y, z) -> Fraction:
        y, z = Fraction(y), Fraction(z)
        return sum((c * y ** j * z ** (self.degree - j) for j, c in enumerate(self.coeffs) if c), Fraction(0))


def binary_form_positive_upper(b: BinaryForm) -> tuple[bool, SturmCertificate]:
    """Positivity on ``{(y, z) : z >= 0} \\ {0}`` for an even-degree form."""
    if b.is_zero():
        raise ZeroPolynomial("zero binary form")
    if b.degree % 2:
        raise OddDegree(f"form of odd degree {b.degree} cannot be positive on both z=0 rays")
    uni = b.dehomogenize()
    cert = sturm_positive(uni)
    return (b.coeffs[-1] > 0 and cert.claim == POSITIVE), cert


def validate_q(q: UniPoly) -> tuple[int, BinaryForm]:
    """Check ``q`` is non-constant and positive on R; return ``(m0, q~)``."""
    if q.degree < 1:
        raise ConstantQ("q must be non-constant")
    if q.degree % 2:
        raise OddDegree(f"q has odd degree {q.degree}")
    if q.lc <= 0:
        raise NotPositive("leading coefficient of q is not positive")
    cert = sturm_positive(q)
    if cert.claim != POSITIVE:
        raise NotPositive(f"q is not positive on R ({cert.claim})")
    return q.degree, BinaryForm(q.degree, q.coeffs)


# ---------------------------------------------------------------------------
# two squares (tier B)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TwoSquares:
    s1: UniPoly
    s2: UniPoly
    remainder: UniPoly
    remainder_certificate: SturmCertificate | None = field(default=None)

    def expand(self) -> UniPoly:
        return self.s1 * self.s1 + self.s2 * self.s2 + self.remainder


def check_two_squares(p: UniPoly, ts: TwoSquares) -> list[str]:
    problems = []
    if ts.expand() != p:
        problems.append("s1^2 + s2^2 + remainder does not re-expand to the subject")
    if not ts.remainder.is_zero():
        if ts.remainder_certificate is None:
            problems.append("nonzero remainder without certificate")
        else:
            problems.extend(check_sturm_certificate(ts.remainder, ts.remainder_certificate))
            if ts.remainder_certificate.claim not in (POSITIVE, NONNEG):
                problems.append("remainder is not certified non-negative")
    return problems


def _round(x, bits: int) -> Fraction:
    scale = 1 << bits
    return Fraction(int((x * scale).__round__()), scale)


def _sqrt_lower(c: Fraction, bits: int) -> Fraction:
    from math import isqrt

    num = c.numerator * (1 << (2 * bits)) * c.denominator
    r = Fraction(isqrt(num), (1 << bits) * c.denominator)
    return r


def two_squares(p: UniPoly, certificate: SturmCertificate | None = None) -> TwoSquares:
    """Numeric-assisted ``p = s1^2 + s2^2 + remainder`` with exact remainder.

    Complex roots in the upper half plane give ``A = U + iV`` with
    ``p = c (U^2 + V^2)``; the rounded, slightly shrunk ``U``, ``V`` leave a
    remainder that is certified non-negative by Sturm.
    """
    import mpmath

    if certificate is None:
        certificate = sturm_positive(p)
    if certificate.claim != POSITIVE:
        raise NotPositive("two_squares needs a positive-on-R certificate")
    c = p.lc
    if p.degree == 0:
        for bits in (0, 16, 32, 64):
            r = _sqrt_lower(c, bits)
            rem = p - UniPoly([r * r])
            if rem.is_zero():
                return TwoSquares(UniPoly([r]), UniPoly(), rem)
        return TwoSquares(UniPoly([r]), UniPoly(), rem, sturm_positive(rem))

    attempts = [(0, 30, 64), (6, 40, 80), (12, 60, 120), (20, 90, 200), (30, 140, 320)]
    for shrink_bits, dps, bits in attempts:
        with mpmath.workdps(dps):
            coeffs = [mpmath.mpf(x.numerator) / x.denominator for x in reversed(p.coeffs)]
            try:
                roots = mpmath.polyroots(coeffs, maxsteps=200, extraprec=4 * dps)
            except mpmath.libmp.NoConvergence:
                continue
            upper = sorted((r for r in roots if mpmath.im(r) > 0), key=lambda r: (float(mpmath.re(r)), float(mpmath.im(r))))
            if 2 * len(upper) != p.degree:
                continue
            a = [mpmath.mpc(1)]
            for r in upper:
                nxt = [mpmath.mpc(0)] * (len(a) + 1)
                for i, v in enumerate(a):
                    nxt[i + 1] += v
                    nxt[i] -= r * v
                a = nxt
            factor = mpmath.sqrt(mpmath.mpf(c.numerator) / c.denominator)
            if shrink_bits:
                factor *= 1 - mpmath.mpf(2) ** (-shrink_bits)
            s1 = UniPoly([_round(mpmath.re(v) * factor, bits) for v in a])
            s2 = UniPoly([_round(mpmath.im(v) * factor, bits) for v in a])
        if s1.lc < 0:
            s1 = -s1
        if s2.coeffs and s2.lc < 0:
            s2 = -s2
        rem = p - s1 * s1 - s2 * s2
        if rem.is_zero():
            return TwoSquares(s1, s2, rem)
        cert = sturm_positive(rem)
        if cert.claim in (POSITIVE, NONNEG):
            return TwoSquares(s1, s2, rem, cert)
    raise PrecisionExhausted("could not certify the two-squares remainder")
