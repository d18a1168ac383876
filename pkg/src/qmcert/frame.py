"""Problem instances and the geometric scaffolding around them.

The ball ``{|x|^2 <= N}`` is enclosed in the rational simplex
``{x_j >= -a, sum x_j <= n a}`` with ``a`` a dyadic rational, ``a^2 >= N``.
Its vertices are ``v0 = (-a, ..., -a)`` and ``v_i = v0 + 2na e_i``, and the
barycentric coordinates are ``l0 = (na - sum X_j) / 2na`` and
``l_i = (X_i + a) / 2na``.
"""

from __future__ import annotations

import itertools
import random
from dataclasses import dataclass, field
from fractions import Fraction
from math import isqrt

from .errors import InvalidInstance, NonpositiveN, QmCertError
from .polyring import Y, MultiPoly, norm_sq, x_vars
from .uniposit import BinaryForm, UniPoly, isolate_real_roots, validate_q

VERIFIED = "verified-exact"
FALSIFIED = "falsified"
INCONCLUSIVE = "inconclusive"


@dataclass
class ProblemInstance:
    n: int
    g: list
    f: MultiPoly
    q: UniPoly
    N: Fraction
    archimedean_witness: object = None  # qmodule.QmElement

    def __post_init__(self):
        self.N = Fraction(self.N)
        if self.n < 1:
            raise InvalidInstance("n must be at least 1")
        if not self.g:
            raise InvalidInstance("at least one generator g_i is required")
        for i, gi in enumerate(self.g, 1):
            if gi.n != self.n:
                raise InvalidInstance(f"g{i} lives in a universe with n={gi.n}")
            if gi.is_zero():
                raise InvalidInstance(f"g{i} is the zero polynomial")
            if gi.has_z():
                raise InvalidInstance(f"g{i} mentions Z")
        if self.f.n != self.n or self.f.is_zero() or self.f.has_z():
            raise InvalidInstance("f must be a nonzero polynomial in X, Y")
        if self.N <= 0:
            raise NonpositiveN("N must be positive")
        if self.archimedean_witness is not None:
            problems = self.archimedean_witness.problems(self.g)
            if problems:
                raise InvalidInstance("archimedean witness invalid: " + "; ".join(problems))
            if self.archimedean_witness.expand(self.g) != self.ball_polynomial():
                raise InvalidInstance("archimedean witness does not re-expand to N - |X|^2")

    @property
    def s(self) -> int:
        return len(self.g)

    def ball_polynomial(self) -> MultiPoly:
        return MultiPoly.constant(self.n, self.N) - norm_sq(self.n)


# ---------------------------------------------------------------------------
# simplex
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SimplexFrame:
    n: int
    a: Fraction
    vertices: tuple
    barycentric: tuple
    scale: Fraction

    def x_in_barycentric(self) -> list[list[Fraction]]:
        """``X_j = sum_i coef[j][i] * l_i`` (linear form in the l's)."""
        out = []
        for j in range(self.n):
            out.append([v[j] for v in self.vertices])
        return out

    def box(self) -> tuple[Fraction, Fraction]:
        """Coordinate range of the simplex, the same for every axis."""
        return -self.a, (2 * self.n - 1) * self.a

    def contains(self, x) -> bool:
        return all(l.eval(_xpoint(x)) >= 0 for l in self.barycentric)


def _xpoint(x) -> dict:
    return {j + 1: Fraction(v) for j, v in enumerate(x)}


def dyadic_sqrt_ceil(N: Fraction, bits: int) -> Fraction:
    """Smallest ``p / 2^bits`` whose square is at least ``N``."""
    N = Fraction(N)
    target_num = N.numerator << (2 * bits)
    den = N.denominator
    p = isqrt(-(-target_num // den))
    while p * p * den < target_num:
        p += 1
    while p > 0 and (p - 1) * (p - 1) * den >= target_num:
        p -= 1
    return Fraction(p, 1 << bits)


def build_simplex(n: int, N, dyadic_bits: int = 1) -> SimplexFrame:
    N = Fraction(N)
    if N <= 0:
        raise NonpositiveN("N must be positive")
    if not 0 <= dyadic_bits <= 16:
        raise ValueError("dyadic_bits must lie in [0, 16]")
    return simplex_with_radius(n, dyadic_sqrt_ceil(N, dyadic_bits))


def simplex_with_radius(n: int, a) -> SimplexFrame:
    """Simplex around the cube ``[-a, a]^n``; contains the ball of radius ``a``."""
    a = Fraction(a)
    if a <= 0:
        raise ValueError("radius must be positive")
    scale = 2 * n * a
    v0 = tuple([-a] * n)
    vertices = [v0]
    for i in range(n):
        v = list(v0)
        v[i] += scale
        vertices.append(tuple(v))
    xs = x_vars(n)
    s = MultiPoly.zero(n)
    for x in xs:
        s = s + x
    bary = [(MultiPoly.constant(n, n * a) - s).scale(1 / scale)]
    for x in xs:
        bary.append((x + a).scale(1 / scale))
    return SimplexFrame(n, a, tuple(vertices), tuple(bary), scale)


# ---------------------------------------------------------------------------
# the curve q~(y, z) = 1, z >= 0
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CurveData:
    q_form: BinaryForm
    m0: int
    rho1_lower: Fraction
    rho2_upper: Fraction
    # inner bounds: rho1 <= rho1_upper and rho2 >= rho2_lower
    rho1_upper: Fraction = None
    rho2_lower: Fraction = None


def iroot(k: int, m: int) -> int:
    """``floor(k ** (1/m))`` for a non-negative integer ``k``."""
    if k < 0:
        raise ValueError("negative radicand")
    if k < 2:
        return k
    x = 1 << -(-k.bit_length() // m)
    while True:
        y = ((m - 1) * x + k // x ** (m - 1)) // m
        if y >= x:
            break
        x = y
    while x ** m > k:
        x -= 1
    while (x + 1) ** m <= k:
        x += 1
    return x


def inv_root_bounds(x: Fraction, m: int, bits: int = 40) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= x^(-1/m) <= hi``; exact when the root is exact."""
    x = Fraction(x)
    if x <= 0:
        raise ValueError("need a positive value")
    u, v = x.denominator, x.numerator  # 1/x = u/v
    for b in (0, bits):
        big = u << (b * m)
        k = big // v
        r = iroot(k, m)
        if r ** m * v == big:
            val = Fraction(r, 1 << b)
            return val, val
    return Fraction(r, 1 << bits), Fraction(r + 1, 1 << bits)


def _interval_eval(p: UniPoly, lo: Fraction, hi: Fraction) -> tuple[Fraction, Fraction]:
    """Naive interval Horner enclosure of ``p`` over ``[lo, hi]``."""
    acc_lo = acc_hi = Fraction(0)
    for c in reversed(p.coeffs):
        prods = (acc_lo * lo, acc_lo * hi, acc_hi * lo, acc_hi * hi)
        acc_lo, acc_hi = min(prods) + c, max(prods) + c
    return acc_lo, acc_hi


def _ratio_enclosure(num: UniPoly, den: UniPoly, lo: Fraction, hi: Fraction):
    nl, nh = _interval_eval(num, lo, hi)
    dl, dh = _interval_eval(den, lo, hi)
    if dl <= 0:
        return None
    cands = (nl / dl, nl / dh, nh / dl, nh / dh)
    return min(cands), max(cands)


def build_curve(q: UniPoly, bits: int = 40, width=Fraction(1, 1 << 24)) -> CurveData:
    """Rational enclosures of ``min |(y,z)|`` and ``max |(y,z)|`` on the curve.

    On the upper unit semicircle ``q~(cos t, sin t) = r(c)`` with
    ``r(c) = q(c) / (1 + c^2)^(m0/2)``, ``c = cot t``; its extremes are the
    limit ``q_m0`` and the values at real roots of
    ``q'(c)(1 + c^2) - m0 c q(c)``.
    """
    m0, q_form = validate_q(q)
    one_plus = UniPoly([1, 0, 1]) ** (m0 // 2)
    crit = q.deriv() * UniPoly([1, 0, 1]) - UniPoly([0, m0]) * q
    lead = q.lc
    r_lo_min = r_hi_min = lead  # bounds on min r
    r_lo_max = r_hi_max = lead  # bounds on max r
    if not crit.is_zero():
        for lo, hi in isolate_real_roots(crit, width=width):
            enc = None
            w = hi - lo
            while enc is None or enc[0] <= 0:
                enc = _ratio_enclosure(q, one_plus, lo, hi)
                if enc is None or enc[0] <= 0:
                    w /= 16
                    lo, hi = _shrink(crit, lo, hi, w)
            r_lo_min = min(r_lo_min, enc[0])
            r_hi_min = min(r_hi_min, enc[1])
            r_lo_max = max(r_lo_max, enc[0])
            r_hi_max = max(r_hi_max, enc[1])
    # rho = r^(-1/m0): rho1 from max r, rho2 from min r
    rho1_lower, _ = inv_root_bounds(r_hi_max, m0, bits)
    _, rho1_upper = inv_root_bounds(r_lo_max, m0, bits)
    rho2_lower, _ = inv_root_bounds(r_hi_min, m0, bits)
    _, rho2_upper = inv_root_bounds(r_lo_min, m0, bits)
    return CurveData(q_form, m0, rho1_lower, rho2_upper, rho1_upper, rho2_lower)


def _shrink(p: UniPoly, lo: Fraction, hi: Fraction, width: Fraction):
    from .uniposit import refine_root

    return refine_root(p, (lo, hi), width)


def rho(q: UniPoly, theta: float) -> float:
    """Float value of the radial parametrisation of the curve (diagnostic)."""
    import math

    m0 = q.degree
    y, z = math.cos(theta), math.sin(theta)
    val = sum(float(c) * y ** j * z ** (m0 - j) for j, c in enumerate(q.coeffs))
    return val ** (-1.0 / m0)


# ---------------------------------------------------------------------------
# assumption checks
# ---------------------------------------------------------------------------

@dataclass
class AssumptionStatus:
    status: str
    witness: tuple | None = None
    detail: str = ""


@dataclass
class AssumptionReport:
    entries: dict = field(default_factory=dict)

    def __getitem__(self, key) -> AssumptionStatus:
        return self.entries[key]

    def falsified(self) -> list[str]:
        return [k for k, v in self.entries.items() if v.status == FALSIFIED]

    def inconclusive(self) -> list[str]:
        return [k for k, v in self.entries.items() if v.status == INCONCLUSIVE]


def _ordered_values(limit: int) -> list[Fraction]:
    vals = [Fraction(0)]
    for k in range(1, limit + 1):
        vals += [Fraction(k), Fraction(-k)]
    for k in range(1, 2 * limit, 2):
        vals += [Fraction(k, 2), Fraction(-k, 2)]
    return vals


def _structured_x_points(n: int, frame: SimplexFrame, N: Fraction, cap: int = 4000) -> list[tuple]:
    limit = max(2, int(2 * frame.a) + 1)
    vals = _ordered_values(limit)
    while len(vals) ** n > cap and len(vals) > 3:
        vals = vals[:-2]
    pts = list(itertools.product(vals, repeat=n))
    # ball-boundary and box-boundary axis points
    lo, hi = frame.box()
    for j in range(n):
        for t in (frame.a, -frame.a, lo, hi, 2 * frame.a, -2 * frame.a):
            e = [Fraction(0)] * n
            e[j] = t
            pts.append(tuple(e))
    pts.extend(frame.vertices)
    return pts


def _random_x_points(n: int, frame: SimplexFrame, N: Fraction, rng: random.Random, count: int) -> list[tuple]:
    lo, hi = frame.box()
    reach = max(abs(lo), abs(hi)) * 2
    pts = []
    den = 64
    bound = int(reach * den) + 1
    for k in range(count):
        if k % 3 == 0:
            # random direction pushed to the ball boundary, rounded
            d = [rng.gauss(0, 1) for _ in range(n)]
            nrm = sum(t * t for t in d) ** 0.5 or 1.0
            r = float(N) ** 0.5
            pts.append(tuple(Fraction(round(r * t / nrm * den), den) for t in d))
        else:
            pts.append(tuple(Fraction(rng.randint(-bound, bound), den) for _ in range(n)))
    return pts


_Y_VALUES = [Fraction(v) for v in (0, 1, -1, 2, -2)] + [Fraction(1, 2), Fraction(-1, 2), Fraction(10), Fraction(-10), Fraction(100), Fraction(-100)]


def check_assumptions(inst: ProblemInstance, frame: SimplexFrame, samples: int = 200, seed: int = 0) -> AssumptionReport:
    """Exact checks where possible, sampling-based falsification elsewhere."""
    rng = random.Random(seed)
    n = inst.n
    report = AssumptionReport()
    lead_g = [gi.y_coefficients()[-1] for gi in inst.g]
    f_coeffs = inst.f.y_coefficients()
    f_lead = f_coeffs[-1]
    m_list = [gi.degree_in(Y) for gi in inst.g]
    m = inst.f.degree_in(Y)

    # exact: archimedean witness and degree parity
    if inst.archimedean_witness is not None:
        report.entries["archimedean"] = AssumptionStatus(VERIFIED, None, "witness re-expands exactly to N - |X|^2")
    else:
        report.entries["archimedean"] = AssumptionStatus(INCONCLUSIVE, None, "no witness supplied")
    odd = [i + 1 for i, mi in enumerate(m_list) if mi % 2]
    report.entries["generator_degrees_even"] = (
        AssumptionStatus(FALSIFIED, tuple(odd), f"odd deg_Y for g{odd}") if odd
        else AssumptionStatus(VERIFIED, None, f"deg_Y(g_i) = {m_list}"))
    report.entries["f_degree_even"] = (
        AssumptionStatus(FALSIFIED, (m,), f"deg_Y(f) = {m} is odd") if m % 2
        else AssumptionStatus(VERIFIED, None, f"deg_Y(f) = {m}"))
    try:
        m0, _ = validate_q(inst.q)
        report.entries["q_positive"] = AssumptionStatus(
            VERIFIED, None, f"q has even degree {m0} and is positive on R (Sturm)")
    except QmCertError as exc:
        report.entries["q_positive"] = AssumptionStatus(FALSIFIED, None, str(exc))

    xs = _structured_x_points(n, frame, inst.N) + _random_x_points(n, frame, inst.N, rng, samples)
    ys = list(_Y_VALUES) + [Fraction(rng.randint(-4000, 4000), 64) for _ in range(max(4, samples // 20))]

    # S_infinity checks on x alone
    s_inf_ball = None
    f_lead_bad = None
    for x in xs:
        pt = _xpoint(x)
        if all(lg.eval(pt) >= 0 for lg in lead_g):
            if s_inf_ball is None and sum(v * v for v in x) > inst.N:
                s_inf_ball = x
            if f_lead_bad is None and f_lead.eval(pt) <= 0:
                f_lead_bad = x
        if s_inf_ball is not None and f_lead_bad is not None:
            break
    report.entries["s_infinity_in_ball"] = (
        AssumptionStatus(FALSIFIED, s_inf_ball, "leading coefficients of all g_i are >= 0 here but |x|^2 > N")
        if s_inf_ball is not None else AssumptionStatus(INCONCLUSIVE, None, "no counterexample among samples"))
    report.entries["f_leading_positive_at_infinity"] = (
        AssumptionStatus(FALSIFIED, f_lead_bad, "point of S_infinity where the leading Y-coefficient of f is <= 0")
        if f_lead_bad is not None else AssumptionStatus(INCONCLUSIVE, None, "no counterexample among samples"))

    # checks on S itself
    in_s = None
    arch_bad = None
    f_bad = None
    for x in xs:
        for y in ys:
            pt = _xpoint(x)
            pt[Y] = y
            if all(gi.eval(pt) >= 0 for gi in inst.g):
                if in_s is None:
                    in_s = x + (y,)
                if arch_bad is None and sum(v * v for v in x) > inst.N:
                    arch_bad = x + (y,)
                if f_bad is None and inst.f.eval(pt) <= 0:
                    f_bad = x + (y,)
        if in_s is not None and f_bad is not None and arch_bad is not None:
            break
    report.entries["s_nonempty"] = (
        AssumptionStatus(VERIFIED, in_s, "all g_i >= 0 at this point") if in_s is not None
        else AssumptionStatus(INCONCLUSIVE, None, "no point of S among samples"))
    if arch_bad is not None:
        report.entries["archimedean"] = AssumptionStatus(FALSIFIED, arch_bad, "point of S with |x|^2 > N")
    report.entries["f_positive_on_s"] = (
        AssumptionStatus(FALSIFIED, f_bad, "point of S where f <= 0") if f_bad is not None
        else AssumptionStatus(INCONCLUSIVE, None, "no counterexample among samples"))
    return report


# ---------------------------------------------------------------------------
# Lipschitz diagnostic
# ---------------------------------------------------------------------------

def lipschitz_bound(p: MultiPoly, frame: SimplexFrame, curve: CurveData) -> Fraction:
    """Upper bound on the Lipschitz constant of ``p`` over simplex x curve.

    Bounds the l1 norm of the gradient (hence the l2 norm) over the box
    ``[-a, (2n-1)a]^n x [-rho2, rho2]^2``, which is convex and contains the
    product set.
    """
    n = p.n
    lo, hi = frame.box()
    bx = max(abs(lo), abs(hi))
    by = curve.rho2_upper
    total = Fraction(0)
    for m, c in p.terms.items():
        xdeg = sum(m[:n])
        yzdeg = m[n] + m[n + 1]
        for s, e in enumerate(m):
            if not e:
                continue
            if s < n:
                total += abs(c) * e * bx ** (xdeg - 1) * by ** yzdeg
            else:
                total += abs(c) * e * bx ** xdeg * by ** (yzdeg - 1)
    return total
