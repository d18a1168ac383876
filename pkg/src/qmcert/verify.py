"""Independent exact verification of certificate trees.

The verifier re-expands the tree with plain polynomial arithmetic, compares
it with ``q^M f`` and re-derives every leaf's evidence.  It also checks that
each node stays inside the quadratic module: products may combine squares,
certified-positive univariates and elements of ``M(N - |X|^2)`` freely, but
may contain at most one generator-type factor, and never mix a generator
with a ball factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .frame import ProblemInstance, build_simplex
from .polyring import MultiPoly, norm_sq, parse, x_vars
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
    ball_membership,
)
from .uniposit import NONNEG, POSITIVE, check_sturm_certificate, check_two_squares

SOS, BALL, MODULE = 0, 1, 2

STATEMENTS = {
    "A": "q^M f = sum of (globally non-negative multipliers) * g_i + non-negative term; "
         "univariate multipliers certified by Sturm chains",
    "B": "q^M f lies in the quadratic module M(g); univariate multipliers given as explicit sums of squares",
}


@dataclass
class Verdict:
    identity_ok: bool
    leaves_ok: bool
    tier: str
    mismatch: MultiPoly | None = None
    leaf_failures: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.identity_ok and self.leaves_ok

    @property
    def statement(self) -> str:
        return STATEMENTS.get(self.tier, "")

    def exit_code(self) -> int:
        if not self.identity_ok:
            return 2
        if not self.leaves_ok:
            return 3
        return 0


class _Walker:
    def __init__(self, inst: ProblemInstance):
        self.inst = inst
        self.n = inst.n
        self.failures: list[tuple[str, str]] = []
        self.all_tier_b = True
        self.ball = None
        self._ball_checked = False

    def fail(self, path: str, reason: str) -> None:
        self.failures.append((path, reason))

    def ball_value(self, path: str) -> MultiPoly | None:
        if not self._ball_checked:
            self._ball_checked = True
            w = self.inst.archimedean_witness
            target = MultiPoly.constant(self.n, self.inst.N) - norm_sq(self.n)
            if w is None:
                self.fail(path, "ball factor used but the instance has no archimedean witness")
            elif w.problems(self.inst.g) or w.expand(self.inst.g) != target:
                self.fail(path, "archimedean witness does not re-expand to N - |X|^2")
            else:
                self.ball = target
        return self.ball

    def walk(self, node, path: str):
        """Return ``(value, class)``; class is None when the node is invalid."""
        n = self.n
        if isinstance(node, Constant):
            v = Fraction(node.value)
            if v <= 0:
                self.fail(path, "constant is not positive")
                return MultiPoly.constant(n, v), None
            return MultiPoly.constant(n, v), SOS
        if isinstance(node, Square):
            p = node.poly
            if p.n != n or p.has_z():
                self.fail(path, "square lives outside the instance's X, Y variables")
                return MultiPoly.zero(n), None
            return p * p, SOS
        if isinstance(node, PositiveUnivariate):
            p = node.poly
            value = p.to_multipoly(n)
            problems = check_sturm_certificate(p, node.certificate)
            if not problems and node.certificate.claim not in (POSITIVE, NONNEG):
                problems.append(f"certificate claims {node.certificate.claim}, not non-negativity")
            if node.two_squares is None:
                self.all_tier_b = False
            else:
                ts_problems = check_two_squares(p, node.two_squares)
                if ts_problems:
                    self.all_tier_b = False
                    problems.extend(ts_problems)
            for reason in problems:
                self.fail(path, reason)
            return value, (None if problems else SOS)
        if isinstance(node, Generator):
            if not isinstance(node.index, int) or not 1 <= node.index <= len(self.inst.g):
                self.fail(path, f"generator index {node.index} out of range")
                return MultiPoly.zero(n), None
            return self.inst.g[node.index - 1], MODULE
        if isinstance(node, BallW):
            v = self.ball_value(path)
            if v is None:
                return MultiPoly.constant(n, self.inst.N) - norm_sq(n), None
            return v, BALL
        if isinstance(node, Sum):
            total = MultiPoly.zero(n)
            cls = SOS
            for i, child in enumerate(node.children):
                v, c = self.walk(child, f"{path}.{i}")
                total = total + v
                cls = None if c is None or cls is None else max(cls, c)
            return total, cls
        if isinstance(node, Product):
            total = MultiPoly.one(n)
            classes = []
            for i, child in enumerate(node.children):
                v, c = self.walk(child, f"{path}.{i}")
                total = total * v
                classes.append(c)
            if any(c is None for c in classes):
                return total, None
            modules = classes.count(MODULE)
            if modules > 1:
                self.fail(path, "product of two generator-type factors is not in the module")
                return total, None
            if modules == 1 and BALL in classes:
                self.fail(path, "product mixes a generator with a ball factor")
                return total, None
            return total, (MODULE if modules else BALL if BALL in classes else SOS)
        if isinstance(node, Power):
            e = node.exponent
            if not isinstance(e, int) or e < 0:
                self.fail(path, "power exponent must be a non-negative integer")
                return MultiPoly.zero(n), None
            v, c = self.walk(node.base, f"{path}.base")
            value = v ** e
            if c is None:
                return value, None
            if e % 2 == 0:
                return value, SOS
            if c == MODULE and e > 1:
                self.fail(path, "odd power of a generator-type factor")
                return value, None
            return value, c
        self.fail(path, f"unknown node kind {type(node).__name__}")
        return MultiPoly.zero(n), None


def verify_certificate(inst: ProblemInstance, cert, M: int | None = None) -> Verdict:
    """Check ``tree == q^M f`` exactly and re-validate every leaf.

    ``cert`` is a :class:`Certificate` or a bare tree (then ``M`` is required).
    """
    if isinstance(cert, Certificate):
        tree = cert.tree
        M = cert.M if M is None else M
    else:
        tree = cert
    if M is None or M < 0:
        raise ValueError("a non-negative M is required")
    walker = _Walker(inst)
    value, cls = walker.walk(tree, "root")
    if cls is None and not walker.failures:
        walker.fail("root", "tree is not a quadratic-module element")
    lhs = inst.q.to_multipoly(inst.n) ** M * inst.f
    diff = lhs - value
    tier = "B" if walker.all_tier_b and not walker.failures else "A"
    return Verdict(
        identity_ok=diff.is_zero(),
        leaves_ok=not walker.failures,
        tier=tier,
        mismatch=None if diff.is_zero() else diff,
        leaf_failures=walker.failures,
    )


# ---------------------------------------------------------------------------
# fixed identities
# ---------------------------------------------------------------------------

def _fixture_membership_example() -> bool:
    # 4/3 - X^2 = 4/3 X^2 (X^2 - 3/2)^2 + 4/3 (1 - X^2)^3
    g = [parse("1 - X^2", 1) ** 3]
    x = x_vars(1)[0]
    elem = QmElement(
        sigma0=((Fraction(4, 3), x * (x * x - Fraction(3, 2))),),
        generators=((1, ((Fraction(4, 3), MultiPoly.one(1)),)),),
    )
    return not elem.problems(g) and elem.expand(g) == parse("4/3 - X^2", 1)


def _fixture_sum_example() -> bool:
    g1 = parse("X1*Y^2 + 1 - X1^2 - X2^2", 2)
    g2 = parse("-X1*Y^2 + 1", 2)
    return g1 + g2 == parse("2 - X1^2 - X2^2", 2)


def _ball_identities(n: int, N) -> bool:
    frame = build_simplex(n, N)
    a = frame.a
    xs = x_vars(n)
    s = MultiPoly.zero(n)
    for x in xs:
        s = s + x
    targets = [MultiPoly.constant(n, n * a) - s] + [x + a for x in xs]
    for i, target in enumerate(targets):
        elem = ball_membership(i, frame, N, scaled=False)
        if not elem.is_valid() or elem.expand(n) != target:
            return False
        scaled = ball_membership(i, frame, N)
        if scaled.expand(n) != frame.barycentric[i]:
            return False
    return True


def _perfect_square_identities(n: int, N: int) -> bool:
    """The irrational-free instances of the original ball identities."""
    from math import isqrt

    rn, rN, rnN = isqrt(n), isqrt(N), isqrt(n * N)
    assert rn * rn == n and rN * rN == N
    xs = x_vars(n)
    s = MultiPoly.zero(n)
    for x in xs:
        s = s + x
    w = MultiPoly.constant(n, N) - norm_sq(n)
    lhs0 = MultiPoly.constant(n, rnN) - s
    pair = MultiPoly.zero(n)
    for j in range(n):
        for jj in range(j + 1, n):
            pair = pair + (xs[j] - xs[jj]) ** 2
    rhs0 = (lhs0 * lhs0 + pair).scale(Fraction(1, 2 * rnN)) + w.scale(Fraction(rn, 2 * rN))
    if lhs0 != rhs0:
        return False
    for i in range(n):
        lhs = xs[i] + rN
        others = MultiPoly.zero(n)
        for j in range(n):
            if j != i:
                others = others + xs[j] * xs[j]
        rhs = (lhs * lhs + others).scale(Fraction(1, 2 * rN)) + w.scale(Fraction(1, 2 * rN))
        if lhs != rhs:
            return False
    return True


FIXTURES: list[tuple[str, Callable[[], bool]]] = [
    ("membership identity 4/3 - X^2 in M((1 - X^2)^3)", _fixture_membership_example),
    ("sum g1 + g2 = 2 - X1^2 - X2^2", _fixture_sum_example),
    ("ball identities n=1 N=1", lambda: _ball_identities(1, 1)),
    ("ball identities n=2 N=2", lambda: _ball_identities(2, 2)),
    ("ball identities n=3 N=3", lambda: _ball_identities(3, 3)),
    ("ball identities n=3 N=7/5", lambda: _ball_identities(3, Fraction(7, 5))),
    ("irrational-free ball identities n=1 N=1", lambda: _perfect_square_identities(1, 1)),
    ("irrational-free ball identities n=4 N=4", lambda: _perfect_square_identities(4, 4)),
]


def verify_fixture_identities(fixtures=None) -> Verdict:
    fixtures = FIXTURES if fixtures is None else fixtures
    checks = []
    failures = []
    for name, fn in fixtures:
        try:
            ok = bool(fn())
        except Exception as exc:  # a broken fixture is a failed fixture
            ok = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        checks.append((name, ok))
        if not ok:
            failures.append((name, "identity does not hold"))
    return Verdict(identity_ok=not failures, leaves_ok=True, tier="A",
                   leaf_failures=failures, checks=checks)
