"""Quadratic-module elements, ball identities and certificate assembly.

Sums of squares are stored as weighted squares ``sum w_k p_k^2`` with
non-negative rational weights, which keeps everything over Q.

The barycentric coordinates of the rational simplex lie in the quadratic
module of ``w = N - |X|^2`` through two completion-of-squares identities
(valid whenever ``a^2 >= N``)::

    na - sum X_j = 1/(2na) [ (na - sum X_j)^2 + sum_{j<j'} (X_j - X_j')^2
                             + ((na)^2 - nN) + n w ]
    X_j + a      = 1/(2a)  [ (X_j + a)^2 + sum_{j' != j} X_j'^2 + (a^2 - N) + w ]
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .errors import IndexOutOfRange, MismatchedN, PrecisionExhausted
from .frame import ProblemInstance, SimplexFrame
from .polyring import MultiPoly, norm_sq, x_vars
from .uniposit import (
    SturmCertificate,
    TwoSquares,
    UniPoly,
    sturm_positive,
    two_squares,
)

log = logging.getLogger(__name__)


def _wsum(n: int, squares) -> MultiPoly:
    total = MultiPoly.zero(n)
    for w, p in squares:
        total = total + (p * p).scale(w)
    return total


@dataclass(frozen=True)
class QmElement:
    """``sigma0 + sum_i sigma_i g_i`` with each sigma a weighted sum of squares."""

    sigma0: tuple = ()
    generators: tuple = ()  # ((index, ((w, p), ...)), ...) with 1-based index

    def expand(self, g) -> MultiPoly:
        n = g[0].n
        total = _wsum(n, self.sigma0)
        for idx, squares in self.generators:
            total = total + _wsum(n, squares) * g[idx - 1]
        return total

    def problems(self, g) -> list[str]:
        out = []
        for w, _ in self.sigma0:
            if w < 0:
                out.append("negative weight in sigma0")
        for idx, squares in self.generators:
            if not 1 <= idx <= len(g):
                out.append(f"generator index {idx} out of range")
            for w, _ in squares:
                if w < 0:
                    out.append(f"negative weight in sigma_{idx}")
        return out


@dataclass(frozen=True)
class BallWitnessElement:
    """``(sum w p^2 + c) + (sum w' p'^2 + c') * (N - |X|^2)``."""

    N: Fraction
    squares: tuple
    constant: Fraction
    w_squares: tuple = ()
    w_constant: Fraction = Fraction(0)

    def expand(self, n: int) -> MultiPoly:
        w = MultiPoly.constant(n, self.N) - norm_sq(n)
        a = _wsum(n, self.squares) + self.constant
        b = _wsum(n, self.w_squares) + self.w_constant
        return a + b * w

    def is_valid(self) -> bool:
        weights = [x for x, _ in self.squares] + [x for x, _ in self.w_squares]
        return self.constant >= 0 and self.w_constant >= 0 and all(x >= 0 for x in weights)

    def to_tree(self) -> "Node":
        parts: list = []
        for wt, p in self.squares:
            if wt:
                parts.append(_scaled(wt, Square(p)))
        if self.constant:
            parts.append(Constant(self.constant))
        w_parts: list = []
        for wt, p in self.w_squares:
            if wt:
                w_parts.append(_scaled(wt, Square(p)))
        if self.w_constant:
            w_parts.append(Constant(self.w_constant))
        if w_parts:
            mult = w_parts[0] if len(w_parts) == 1 else Sum(tuple(w_parts))
            parts.append(Product((mult, BallW())))
        return parts[0] if len(parts) == 1 else Sum(tuple(parts))


def _scaled(c: Fraction, node: "Node") -> "Node":
    return node if c == 1 else Product((Constant(c), node))


def ball_membership(ell_index: int, frame: SimplexFrame, N, scaled: bool = True) -> BallWitnessElement:
    """Witness for ``l_i`` (or the unnormalised numerator when ``scaled`` is off)."""
    N = Fraction(N)
    n, a = frame.n, frame.a
    if not 0 <= ell_index <= n:
        raise IndexOutOfRange(f"barycentric index {ell_index} not in 0..{n}")
    if a * a < N:
        raise ValueError("frame radius a must satisfy a^2 >= N")
    norm = 1 / frame.scale if scaled else Fraction(1)
    xs = x_vars(n)
    if ell_index == 0:
        c = norm / (2 * n * a)
        s = MultiPoly.zero(n)
        for x in xs:
            s = s + x
        squares = [(c, MultiPoly.constant(n, n * a) - s)]
        for j in range(n):
            for jj in range(j + 1, n):
                squares.append((c, xs[j] - xs[jj]))
        return BallWitnessElement(N, tuple(squares), c * ((n * a) ** 2 - n * N), (), c * n)
    j = ell_index - 1
    c = norm / (2 * a)
    squares = [(c, xs[j] + a)] + [(c, xs[jj]) for jj in range(n) if jj != j]
    return BallWitnessElement(N, tuple(squares), c * (a * a - N), (), c)


def _sq_product(u_sq, u_c, v_sq, v_c) -> tuple[tuple, Fraction]:
    out = [(wu * wv, pu * pv) for wu, pu in u_sq for wv, pv in v_sq]
    if v_c:
        out += [(wu * v_c, pu) for wu, pu in u_sq]
    if u_c:
        out += [(u_c * wv, pv) for wv, pv in v_sq]
    return tuple(out), u_c * v_c


def ball_product(u: BallWitnessElement, v: BallWitnessElement, n: int | None = None) -> BallWitnessElement:
    """``(A + Bw)(C + Dw) = (AC + BD w^2) + (AD + BC) w``, kept in square form."""
    if u.N != v.N:
        raise MismatchedN(f"{u.N} != {v.N}")
    if n is None:
        polys = [p for _, p in u.squares + u.w_squares + v.squares + v.w_squares]
        n = polys[0].n if polys else 1
    w = MultiPoly.constant(n, u.N) - norm_sq(n)
    ac_sq, ac_c = _sq_product(u.squares, u.constant, v.squares, v.constant)
    bd_sq, bd_c = _sq_product(u.w_squares, u.w_constant, v.w_squares, v.w_constant)
    # BD * w^2: every square p^2 becomes (p w)^2, the constant becomes c * w^2
    a_sq = list(ac_sq) + [(wt, p * w) for wt, p in bd_sq]
    if bd_c:
        a_sq.append((bd_c, w))
    ad_sq, ad_c = _sq_product(u.squares, u.constant, v.w_squares, v.w_constant)
    bc_sq, bc_c = _sq_product(u.w_squares, u.w_constant, v.squares, v.constant)
    return BallWitnessElement(u.N, tuple(a_sq), ac_c, ad_sq + bc_sq, ad_c + bc_c)


def ball_one(N) -> BallWitnessElement:
    return BallWitnessElement(Fraction(N), (), Fraction(1))


# ---------------------------------------------------------------------------
# certificate trees
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Sum:
    children: tuple


@dataclass(frozen=True)
class Product:
    children: tuple


@dataclass(frozen=True)
class Power:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Square:
    poly: MultiPoly


@dataclass(frozen=True)
class PositiveUnivariate:
    poly: UniPoly
    certificate: SturmCertificate
    two_squares: TwoSquares | None = None


@dataclass(frozen=True)
class Generator:
    index: int


@dataclass(frozen=True)
class BallW:
    pass


@dataclass(frozen=True)
class Constant:
    value: Fraction


Node = Union[Sum, Product, Power, Square, PositiveUnivariate, Generator, BallW, Constant]


@dataclass
class Certificate:
    M: int
    tree: Node
    tier: str
    params: object = None  # certgen.HParameters
    kappa: int | None = None
    frame_a: Fraction | None = None
    warnings: list = field(default_factory=list)


def positive_leaf(p: UniPoly, tier: str, warnings: list | None = None) -> Node:
    cert = sturm_positive(p)
    ts = None
    if tier == "B":
        try:
            ts = two_squares(p, cert)
        except PrecisionExhausted:
            if warnings is not None:
                warnings.append(f"two-squares decomposition unavailable for {p.to_str()}")
    return PositiveUnivariate(p, cert, ts)


def yz_weight_leaf(exponent: int, tier: str, warnings: list | None = None) -> Node:
    """Leaf for ``(Y^2 + 1)^exponent``."""
    if exponent == 0:
        return Constant(Fraction(1))
    return positive_leaf(UniPoly([1, 0, 1]) ** exponent, tier, warnings)


def assemble(inst: ProblemInstance, params, expansion, tier: str = "A") -> Certificate:
    """Tree for ``q^M f`` from a successful search.

    Setting ``Z = 1`` in ``h = sum b_beta l^beta`` gives
    ``q^M f = lam * sum_i [alpha_i (Y^2+1)^((r+e_i)/2) Phi_i^(2k) q^(M_i) g_i]
    + sum_beta b_beta(Y, 1) l^beta`` with
    ``Phi_i = alpha_i (Y^2+1)^(e_i/2) g_i - q^((m_i+e_i)/m0)``.
    An odd ``M`` is made even by multiplying both sides by ``q``.
    """
    if tier not in ("A", "B"):
        raise ValueError("tier must be 'A' or 'B'")
    n = inst.n
    warnings: list[str] = []
    M = params.M
    bump = M % 2
    M += bump
    q_multi = inst.q.to_multipoly(n)
    y2p1 = UniPoly([1, 0, 1]).to_multipoly(n)
    terms: list = []
    for i, (gi, ai, ei, mi, Mi) in enumerate(zip(inst.g, params.alpha, params.e, params.m_list, params.Mi), 1):
        if (mi + ei) % params.m0:
            raise ValueError("m_i + e_i must be a multiple of deg q")
        Mi += bump
        kids: list = [Constant(params.lam * ai)]
        kids.append(yz_weight_leaf((params.r + ei) // 2, tier, warnings))
        if params.k:
            phi = (y2p1 ** (ei // 2) * gi).scale(ai) - q_multi ** ((mi + ei) // params.m0)
            kids.append(Square(phi ** params.k))
        if Mi % 2:
            kids.append(positive_leaf(inst.q, tier, warnings))
        if Mi >= 2:
            kids.append(Square(q_multi ** (Mi // 2)))
        kids.append(Generator(i))
        terms.append(Product(tuple(kids)))
    frame = expansion.frame
    ell_trees = [ball_membership(i, frame, inst.N).to_tree() for i in range(n + 1)]
    for beta in sorted(expansion.coefficients):
        b_uni = expansion.coefficients[beta].dehomogenize()
        if bump:
            b_uni = b_uni * inst.q
        kids = [positive_leaf(b_uni, tier, warnings)]
        for li, bi in zip(ell_trees, beta):
            if bi == 1:
                kids.append(li)
            elif bi > 1:
                kids.append(Power(li, bi))
        terms.append(Product(tuple(kids)))
    tree = Sum(tuple(terms))
    used_tier = tier
    if tier == "B" and warnings:
        used_tier = "A"
        for w in warnings:
            log.warning("%s; falling back to Sturm-only evidence", w)
    return Certificate(M=M, tree=tree, tier=used_tier, params=params,
                       kappa=expansion.kappa, frame_a=frame.a, warnings=warnings)


def iter_nodes(node: Node, path: str = "root"):
    """Depth-first ``(path, node)`` pairs."""
    yield path, node
    if isinstance(node, (Sum, Product)):
        for i, child in enumerate(node.children):
            yield from iter_nodes(child, f"{path}.{i}")
    elif isinstance(node, Power):
        yield from iter_nodes(node.base, f"{path}.base")
