"""Seeded mutations of certificate trees; every mutation must be rejected."""

from __future__ import annotations

import random
from dataclasses import replace
from fractions import Fraction

from qmcert.polyring import MultiPoly
from qmcert.qmodule import (
    Constant,
    Generator,
    Power,
    PositiveUnivariate,
    Product,
    Square,
    Sum,
    iter_nodes,
)
from qmcert.uniposit import HAS_ROOT, NEGATIVE, UniPoly, sturm_positive


def replace_at(node, path: str, new):
    parts = path.split(".")[1:]
    return _replace(node, parts, new)


def _replace(node, parts, new):
    if not parts:
        return new
    head, rest = parts[0], parts[1:]
    if head == "base":
        return Power(_replace(node.base, rest, new), node.exponent)
    i = int(head)
    kids = list(node.children)
    kids[i] = _replace(kids[i], rest, new)
    return type(node)(tuple(kids))


def _nodes(tree, kind):
    return [(p, n) for p, n in iter_nodes(tree) if isinstance(n, kind)]


def _perturb_poly(p: MultiPoly, rng: random.Random) -> MultiPoly:
    mono = [0] * (p.n + 2)
    mono[rng.randrange(p.n + 1)] = rng.randint(0, 2)
    delta = Fraction(rng.choice([1, -1, 2, -3]), rng.randint(1, 4))
    return p + MultiPoly(p.n, {tuple(mono): delta})


def mutate(tree, M: int, n_generators: int, rng: random.Random):
    """Return ``(kind, tree, M)`` with exactly one invalidating change."""
    while True:
        kind = rng.choice(["constant", "square", "univariate-coef", "univariate-swap", "claim",
                           "exponent", "generator-index", "drop-term", "duplicate-term", "M",
                           "second-generator", "zero-constant"])
        out = _try(kind, tree, M, n_generators, rng)
        if out is not None:
            return (kind,) + out


def _try(kind, tree, M, s, rng):
    if kind == "M":
        return tree, M + rng.choice([1, 2])
    if kind == "constant":
        cands = _nodes(tree, Constant)
        if not cands:
            return None
        path, node = rng.choice(cands)
        delta = Fraction(rng.choice([1, -1, 3]), rng.randint(2, 7))
        return replace_at(tree, path, Constant(node.value + delta)), M
    if kind == "zero-constant":
        cands = _nodes(tree, Constant)
        if not cands:
            return None
        path, _ = rng.choice(cands)
        return replace_at(tree, path, Constant(Fraction(rng.choice([0, -1])))), M
    if kind == "square":
        cands = _nodes(tree, Square)
        if not cands:
            return None
        path, node = rng.choice(cands)
        new = _perturb_poly(node.poly, rng)
        if new * new == node.poly * node.poly:
            return None
        return replace_at(tree, path, Square(new)), M
    if kind == "univariate-coef":
        cands = _nodes(tree, PositiveUnivariate)
        if not cands:
            return None
        path, node = rng.choice(cands)
        cs = list(node.poly.coeffs)
        j = rng.randrange(len(cs))
        cs[j] += Fraction(rng.choice([1, -1, 2]), rng.randint(1, 5))
        return replace_at(tree, path, PositiveUnivariate(UniPoly(cs), node.certificate, node.two_squares)), M
    if kind == "univariate-swap":
        cands = _nodes(tree, PositiveUnivariate)
        if not cands:
            return None
        path, _ = rng.choice(cands)
        bad = UniPoly([-1, 0, 1])
        return replace_at(tree, path, PositiveUnivariate(bad, sturm_positive(bad))), M
    if kind == "claim":
        cands = _nodes(tree, PositiveUnivariate)
        if not cands:
            return None
        path, node = rng.choice(cands)
        cert = replace(node.certificate, claim=rng.choice([HAS_ROOT, NEGATIVE]))
        return replace_at(tree, path, PositiveUnivariate(node.poly, cert, node.two_squares)), M
    if kind == "exponent":
        cands = _nodes(tree, Power)
        if not cands:
            return None
        path, node = rng.choice(cands)
        e = node.exponent + rng.choice([1, -1])
        if e < 0:
            return None
        return replace_at(tree, path, Power(node.base, e)), M
    if kind == "generator-index":
        cands = _nodes(tree, Generator)
        if not cands:
            return None
        path, _ = rng.choice(cands)
        return replace_at(tree, path, Generator(rng.choice([0, s + 1, -1]))), M
    if kind in ("drop-term", "duplicate-term"):
        cands = [(p, n) for p, n in _nodes(tree, Sum) if len(n.children) > 1]
        if not cands:
            return None
        path, node = rng.choice(cands)
        kids = list(node.children)
        i = rng.randrange(len(kids))
        if kind == "drop-term":
            del kids[i]
        else:
            kids.append(kids[i])
        return replace_at(tree, path, Sum(tuple(kids))), M
    if kind == "second-generator":
        cands = [(p, n) for p, n in _nodes(tree, Product)
                 if any(isinstance(c, Generator) for c in n.children)]
        if not cands:
            return None
        path, node = rng.choice(cands)
        kids = list(node.children) + [Generator(rng.randint(1, s))]
        return replace_at(tree, path, Product(tuple(kids))), M
    raise AssertionError(kind)
