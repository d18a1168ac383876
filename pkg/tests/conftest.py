from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest
import sympy

from qmcert.frame import ProblemInstance
from qmcert.polyring import MultiPoly, parse
from qmcert.qmodule import QmElement
from qmcert.uniposit import UniPoly

INSTANCES = Path(__file__).resolve().parent.parent / "instances"


def toy_instance() -> ProblemInstance:
    one = MultiPoly.one(1)
    witness = QmElement((), ((1, ((Fraction(1), one),)),))
    return ProblemInstance(1, [parse("1 - X1^2", 1)], parse("2*Y^2 - X1^2*Y^2 + 1", 1),
                           UniPoly([1, 0, 1]), Fraction(1), witness)


def boundary_zero_instance() -> ProblemInstance:
    """g = (1 - X^2)^3, f = (1 - X^2) Y^2 + 1: the leading coefficient of f vanishes at x = +-1."""
    x = parse("X1", 1)
    g = parse("1 - X1^2", 1) ** 3
    witness = QmElement(((Fraction(4, 3), x * (x * x - Fraction(3, 2))),),
                        ((1, ((Fraction(4, 3), MultiPoly.one(1)),)),))
    return ProblemInstance(1, [g], parse("Y^2 - X1^2*Y^2 + 1", 1), UniPoly([1, 0, 1]), Fraction(4, 3), witness)


def two_generator_instance() -> ProblemInstance:
    """Two generators, deg_Y f = 4; the search lands on an odd M."""
    one = MultiPoly.one(1)
    witness = QmElement((), ((2, ((Fraction(1), one),)),))
    g = [parse("Y^2 - X1^2*Y^2 + 1 - X1^2", 1), parse("1 - X1^2", 1)]
    return ProblemInstance(1, g, parse("Y^4 + Y^2 + 1", 1), UniPoly([1, 0, 1]), Fraction(1), witness)


@pytest.fixture
def toy():
    return toy_instance()


@pytest.fixture
def boundary_zero():
    return boundary_zero_instance()


@pytest.fixture
def instances_dir():
    return INSTANCES


# ---------------------------------------------------------------------------
# sympy as an independent oracle
# ---------------------------------------------------------------------------

def sym_symbols(n: int):
    xs = sympy.symbols(f"X1:{n + 1}")
    return xs, sympy.Symbol("Y"), sympy.Symbol("Z")


def to_sympy(p: MultiPoly):
    """Convert via the exponent table only, so no qmcert arithmetic is involved."""
    xs, y, z = sym_symbols(p.n)
    gens = list(xs) + [y, z]
    expr = sympy.Integer(0)
    for mono, c in p.terms.items():
        term = sympy.Rational(c.numerator, c.denominator)
        for g, e in zip(gens, mono):
            term *= g ** e
        expr += term
    return sympy.expand(expr)


def uni_to_sympy(p: UniPoly):
    y = sympy.Symbol("Y")
    return sympy.expand(sum(sympy.Rational(c.numerator, c.denominator) * y ** k for k, c in enumerate(p.coeffs)))


# ---------------------------------------------------------------------------
# acceptance summary, one line per criterion
# ---------------------------------------------------------------------------

ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_RESULTS:
            terminalreporter.write_line(line)
