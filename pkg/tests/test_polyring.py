from __future__ import annotations

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import sym_symbols, to_sympy
from qmcert.errors import PolyParseError, UnboundVariable, UniverseMismatch, ZeroPolynomial, ZPresent
from qmcert.polyring import Y, Z, MultiPoly, format_poly, norm_sq, parse, x_vars

rationals = st.fractions(min_value=-20, max_value=20, max_denominator=12)


@st.composite
def polys(draw, n=2, with_z=False, max_terms=6, max_exp=3):
    width = n + 2
    terms = {}
    for _ in range(draw(st.integers(0, max_terms))):
        mono = [draw(st.integers(0, max_exp)) for _ in range(width)]
        if not with_z:
            mono[-1] = 0
        terms[tuple(mono)] = draw(rationals)
    return MultiPoly(n, terms)


@settings(max_examples=60, deadline=None)
@given(polys(), polys())
def test_ring_ops_agree_with_sympy(p, q):
    assert to_sympy(p + q) == sympy.expand(to_sympy(p) + to_sympy(q))
    assert to_sympy(p - q) == sympy.expand(to_sympy(p) - to_sympy(q))
    assert to_sympy(p * q) == sympy.expand(to_sympy(p) * to_sympy(q))


@settings(max_examples=30, deadline=None)
@given(polys(max_terms=3, max_exp=2), st.integers(0, 4))
def test_power_agrees_with_sympy(p, e):
    assert to_sympy(p ** e) == sympy.expand(to_sympy(p) ** e)


@settings(max_examples=60, deadline=None)
@given(polys(n=3, with_z=True))
def test_format_parse_round_trip(p):
    assert parse(format_poly(p), 3) == p


@settings(max_examples=40, deadline=None)
@given(polys(), st.lists(rationals, min_size=3, max_size=3))
def test_eval_matches_sympy(p, point):
    xs, y, _ = sym_symbols(2)
    val = p.eval({1: point[0], 2: point[1], Y: point[2]})
    expected = to_sympy(p).subs({xs[0]: point[0], xs[1]: point[1], y: point[2]})
    assert val == Fraction(int(sympy.numer(expected)), int(sympy.denom(expected)))


def test_format_example():
    p = parse("4/3*X1^2*Y - X2 + 1")
    assert p.n == 2
    assert format_poly(p) == "4/3*X1^2*Y - X2 + 1"


def test_bare_x_is_x1_and_whitespace_ignored():
    assert parse(" X ^ 2 +  1 ", 1) == parse("X1^2+1", 1)


@pytest.mark.parametrize("text,column", [
    ("1 + * X1", 5),
    ("X1^2 $ 3", 6),
    ("3/0", 1),
    ("", 1),
    ("Y2", 1),
    ("X1 +", 5),
])
def test_parse_errors_report_column(text, column):
    with pytest.raises(PolyParseError) as info:
        parse(text, 2)
    assert info.value.column == column


def test_parse_rejects_index_beyond_universe():
    with pytest.raises(PolyParseError):
        parse("X3 + 1", 2)


def test_y_coefficients_of_leading_zero_example():
    f = parse("Y^2 - X1^2*Y^2 + 1", 1)
    c0, c1, c2 = f.y_coefficients()
    assert c0 == MultiPoly.one(1)
    assert c1.is_zero()
    assert c2 == parse("1 - X1^2", 1)
    assert f.degree_in(Y) == 2


def test_homogenize_and_back():
    f = parse("2*Y^2 - X1^2*Y^2 + X1*Y + 1", 1)
    h = f.homogenize_y()
    assert h == parse("2*Y^2 - X1^2*Y^2 + X1*Y*Z + Z^2", 1)
    assert h.is_homogeneous_yz(2)
    assert h.dehomogenize() == f
    assert f.homogenize_y(4).is_homogeneous_yz(4)
    with pytest.raises(ValueError):
        f.homogenize_y(1)
    with pytest.raises(ZPresent):
        h.homogenize_y()


def test_degree_queries():
    p = parse("X1^3*Y + X2*Y^4 + Z", 2)
    assert p.degree_in(1) == 3
    assert p.degree_in(Y) == 4
    assert p.degree_in(Z) == 1
    assert p.total_degree() == 5
    assert p.x_degree() == 3
    assert p.variables() == {1, 2, Y, Z}
    with pytest.raises(ZeroPolynomial):
        MultiPoly.zero(2).degree_in(Y)


def test_universe_mismatch_and_unbound():
    with pytest.raises(UniverseMismatch):
        parse("X1", 1) + parse("X1", 2)
    with pytest.raises(UnboundVariable):
        parse("X1*Y", 1).eval({1: 1})


def test_subs_and_with_n():
    p = parse("X1*Y + Y^2", 1)
    assert p.subs(Y, 2) == parse("2*X1 + 4", 1)
    assert p.with_n(3).with_n(1) == p
    with pytest.raises(UniverseMismatch):
        parse("X2", 2).with_n(1)


def test_norm_sq_and_x_vars():
    xs = x_vars(3)
    assert norm_sq(3) == xs[0] * xs[0] + xs[1] * xs[1] + xs[2] * xs[2]


def test_hash_consistent_with_eq():
    a = parse("X1 + 1/2", 1)
    b = parse("1/2 + X1", 1)
    assert a == b and hash(a) == hash(b)
    assert {a: 1}[b] == 1
