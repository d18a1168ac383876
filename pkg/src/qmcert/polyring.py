"""Exact sparse multivariate polynomials over the rationals.

Every polynomial lives in a fixed universe ``Q[X1..Xn, Y, Z]``.  Variables are
addressed by integer ids: ``1..n`` for the X variables, ``Y = 0`` and
``Z = -1``.  Internally a monomial is a dense exponent tuple laid out as
``(X1, ..., Xn, Y, Z)`` and the polynomial is a dict from those tuples to
nonzero :class:`fractions.Fraction` coefficients.

>>> p = parse("4/3*X1^2*Y - X2 + 1", n=2)
>>> format_poly(p * p - p * p)
'0'
"""

from __future__ import annotations

import re
from fractions import Fraction
from typing import Iterable, Mapping, Union

from .errors import PolyParseError, UnboundVariable, UniverseMismatch, ZeroPolynomial, ZPresent

Y = 0
Z = -1

Scalar = Union[int, Fraction]


def _slot(n: int, var: int) -> int:
    if var == Y:
        return n
    if var == Z:
        return n + 1
    if 1 <= var <= n:
        return var - 1
    raise UnboundVariable(f"variable id {var} is outside X1..X{n}, Y, Z")


def var_name(n: int, slot: int) -> str:
    if slot == n:
        return "Y"
    if slot == n + 1:
        return "Z"
    return f"X{slot + 1}"


class MultiPoly:
    """Immutable sparse polynomial in ``Q[X1..Xn, Y, Z]``."""

    __slots__ = ("n", "terms", "_hash")

    def __init__(self, n: int, terms: Mapping[tuple, Scalar] | None = None):
        self.n = n
        clean: dict[tuple, Fraction] = {}
        if terms:
            width = n + 2
            for mono, c in terms.items():
                if len(mono) != width:
                    raise UniverseMismatch(f"monomial {mono} does not fit n={n}")
                if c:
                    clean[tuple(mono)] = Fraction(c)
        self.terms = clean
        self._hash = None

    # -- constructors -------------------------------------------------------
    @classmethod
    def _raw(cls, n: int, terms: dict) -> "MultiPoly":
        # terms already canonical: tuples of right width, nonzero Fractions
        obj = cls.__new__(cls)
        obj.n = n
        obj.terms = terms
        obj._hash = None
        return obj

    @classmethod
    def constant(cls, n: int, c: Scalar) -> "MultiPoly":
        c = Fraction(c)
        return cls._raw(n, {(0,) * (n + 2): c} if c else {})

    @classmethod
    def zero(cls, n: int) -> "MultiPoly":
        return cls._raw(n, {})

    @classmethod
    def one(cls, n: int) -> "MultiPoly":
        return cls.constant(n, 1)

    @classmethod
    def var(cls, n: int, var: int, exponent: int = 1) -> "MultiPoly":
        mono = [0] * (n + 2)
        mono[_slot(n, var)] = exponent
        return cls._raw(n, {tuple(mono): Fraction(1)})

    @classmethod
    def monomial(cls, n: int, exponents: Mapping[int, int], coef: Scalar = 1) -> "MultiPoly":
        mono = [0] * (n + 2)
        for v, e in exponents.items():
            if e < 0:
                raise ValueError("negative exponent")
            mono[_slot(n, v)] += e
        return cls(n, {tuple(mono): coef})

    # -- basic protocol -----------------------------------------------------
    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return all(not any(m) for m in self.terms)

    def constant_term(self) -> Fraction:
        return self.terms.get((0,) * (self.n + 2), Fraction(0))

    def __len__(self) -> int:
        return len(self.terms)

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction)):
            other = MultiPoly.constant(self.n, other)
        if not isinstance(other, MultiPoly):
            return NotImplemented
        return self.n == other.n and self.terms == other.terms

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.n, frozenset(self.terms.items())))
        return self._hash

    def __repr__(self) -> str:
        return f"MultiPoly(n={self.n}, {format_poly(self)!r})"

    def __str__(self) -> str:
        return format_poly(self)

    def _coerce(self, other) -> "MultiPoly":
        if isinstance(other, MultiPoly):
            if other.n != self.n:
                raise UniverseMismatch(f"n={self.n} vs n={other.n}")
            return other
        if isinstance(other, (int, Fraction)):
            return MultiPoly.constant(self.n, other)
        raise TypeError(f"cannot combine MultiPoly with {type(other).__name__}")

    # -- arithmetic ---------------------------------------------------------
    def __add__(self, other) -> "MultiPoly":
        other = self._coerce(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            v = out.get(m)
            if v is None:
                out[m] = c
            else:
                v += c
                if v:
                    out[m] = v
                else:
                    del out[m]
        return MultiPoly._raw(self.n, out)

    __radd__ = __add__

    def __neg__(self) -> "MultiPoly":
        return MultiPoly._raw(self.n, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other) -> "MultiPoly":
        return self + (-self._coerce(other))

    def __rsub__(self, other) -> "MultiPoly":
        return self._coerce(other) - self

    def scale(self, c: Scalar) -> "MultiPoly":
        c = Fraction(c)
        if not c:
            return MultiPoly.zero(self.n)
        return MultiPoly._raw(self.n, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other) -> "MultiPoly":
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._coerce(other)
        a, b = self.terms, other.terms
        if len(a) < len(b):
            a, b = b, a
        out: dict[tuple, Fraction] = {}
        get = out.get
        for mb, cb in b.items():
            for ma, ca in a.items():
                m = tuple([x + y for x, y in zip(ma, mb)])
                out[m] = get(m, 0) + ca * cb
        return MultiPoly._raw(self.n, {m: c for m, c in out.items() if c})

    __rmul__ = __mul__

    def __pow__(self, e: int) -> "MultiPoly":
        if not isinstance(e, int) or e < 0:
            raise ValueError("exponent must be a non-negative integer")
        result = MultiPoly.one(self.n)
        base = self
        while e:
            if e & 1:
                result = result * base
            e >>= 1
            if e:
                base = base * base
        return result

    # -- queries ------------------------------------------------------------
    def degree_in(self, var: int) -> int:
        if not self.terms:
            raise ZeroPolynomial("degree of the zero polynomial")
        s = _slot(self.n, var)
        return max(m[s] for m in self.terms)

    def total_degree(self, slots: Iterable[int] | None = None) -> int:
        if not self.terms:
            raise ZeroPolynomial("degree of the zero polynomial")
        if slots is None:
            return max(sum(m) for m in self.terms)
        idx = list(slots)
        return max(sum(m[i] for i in idx) for m in self.terms)

    def x_degree(self) -> int:
        return self.total_degree(range(self.n))

    def variables(self) -> set[int]:
        """Variable ids that occur with a positive exponent."""
        used = set()
        for m in self.terms:
            for s, e in enumerate(m):
                if e:
                    used.add(s)
        ids = set()
        for s in used:
            ids.add(Y if s == self.n else Z if s == self.n + 1 else s + 1)
        return ids

    def has_z(self) -> bool:
        zs = self.n + 1
        return any(m[zs] for m in self.terms)

    def eval(self, point: Mapping[int, Scalar]) -> Fraction:
        """Exact value at ``point`` (a map variable id -> rational)."""
        vals = [None] * (self.n + 2)
        for v, x in point.items():
            vals[_slot(self.n, v)] = Fraction(x)
        total = Fraction(0)
        for m, c in self.terms.items():
            t = c
            for s, e in enumerate(m):
                if e:
                    x = vals[s]
                    if x is None:
                        raise UnboundVariable(f"{var_name(self.n, s)} is unassigned")
                    t *= x ** e
            total += t
        return total

    def subs(self, var: int, value: Scalar) -> "MultiPoly":
        """Substitute a rational constant for one variable."""
        s = _slot(self.n, var)
        value = Fraction(value)
        out: dict[tuple, Fraction] = {}
        for m, c in self.terms.items():
            e = m[s]
            mm = m[:s] + (0,) + m[s + 1:]
            out[mm] = out.get(mm, 0) + c * value ** e
        return MultiPoly(self.n, out)

    def homogenize_y(self, target_degree: int | None = None) -> "MultiPoly":
        """``Z^d * p(X, Y/Z)``: homogeneous of degree ``d`` in ``(Y, Z)``."""
        if self.has_z():
            raise ZPresent("polynomial already mentions Z")
        if not self.terms:
            return self
        d = self.degree_in(Y)
        if target_degree is not None:
            if target_degree < d:
                raise ValueError(f"target degree {target_degree} < deg_Y {d}")
            d = target_degree
        ys = self.n
        out = {}
        for m, c in self.terms.items():
            mm = list(m)
            mm[ys + 1] = d - m[ys]
            out[tuple(mm)] = c
        return MultiPoly._raw(self.n, out)

    def dehomogenize(self) -> "MultiPoly":
        return self.subs(Z, 1)

    def y_coefficients(self) -> list["MultiPoly"]:
        """``[p_0, ..., p_d]`` with ``p = sum p_k Y^k`` and ``p_d != 0``."""
        if self.has_z():
            raise ZPresent("polynomial mentions Z")
        if not self.terms:
            return [MultiPoly.zero(self.n)]
        ys = self.n
        d = self.degree_in(Y)
        buckets: list[dict] = [{} for _ in range(d + 1)]
        for m, c in self.terms.items():
            mm = m[:ys] + (0, 0)
            buckets[m[ys]][mm] = c
        return [MultiPoly._raw(self.n, b) for b in buckets]

    def is_homogeneous_yz(self, degree: int | None = None) -> bool:
        ys = self.n
        degs = {m[ys] + m[ys + 1] for m in self.terms}
        if degree is None:
            return len(degs) <= 1
        return degs <= {degree}

    def with_n(self, n: int) -> "MultiPoly":
        """Re-embed into a universe with ``n`` X variables (must not drop any)."""
        if n == self.n:
            return self
        out = {}
        for m, c in self.terms.items():
            xs, yz = m[: self.n], m[self.n:]
            if n < self.n:
                if any(xs[n:]):
                    raise UniverseMismatch(f"polynomial uses X variables beyond X{n}")
                xs = xs[:n]
            else:
                xs = xs + (0,) * (n - self.n)
            out[xs + yz] = c
        return MultiPoly._raw(n, out)


def degree_in(p: MultiPoly, var: int) -> int:
    return p.degree_in(var)


def homogenize_y(p: MultiPoly, target_degree: int | None = None) -> MultiPoly:
    return p.homogenize_y(target_degree)


def y_coefficients(p: MultiPoly) -> list[MultiPoly]:
    return p.y_coefficients()


def x_vars(n: int) -> list[MultiPoly]:
    return [MultiPoly.var(n, j) for j in range(1, n + 1)]


def norm_sq(n: int) -> MultiPoly:
    """``X1^2 + ... + Xn^2``."""
    out = MultiPoly.zero(n)
    for x in x_vars(n):
        out = out + x * x
    return out


# ---------------------------------------------------------------------------
# text grammar
# ---------------------------------------------------------------------------

def _fmt_coef(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _mono_key(n: int, m: tuple) -> tuple:
    return (-sum(m), tuple(-e for e in m))


def format_poly(p: MultiPoly) -> str:
    """Render in the text grammar, highest total degree first."""
    if not p.terms:
        return "0"
    parts = []
    for m in sorted(p.terms, key=lambda m: _mono_key(p.n, m)):
        c = p.terms[m]
        factors = []
        for s, e in enumerate(m):
            if e:
                name = var_name(p.n, s)
                factors.append(name if e == 1 else f"{name}^{e}")
        mono = "*".join(factors)
        mag = abs(c)
        if not mono:
            body = _fmt_coef(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{_fmt_coef(mag)}*{mono}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    first_sign, first = parts[0]
    out = ("-" if first_sign == "-" else "") + first
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


_TOKEN = re.compile(r"\s*(?:(?P<num>\d+)|(?P<var>[XYZ]\d*)|(?P<op>[-+*^/]))")


def _tokenize(text: str) -> list[tuple[str, str, int]]:
    toks = []
    pos = 0
    text_len = len(text)
    while pos < text_len:
        if text[pos].isspace():
            pos += 1
            continue
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise PolyParseError(f"unexpected character {text[pos]!r}", text, pos + 1)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append((kind, m.group(kind), start + 1))
        pos = m.end()
    return toks


def parse(text: str, n: int | None = None) -> MultiPoly:
    """Parse the text grammar, e.g. ``"4/3*X1^2*Y - X2 + 1"``.

    ``X`` without an index is accepted as ``X1``.  When ``n`` is omitted the
    universe is the largest X index mentioned (at least 1).
    """
    toks = _tokenize(text)
    if not toks:
        raise PolyParseError("empty polynomial", text, 1)
    i = 0

    def peek():
        return toks[i] if i < len(toks) else (None, None, len(text) + 1)

    def take(kind=None, value=None):
        nonlocal i
        k, v, col = peek()
        if k is None:
            raise PolyParseError("unexpected end of input", text, col)
        if (kind and k != kind) or (value and v != value):
            raise PolyParseError(f"unexpected token {v!r}", text, col)
        i += 1
        return k, v, col

    def integer():
        _, v, _ = take("num")
        return int(v)

    terms: list[tuple[Fraction, dict[str, int]]] = []
    sign = 1
    k, v, col = peek()
    if k == "op" and v in "+-":
        take()
        sign = -1 if v == "-" else 1
    while True:
        coef = Fraction(1)
        mono: dict[str, int] = {}
        k, v, col = peek()
        if k is None:
            raise PolyParseError("unexpected end of input", text, col)
        if k == "num":
            num = integer()
            den = 1
            if peek()[1] == "/":
                take()
                den = integer()
                if den == 0:
                    raise PolyParseError("zero denominator", text, col)
            coef = Fraction(num, den)
            if peek()[1] == "*":
                take()
                k, v, col = peek()
                if k != "var":
                    raise PolyParseError("expected a variable after '*'", text, col)
            else:
                k = None
        if k == "var":
            while True:
                _, name, vcol = take("var")
                if name == "X":
                    name = "X1"
                elif name[0] in "YZ" and len(name) > 1:
                    raise PolyParseError(f"bad variable {name}", text, vcol)
                e = 1
                if peek()[1] == "^":
                    take()
                    e = integer()
                mono[name] = mono.get(name, 0) + e
                if peek()[1] == "*" and i + 1 < len(toks) and toks[i + 1][0] == "var":
                    take()
                    continue
                break
        elif k is not None:
            raise PolyParseError(f"unexpected token {v!r}", text, col)
        terms.append((sign * coef, mono))
        k, v, col = peek()
        if k is None:
            break
        if k == "op" and v in "+-":
            take()
            sign = -1 if v == "-" else 1
            continue
        raise PolyParseError(f"unexpected token {v!r}", text, col)

    max_x = 1
    for _, mono in terms:
        for name in mono:
            if name.startswith("X"):
                idx = int(name[1:])
                if idx < 1:
                    raise PolyParseError(f"bad variable {name}", text)
                max_x = max(max_x, idx)
    if n is None:
        n = max_x
    elif max_x > n and any(name.startswith("X") and int(name[1:]) > n for _, m in terms for name in m):
        raise PolyParseError(f"variable X{max_x} outside universe n={n}", text)
    out = MultiPoly.zero(n)
    for coef, mono in terms:
        exps = {}
        for name, e in mono.items():
            vid = Y if name == "Y" else Z if name == "Z" else int(name[1:])
            exps[vid] = e
        out = out + MultiPoly.monomial(n, exps, coef)
    return out
