"""Exact rational functions over Q and the expression language.

Polynomial arithmetic and gcd are delegated to sympy's sparse polynomial
rings (graded-lex order, rational ground domain).  Everything visible to the
rest of the package goes through :class:`RationalFunction`, whose canonical
form is: numerator and denominator coprime, denominator with leading
coefficient 1 in graded-lex order, zero stored as ``0/1``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Sequence, Union

from sympy.polys.domains import QQ
from sympy.polys.orderings import grlex
from sympy.polys.rings import PolyRing

from .errors import (
    DivisionByZeroPolynomial,
    ExpressionSyntaxError,
    IdenticallyZeroDenominator,
    PoleAtPoint,
    UnknownVariable,
)

Rational = Fraction
Scalar = Union[int, Fraction]

__all__ = [
    "Rational",
    "Polynomial",
    "RationalFunction",
    "parse_expression",
    "partial_derivative",
    "substitute",
    "is_identically_zero",
    "evaluate_at",
]


@lru_cache(maxsize=None)
def _ring(variables: tuple[str, ...]) -> PolyRing:
    return PolyRing(variables, QQ, grlex)


def _to_qq(c: Scalar):
    c = Fraction(c)
    return QQ(c.numerator, c.denominator)


def _to_fraction(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


def _fmt_coeff(c: Fraction) -> str:
    return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"


def _fmt_poly(variables: Sequence[str], p) -> str:
    if not p:
        return "0"
    out: list[str] = []
    for monom, coeff in p.terms():
        c = _to_fraction(coeff)
        factors = []
        for name, e in zip(variables, monom):
            if e == 1:
                factors.append(name)
            elif e > 1:
                factors.append(f"{name}^{e}")
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if factors:
            body = "*".join(factors)
            if mag != 1:
                body = f"{_fmt_coeff(mag)}*{body}"
        else:
            body = _fmt_coeff(mag)
        out.append((sign, body))
    first_sign, first_body = out[0]
    s = ("-" if first_sign == "-" else "") + first_body
    for sign, body in out[1:]:
        s += f" {sign} {body}"
    return s


class Polynomial:
    """Multivariate polynomial with rational coefficients.

    ``terms`` maps exponent vectors to nonzero coefficients; iteration is in
    descending graded-lex order with variables ordered as declared.
    """

    __slots__ = ("variables", "_p")

    def __init__(self, variables: Sequence[str], terms: Mapping[tuple[int, ...], Scalar] | None = None):
        self.variables = tuple(variables)
        R = _ring(self.variables)
        p = R.zero
        if terms:
            p = R({tuple(k): _to_qq(v) for k, v in terms.items() if v != 0})
        self._p = p

    @classmethod
    def _wrap(cls, variables: tuple[str, ...], p) -> "Polynomial":
        obj = cls.__new__(cls)
        obj.variables = variables
        obj._p = p
        return obj

    @property
    def terms(self) -> tuple[tuple[tuple[int, ...], Fraction], ...]:
        return tuple((m, _to_fraction(c)) for m, c in self._p.terms())

    def is_zero(self) -> bool:
        return not self._p

    def total_degree(self) -> int:
        return max((sum(m) for m in self._p.keys()), default=-1)

    def leading_coefficient(self) -> Fraction:
        return _to_fraction(self._p.LC) if self._p else Fraction(0)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, Polynomial):
            return self.variables == other.variables and self._p == other._p
        return NotImplemented

    def __hash__(self) -> int:
        return hash((self.variables, tuple(sorted(self._p.items()))))

    def __str__(self) -> str:
        return _fmt_poly(self.variables, self._p)

    def __repr__(self) -> str:
        return f"Polynomial({self})"


class RationalFunction:
    """Canonical quotient of two polynomials over Q."""

    __slots__ = ("variables", "_n", "_d", "_hash")

    # construction ---------------------------------------------------------

    @classmethod
    def _raw(cls, variables: tuple[str, ...], n, d) -> "RationalFunction":
        obj = cls.__new__(cls)
        obj.variables = variables
        obj._n = n
        obj._d = d
        obj._hash = None
        return obj

    @classmethod
    def _reduced(cls, variables: tuple[str, ...], n, d) -> "RationalFunction":
        R = _ring(variables)
        if not d:
            raise IdenticallyZeroDenominator("denominator is the zero polynomial")
        if not n:
            return cls._raw(variables, R.zero, R.one)
        if d.is_ground:
            c = d.LC
            if c != 1:
                n = n.quo_ground(c)
            return cls._raw(variables, n, R.one)
        n, d = n.cancel(d)
        c = d.LC
        if c != 1:
            n = n.quo_ground(c)
            d = d.quo_ground(c)
        return cls._raw(variables, n, d)

    @classmethod
    def constant(cls, value: Scalar, variables: Sequence[str]) -> "RationalFunction":
        variables = tuple(variables)
        R = _ring(variables)
        return cls._raw(variables, R.ground_new(_to_qq(value)), R.one)

    @classmethod
    def variable(cls, name: str, variables: Sequence[str]) -> "RationalFunction":
        variables = tuple(variables)
        if name not in variables:
            raise UnknownVariable(name)
        R = _ring(variables)
        return cls._raw(variables, R.gens[variables.index(name)], R.one)

    @classmethod
    def from_polynomials(cls, num: Polynomial, den: Polynomial) -> "RationalFunction":
        if num.variables != den.variables:
            raise ValueError("numerator and denominator over different variables")
        if den.is_zero():
            raise DivisionByZeroPolynomial("zero denominator")
        return cls._reduced(num.variables, num._p, den._p)

    # accessors --------------------------------------------------------------

    @property
    def num(self) -> Polynomial:
        return Polynomial._wrap(self.variables, self._n)

    @property
    def den(self) -> Polynomial:
        return Polynomial._wrap(self.variables, self._d)

    def is_zero(self) -> bool:
        return not self._n

    def integer_form(self) -> tuple[Polynomial, Polynomial]:
        """Equal quotient with integer coefficients and primitive denominator content.

        ``x^2 - y/2`` gives ``(2*x^2 - y, 2)``.
        """
        from math import lcm

        dens = [int(c.denominator) for c in list(self._n.values()) + list(self._d.values())]
        k = lcm(*dens) if dens else 1
        return Polynomial._wrap(self.variables, self._n * k), Polynomial._wrap(self.variables, self._d * k)

    def is_polynomial(self) -> bool:
        return self._d == 1

    def is_constant(self) -> bool:
        return self._n.is_ground and self._d == 1

    def constant_value(self) -> Fraction:
        if not self.is_constant():
            raise ValueError(f"{self} is not constant")
        return _to_fraction(self._n.LC) if self._n else Fraction(0)

    def complexity(self) -> tuple[int, int]:
        """Size heuristic used for pivot selection."""
        deg = max((sum(m) for m in self._n.keys()), default=0) + max((sum(m) for m in self._d.keys()), default=0)
        return (deg, len(self._n) + len(self._d))

    # arithmetic ---------------------------------------------------------------

    def _coerce(self, other) -> "RationalFunction":
        if isinstance(other, RationalFunction):
            if other.variables != self.variables:
                raise ValueError(
                    f"rational functions over different variables: {self.variables} vs {other.variables}"
                )
            return other
        if isinstance(other, (int, Fraction)):
            return RationalFunction.constant(other, self.variables)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o._n:
            return self
        if not self._n:
            return o
        if self._d == o._d:
            if self._d == 1:
                return RationalFunction._raw(self.variables, self._n + o._n, self._d)
            return RationalFunction._reduced(self.variables, self._n + o._n, self._d)
        return RationalFunction._reduced(self.variables, self._n * o._d + o._n * self._d, self._d * o._d)

    __radd__ = __add__

    def __neg__(self):
        return RationalFunction._raw(self.variables, -self._n, self._d)

    def __sub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not self._n or not o._n:
            return RationalFunction._raw(self.variables, _ring(self.variables).zero, _ring(self.variables).one)
        if self._d == 1 and o._d == 1:
            return RationalFunction._raw(self.variables, self._n * o._n, self._d)
        return RationalFunction._reduced(self.variables, self._n * o._n, self._d * o._d)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if not o._n:
            raise ZeroDivisionError("division by the zero rational function")
        if o._d == 1 and o._n.is_ground:
            return RationalFunction._raw(self.variables, self._n.quo_ground(o._n.LC), self._d)
        return RationalFunction._reduced(self.variables, self._n * o._d, self._d * o._n)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        return o / self

    def __pow__(self, k: int):
        if not isinstance(k, int):
            return NotImplemented
        if k >= 0:
            return RationalFunction._raw(self.variables, self._n**k, self._d**k)
        if not self._n:
            raise ZeroDivisionError("negative power of zero")
        return RationalFunction._reduced(self.variables, self._d ** (-k), self._n ** (-k))

    # comparison ---------------------------------------------------------------

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RationalFunction):
            return self.variables == other.variables and self._n == other._n and self._d == other._d
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return not self._n
            return self._d == 1 and self._n.is_ground and _to_fraction(self._n.LC) == other
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash((self.variables, tuple(sorted(self._n.items())), tuple(sorted(self._d.items()))))
        return self._hash

    def __bool__(self) -> bool:
        return bool(self._n)

    # calculus -----------------------------------------------------------------

    def diff(self, name: str) -> "RationalFunction":
        if name not in self.variables:
            raise UnknownVariable(name)
        R = _ring(self.variables)
        x = R.gens[self.variables.index(name)]
        if self._d == 1:
            return RationalFunction._raw(self.variables, self._n.diff(x), self._d)
        n = self._n.diff(x) * self._d - self._n * self._d.diff(x)
        return RationalFunction._reduced(self.variables, n, self._d**2)

    def subs(self, assignment: Mapping[str, "RationalFunction"], target: Sequence[str] | None = None) -> "RationalFunction":
        """Compose with ``assignment``; every variable of ``self`` must be assigned."""
        for v in self.variables:
            if v not in assignment:
                raise UnknownVariable(v)
        images = [assignment[v] for v in self.variables]
        if target is None:
            if images:
                target = images[0].variables
            else:
                target = ()
        target = tuple(target)
        TR = _ring(target)
        images = [
            im if isinstance(im, RationalFunction) else RationalFunction.constant(im, target) for im in images
        ]
        for im in images:
            if im.variables != target:
                raise ValueError("substitution images must share one variable list")
        # clear the denominators of the images: P(a/b) * prod b^deg
        degs = [0] * len(self.variables)
        for p in (self._n, self._d):
            for m in p.keys():
                for i, e in enumerate(m):
                    if e > degs[i]:
                        degs[i] = e
        nums = [im._n for im in images]
        dens = [im._d for im in images]
        cache: dict[tuple[int, int, int], object] = {}

        def power(i: int, which: int, e: int):
            key = (i, which, e)
            if key not in cache:
                base = nums[i] if which == 0 else dens[i]
                cache[key] = base**e
            return cache[key]

        def compose(p):
            acc = TR.zero
            for m, c in p.items():
                term = TR.ground_new(c)
                for i, e in enumerate(m):
                    if e:
                        term = term * power(i, 0, e)
                    if degs[i] - e and dens[i] != 1:
                        term = term * power(i, 1, degs[i] - e)
                acc += term
            return acc

        n = compose(self._n)
        d = compose(self._d)
        if not d:
            raise IdenticallyZeroDenominator(f"denominator of {self} vanishes identically after substitution")
        return RationalFunction._reduced(target, n, d)

    def evaluate(self, point: Mapping[str, Scalar] | Sequence[Scalar]) -> Fraction:
        if isinstance(point, Mapping):
            try:
                vals = [point[v] for v in self.variables]
            except KeyError as exc:
                raise UnknownVariable(str(exc.args[0])) from None
        else:
            vals = list(point)
            if len(vals) != len(self.variables):
                raise ValueError("point dimension mismatch")
        qv = [_to_qq(v) for v in vals]
        d = _eval_poly(self._d, qv)
        if d == 0:
            raise PoleAtPoint(f"denominator of {self} vanishes at {dict(zip(self.variables, vals))}")
        n = _eval_poly(self._n, qv)
        return _to_fraction(n) / _to_fraction(d)

    # display ------------------------------------------------------------------

    def __str__(self) -> str:
        ns = _fmt_poly(self.variables, self._n)
        if self._d == 1:
            return ns
        ds = _fmt_poly(self.variables, self._d)
        if len(self._n) > 1 or "/" in ns:
            ns = f"({ns})"
        if len(self._d) > 1 or not _is_monomial_coeff1(self._d):
            ds = f"({ds})"
        return f"{ns}/{ds}"

    def __repr__(self) -> str:
        return f"RationalFunction({self!s}; {','.join(self.variables)})"


def _is_monomial_coeff1(p) -> bool:
    return len(p) == 1 and p.LC == 1


def _eval_poly(p, qv):
    total = QQ.zero
    for m, c in p.items():
        term = c
        for v, e in zip(qv, m):
            if e:
                term = term * v**e
        total += term
    return total


# -----------------------------------------------------------------------------
# parser

_TOKEN = re.compile(r"\s*(?:(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z0-9_]*)|(?P<op>[-+*/^()]))")


class _Parser:
    def __init__(self, text: str, variables: tuple[str, ...]):
        self.text = text
        self.variables = variables
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while True:
            m = _TOKEN.match(text, pos)
            if m is None:
                rest = text[pos:]
                if rest.strip() == "":
                    break
                bad = pos + (len(rest) - len(rest.lstrip()))
                raise ExpressionSyntaxError(bad, "a number, identifier, operator or parenthesis", text)
            kind = m.lastgroup
            self.tokens.append((kind, m.group(kind), m.start(kind)))
            pos = m.end()
        self.tokens.append(("end", "", len(text)))
        self.i = 0

    def peek(self) -> tuple[str, str, int]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str, int]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, val, pos = self.take()
        if kind != "op" or val != op:
            raise ExpressionSyntaxError(pos, repr(op), self.text)

    def parse(self) -> RationalFunction:
        value = self.expr()
        kind, _, pos = self.peek()
        if kind != "end":
            raise ExpressionSyntaxError(pos, "an operator or end of input", self.text)
        return value

    def expr(self) -> RationalFunction:
        value = self.term()
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                rhs = self.term()
                value = value + rhs if val == "+" else value - rhs
            else:
                return value

    def term(self) -> RationalFunction:
        value = self.factor()
        while True:
            kind, val, pos = self.peek()
            if kind == "op" and val in "*/":
                self.take()
                rhs = self.factor()
                if val == "*":
                    value = value * rhs
                else:
                    if rhs.is_zero():
                        raise DivisionByZeroPolynomial(f"division by zero at position {pos}")
                    value = value / rhs
            else:
                return value

    def factor(self) -> RationalFunction:
        negate = False
        kind, val, _ = self.peek()
        if kind == "op" and val == "-":
            self.take()
            negate = True
        value = self.atom()
        kind, val, _ = self.peek()
        if kind == "op" and val == "^":
            self.take()
            kind, val, pos = self.take()
            if kind != "int":
                raise ExpressionSyntaxError(pos, "a nonnegative integer exponent", self.text)
            value = value ** int(val)
        return -value if negate else value

    def atom(self) -> RationalFunction:
        kind, val, pos = self.take()
        if kind == "int":
            value = RationalFunction.constant(int(val), self.variables)
            k2, v2, _ = self.peek()
            # rational literal int '/' uint binds tighter than a term-level division
            if k2 == "op" and v2 == "/" and self.tokens[self.i + 1][0] == "int":
                self.take()
                _, den, dpos = self.take()
                if int(den) == 0:
                    raise DivisionByZeroPolynomial(f"zero denominator in rational literal at position {dpos}")
                value = RationalFunction.constant(Fraction(int(val), int(den)), self.variables)
            return value
        if kind == "ident":
            if val not in self.variables:
                raise UnknownVariable(val)
            return RationalFunction.variable(val, self.variables)
        if kind == "op" and val == "(":
            value = self.expr()
            self.expect_op(")")
            return value
        raise ExpressionSyntaxError(pos, "a number, identifier or '('", self.text)


def parse_expression(text: str, variables: Iterable[str]) -> RationalFunction:
    """Parse ``text`` into a canonical rational function over ``variables``."""
    return _Parser(text, tuple(variables)).parse()


def partial_derivative(f: RationalFunction, v: str) -> RationalFunction:
    return f.diff(v)


def substitute(
    f: RationalFunction, assignment: Mapping[str, RationalFunction], target: Sequence[str] | None = None
) -> RationalFunction:
    return f.subs(assignment, target)


def is_identically_zero(f: RationalFunction) -> bool:
    return f.is_zero()


def evaluate_at(f: RationalFunction, point: Mapping[str, Scalar]) -> Fraction:
    return f.evaluate(point)
