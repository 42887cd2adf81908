"""Polynomial functionals over ray observables.

An :class:`Expression` is a constant plus linear terms ``P<i>`` plus pairwise
products ``P<i>*P<j>``, each weighted by a :class:`Coefficient` that is affine
in the free parameter lambda (written ``L`` in expression text).  Everything
is exact: coefficients are :class:`fractions.Fraction`.

The same container also holds functionals written in the +/-1 observables
``A<i> = 1 - 2 P<i>``; ``variable`` records which alphabet is in use.
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping, Sequence

from .rayset import OrthogonalityGraph

Assignment = tuple[int, ...]
Pair = tuple[int, int]

_ZERO = Fraction(0)


class ExpressionError(ValueError):
    """Bad expression text, out-of-range index, or a product of non-orthogonal rays."""


def as_fraction(value) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, str):
        try:
            return Fraction(value.strip())
        except (ValueError, ZeroDivisionError):
            raise ExpressionError(f"not a rational number: {value!r}") from None
    if isinstance(value, float):
        # 0.1 means 1/10, not the nearest binary double
        return Fraction(repr(value))
    return Fraction(value)


@dataclass(frozen=True, order=True)
class Coefficient:
    """``a * lambda + b``."""

    a: Fraction = _ZERO
    b: Fraction = _ZERO

    def __post_init__(self):
        object.__setattr__(self, "a", Fraction(self.a))
        object.__setattr__(self, "b", Fraction(self.b))

    def value(self, lam) -> Fraction:
        return self.a * as_fraction(lam) + self.b

    def __add__(self, other: "Coefficient") -> "Coefficient":
        return Coefficient(self.a + other.a, self.b + other.b)

    def __neg__(self) -> "Coefficient":
        return Coefficient(-self.a, -self.b)

    def __sub__(self, other: "Coefficient") -> "Coefficient":
        return self + (-other)

    def scale(self, factor) -> "Coefficient":
        factor = Fraction(factor)
        return Coefficient(self.a * factor, self.b * factor)

    def times_lambda(self) -> "Coefficient":
        if self.a:
            raise ExpressionError("lambda^2 terms are not supported")
        return Coefficient(self.b, 0)

    def is_zero(self) -> bool:
        return self.a == 0 and self.b == 0


ONE = Coefficient(0, 1)
LAMBDA = Coefficient(1, 0)


def _clean(d: Mapping) -> dict:
    return {k: v for k, v in sorted(d.items()) if not v.is_zero()}


@dataclass(frozen=True)
class Expression:
    universe: int
    constant: Coefficient = field(default_factory=Coefficient)
    linear: Mapping[int, Coefficient] = field(default_factory=dict)
    quadratic: Mapping[Pair, Coefficient] = field(default_factory=dict)
    variable: str = "P"

    def __post_init__(self):
        lin = _clean(self.linear)
        quad = {}
        for (i, j), c in self.quadratic.items():
            if i == j:
                raise ExpressionError("squared observables must be reduced to linear terms")
            key = (min(i, j), max(i, j))
            quad[key] = quad.get(key, Coefficient()) + c
        quad = _clean(quad)
        for i in lin:
            self._check_index(i)
        for i, j in quad:
            self._check_index(i)
            self._check_index(j)
        object.__setattr__(self, "linear", lin)
        object.__setattr__(self, "quadratic", quad)

    def _check_index(self, i: int):
        if not (0 <= i < self.universe):
            raise ExpressionError(
                f"index {self.variable}{i + 1} out of range 1..{self.universe}"
            )

    def check_pairs(self, graph: OrthogonalityGraph) -> "Expression":
        """Raise unless every product term joins an orthogonal pair."""
        if graph.vertex_count != self.universe:
            raise ExpressionError(
                f"expression universe {self.universe} does not match {graph.vertex_count} rays"
            )
        for i, j in self.quadratic:
            if not graph.has_edge(i, j):
                raise ExpressionError(
                    f"{self.variable}{i + 1}*{self.variable}{j + 1}: rays are not orthogonal"
                )
        return self

    @property
    def is_lambda_free(self) -> bool:
        return all(c.a == 0 for c in self._coefficients())

    def _coefficients(self):
        yield self.constant
        yield from self.linear.values()
        yield from self.quadratic.values()

    def __add__(self, other: "Expression") -> "Expression":
        self._compatible(other)
        lin = dict(self.linear)
        for i, c in other.linear.items():
            lin[i] = lin.get(i, Coefficient()) + c
        quad = dict(self.quadratic)
        for p, c in other.quadratic.items():
            quad[p] = quad.get(p, Coefficient()) + c
        return Expression(self.universe, self.constant + other.constant, lin, quad, self.variable)

    def __neg__(self) -> "Expression":
        return self.scale(-1)

    def __sub__(self, other: "Expression") -> "Expression":
        return self + (-other)

    def _compatible(self, other: "Expression"):
        if self.universe != other.universe or self.variable != other.variable:
            raise ExpressionError("cannot combine expressions over different observables")

    def scale(self, factor) -> "Expression":
        return Expression(
            self.universe,
            self.constant.scale(factor),
            {i: c.scale(factor) for i, c in self.linear.items()},
            {p: c.scale(factor) for p, c in self.quadratic.items()},
            self.variable,
        )

    def times(self, c: Coefficient) -> "Expression":
        """Multiply a lambda-free expression by an affine coefficient."""
        if not self.is_lambda_free:
            raise ExpressionError("lambda^2 terms are not supported")

        def mul(d: Coefficient) -> Coefficient:
            return Coefficient(c.a * d.b, c.b * d.b)

        return Expression(
            self.universe,
            mul(self.constant),
            {i: mul(d) for i, d in self.linear.items()},
            {p: mul(d) for p, d in self.quadratic.items()},
            self.variable,
        )

    def times_lambda(self) -> "Expression":
        return Expression(
            self.universe,
            self.constant.times_lambda(),
            {i: c.times_lambda() for i, c in self.linear.items()},
            {p: c.times_lambda() for p, c in self.quadratic.items()},
            self.variable,
        )

    def at_lambda(self, lam) -> "Expression":
        """The lambda-free expression obtained by fixing lambda."""
        lam = as_fraction(lam)

        def fix(c: Coefficient) -> Coefficient:
            return Coefficient(0, c.value(lam))

        return Expression(
            self.universe,
            fix(self.constant),
            {i: fix(c) for i, c in self.linear.items()},
            {p: fix(c) for p, c in self.quadratic.items()},
            self.variable,
        )

    def __str__(self) -> str:
        return serialize(self)


def zero(universe: int, variable: str = "P") -> Expression:
    return Expression(universe, variable=variable)


# -- text format -----------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<num>\d+(?:/\d+)?)|(?P<var>[PA])(?P<idx>\d+)|(?P<lam>L)|(?P<op>[-+*]))")


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ExpressionError(f"syntax error at position {pos}: {text[pos:pos + 10]!r}")
        pos = m.end()
        if m.group("num"):
            tokens.append(("num", m.group("num")))
        elif m.group("var"):
            tokens.append(("var", m.group("var") + m.group("idx")))
        elif m.group("lam"):
            tokens.append(("lam", "L"))
        elif m.group("op"):
            tokens.append(("op", m.group("op")))
    return tokens


def parse_expression(
    text: str,
    universe: int,
    graph: OrthogonalityGraph | None = None,
    variable: str = "P",
) -> Expression:
    """Parse ``text`` into a canonical :class:`Expression`.

    A term is a product of factors joined by ``*``: rationals (``3``, ``1/2``),
    ``L`` for lambda (at most once), and up to two distinct observables
    ``P<i>``.  Terms are joined by ``+``/``-``.  ``P<i>*P<i>`` reduces to
    ``P<i>`` for P observables (projectors are idempotent) and to ``1`` for A
    observables.  When ``graph`` is given, products must join orthogonal rays.
    """
    tokens = _tokenize(text)
    if not tokens:
        raise ExpressionError("empty expression")
    constant = Coefficient()
    linear: dict[int, Coefficient] = {}
    quadratic: dict[Pair, Coefficient] = {}
    pos = 0

    def parse_term(sign: int):
        nonlocal pos
        coeff = Fraction(sign)
        lam = False
        idx: list[int] = []
        expect_factor = True
        while pos < len(tokens):
            kind, val = tokens[pos]
            if expect_factor:
                if kind == "num":
                    try:
                        coeff *= Fraction(val)
                    except ZeroDivisionError:
                        raise ExpressionError(f"division by zero in {val!r}") from None
                elif kind == "lam":
                    if lam:
                        raise ExpressionError("L may appear at most once per term")
                    lam = True
                elif kind == "var":
                    if val[0] != variable:
                        raise ExpressionError(f"unexpected observable {val} in a {variable}-expression")
                    i = int(val[1:]) - 1
                    if not (0 <= i < universe):
                        raise ExpressionError(f"index {val} out of range 1..{universe}")
                    idx.append(i)
                else:
                    raise ExpressionError(f"syntax error near {val!r}")
                expect_factor = False
                pos += 1
            elif kind == "op" and val == "*":
                expect_factor = True
                pos += 1
            else:
                break
        if expect_factor:
            raise ExpressionError("syntax error: dangling operator")
        if len(set(idx)) < len(idx):
            dup = set(i for i in idx if idx.count(i) > 1)
            if variable == "P":
                idx = sorted(set(idx))
            else:
                idx = sorted(i for i in set(idx) if i not in dup)
        if len(idx) > 2:
            raise ExpressionError("products of more than two observables are not supported")
        return Coefficient(coeff, 0) if lam else Coefficient(0, coeff), tuple(sorted(idx))

    first = True
    while pos < len(tokens):
        kind, val = tokens[pos]
        sign = 1
        if kind == "op" and val in "+-":
            sign = -1 if val == "-" else 1
            pos += 1
        elif not first:
            raise ExpressionError(f"syntax error near {val!r}")
        first = False
        coeff, idx = parse_term(sign)
        if len(idx) == 0:
            constant = constant + coeff
        elif len(idx) == 1:
            linear[idx[0]] = linear.get(idx[0], Coefficient()) + coeff
        else:
            quadratic[idx] = quadratic.get(idx, Coefficient()) + coeff
    expr = Expression(universe, constant, linear, quadratic, variable)
    if graph is not None:
        expr.check_pairs(graph)
    return expr


def _fmt_rational(q: Fraction) -> str:
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _fmt_term(q: Fraction, factors: list[str], first: bool) -> str:
    sign = "-" if q < 0 else ("" if first else "+")
    mag = abs(q)
    if not factors:
        return sign + _fmt_rational(mag)
    body = "*".join(factors)
    if mag == 1:
        return sign + body
    return sign + _fmt_rational(mag) + "*" + body


def serialize(expr: Expression) -> str:
    """Canonical, whitespace-free text: constant, linear ascending, then pairs."""
    v = expr.variable
    monomials: list[tuple[list[str], Coefficient]] = [([], expr.constant)]
    monomials += [([f"{v}{i + 1}"], c) for i, c in expr.linear.items()]
    monomials += [([f"{v}{i + 1}", f"{v}{j + 1}"], c) for (i, j), c in expr.quadratic.items()]
    parts: list[str] = []
    for factors, c in monomials:
        if c.a:
            parts.append(_fmt_term(c.a, ["L"] + factors, not parts))
        if c.b:
            parts.append(_fmt_term(c.b, factors, not parts))
    return "".join(parts) if parts else "0"


# -- evaluation ------------------------------------------------------------

def _check_assignment(expr: Expression, assignment: Sequence[int]):
    if len(assignment) != expr.universe:
        raise ExpressionError(
            f"assignment has length {len(assignment)}, expected {expr.universe}"
        )


def evaluate_affine(expr: Expression, assignment: Sequence[int]) -> Coefficient:
    """Value of ``expr`` under a valuation, as ``slope * lambda + intercept``.

    For P-expressions the valuation is 0/1 per ray; for A-expressions it is
    the +/-1 value of each ``A<i>``.
    """
    _check_assignment(expr, assignment)
    a, b = expr.constant.a, expr.constant.b
    for i, c in expr.linear.items():
        x = assignment[i]
        if x:
            a += c.a * x
            b += c.b * x
    for (i, j), c in expr.quadratic.items():
        x = assignment[i] * assignment[j]
        if x:
            a += c.a * x
            b += c.b * x
    return Coefficient(a, b)


def evaluate(expr: Expression, assignment: Sequence[int], lam=0) -> Fraction:
    """Exact value of ``expr`` under a 0/1 assignment at the given lambda."""
    if expr.variable == "P" and any(x not in (0, 1) for x in assignment):
        raise ExpressionError("assignment entries must be 0 or 1")
    return evaluate_affine(expr, assignment).value(lam)


def a_values(assignment: Sequence[int]) -> tuple[int, ...]:
    """The +/-1 observable values ``A_i = 1 - 2 v(P_i)``."""
    return tuple(1 - 2 * x for x in assignment)


# -- P <-> A substitution --------------------------------------------------

def _substitute(expr: Expression, target: str, lin_map, quad_map) -> Expression:
    out = Expression(expr.universe, expr.constant, variable=target)
    for i, c in expr.linear.items():
        out = out + lin_map(expr.universe, i, target).times(c)
    for (i, j), c in expr.quadratic.items():
        out = out + quad_map(expr.universe, i, j, target).times(c)
    return out


def _p_to_a_linear(mu, i, var):
    # P_i = (1 - A_i) / 2
    half = Fraction(1, 2)
    return Expression(mu, Coefficient(0, half), {i: Coefficient(0, -half)}, variable=var)


def _p_to_a_quad(mu, i, j, var):
    # P_i P_j = (1 - A_i - A_j + A_i A_j) / 4
    q = Fraction(1, 4)
    return Expression(
        mu, Coefficient(0, q),
        {i: Coefficient(0, -q), j: Coefficient(0, -q)},
        {(i, j): Coefficient(0, q)}, var,
    )


def _a_to_p_linear(mu, i, var):
    # A_i = 1 - 2 P_i
    return Expression(mu, Coefficient(0, 1), {i: Coefficient(0, -2)}, variable=var)


def _a_to_p_quad(mu, i, j, var):
    # A_i A_j = 1 - 2 P_i - 2 P_j + 4 P_i P_j
    return Expression(
        mu, Coefficient(0, 1),
        {i: Coefficient(0, -2), j: Coefficient(0, -2)},
        {(i, j): Coefficient(0, 4)}, var,
    )


def to_A_form(expr: Expression) -> Expression:
    if expr.variable != "P":
        raise ExpressionError("expression is already written in A observables")
    return _substitute(expr, "A", _p_to_a_linear, _p_to_a_quad)


def from_A_form(expr: Expression) -> Expression:
    if expr.variable != "A":
        raise ExpressionError("expression is not written in A observables")
    return _substitute(expr, "P", _a_to_p_linear, _a_to_p_quad)


# -- JSON helpers for exact rationals --------------------------------------

def fraction_to_json(q: Fraction) -> dict:
    return {"num": q.numerator, "den": q.denominator}


def fraction_from_json(doc) -> Fraction:
    if isinstance(doc, dict):
        return Fraction(doc["num"], doc["den"])
    return as_fraction(doc)


def format_rational(q: Fraction) -> str:
    return _fmt_rational(q)


def format_line(c: Coefficient, symbol: str = "λ") -> str:
    """Human-readable ``a*λ+b`` with exact coefficients."""
    parts = []
    if c.a:
        if c.a == 1:
            parts.append(symbol)
        elif c.a == -1:
            parts.append("-" + symbol)
        else:
            parts.append(f"{_fmt_rational(c.a)}{symbol}")
    if c.b or not parts:
        s = _fmt_rational(abs(c.b)) if parts else _fmt_rational(c.b)
        parts.append(("-" if c.b < 0 else "+") + s if parts else s)
    return "".join(parts)
