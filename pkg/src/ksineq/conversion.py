"""Turning a KS inequality ``<F>_ks <= f`` into a noncontextuality inequality.

The derived functional is::

    F~ = lam*F - sum_{orthogonal i<j} P_i P_j
               + sum_{bases a} (sum_{i in a} P_i - 2 sum_{i<j in a} P_i P_j)

Under KS-obeying assignments it equals ``lam*F + L``; under violating ones it
is at most ``lam*F + L - 1``.  Hence ``<F~> <= max(lam*f + L, lam*f' + L - 1)``
for every assignment, with no KS rules assumed.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from itertools import combinations

from .classical import (
    BoundEnvelope,
    BoundsReport,
    Restriction,
    bound_envelope,
    compute_bounds,
    envelope_from_lines,
    is_ks_set,
)
from .expression import (
    Coefficient,
    Expression,
    ExpressionError,
    as_fraction,
    format_rational,
    fraction_from_json,
    fraction_to_json,
    parse_expression,
    serialize,
)
from .rayset import BasisList, OrthogonalityGraph, RaySet, rayset_summary


class NotAKSSetError(ValueError):
    """The direct construction needs a KS set; use :func:`build_F_tilde` instead."""


class ProvenanceError(ValueError):
    pass


class Kind(str, Enum):
    RELAXED = "relaxed"
    TIGHT = "tight"


def edge_penalty(graph: OrthogonalityGraph) -> Expression:
    """``-sum P_i P_j`` over all orthogonal pairs."""
    return Expression(
        graph.vertex_count,
        quadratic={e: Coefficient(0, -1) for e in graph.edges},
    )


def basis_term(basis: tuple[int, ...], universe: int) -> Expression:
    """``sum P_i - 2 sum_{i<j} P_i P_j`` over one basis; equals x(2-x) for x ones."""
    return Expression(
        universe,
        linear={k: Coefficient(0, 1) for k in basis},
        quadratic={p: Coefficient(0, -2) for p in combinations(basis, 2)},
    )


def _structure(graph: OrthogonalityGraph, bases: BasisList) -> Expression:
    out = edge_penalty(graph)
    for basis in bases:
        out = out + basis_term(basis, graph.vertex_count)
    return out


def build_F_tilde(F: Expression, graph: OrthogonalityGraph, bases: BasisList) -> Expression:
    if F.universe != graph.vertex_count:
        raise ExpressionError(
            f"F is over {F.universe} observables but the ray set has {graph.vertex_count}"
        )
    if not F.is_lambda_free:
        raise ExpressionError("F must not depend on lambda")
    if F.variable != "P":
        raise ExpressionError("F must be written in P observables")
    F.check_pairs(graph)
    return F.times_lambda() + _structure(graph, bases)


def build_ks_set_F_tilde(graph: OrthogonalityGraph, bases: BasisList) -> Expression:
    """The lambda-free functional for a KS set; its bound is ``L - 1``."""
    if not is_ks_set(graph, bases).is_ks:
        raise NotAKSSetError("ray set admits a KS-obeying assignment; use build_F_tilde")
    return _structure(graph, bases)


@dataclass(frozen=True)
class LambdaInterval:
    """``0 < lambda <= upper`` (``upper`` None means unbounded)."""

    upper: Fraction | None
    default_choice: Fraction

    def contains(self, lam) -> bool:
        lam = as_fraction(lam)
        return lam > 0 and (self.upper is None or lam <= self.upper)

    def __str__(self) -> str:
        hi = "inf)" if self.upper is None else format_rational(self.upper) + "]"
        return f"(0, {hi}"

    def to_json(self) -> dict:
        return {
            "lower": 0,
            "lower_open": True,
            "upper": fraction_to_json(self.upper) if self.upper is not None else None,
            "default": fraction_to_json(self.default_choice),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "LambdaInterval":
        up = doc.get("upper")
        return cls(fraction_from_json(up) if up is not None else None,
                   fraction_from_json(doc["default"]))


def select_lambda(f: Fraction | None, f_prime: Fraction | None) -> LambdaInterval:
    """Largest lambda range on which ``<F> > f`` forces a violation of the derived bound.

    ``None`` marks an empty assignment class.  With ``f < f'`` the range is
    ``(0, 1/(f'-f)]``; otherwise any positive lambda works.
    """
    if f is None and f_prime is None:
        raise ValueError("both assignment classes are empty")
    if f is not None and f_prime is not None and f < f_prime:
        upper = 1 / (Fraction(f_prime) - Fraction(f))
        return LambdaInterval(upper, upper)
    return LambdaInterval(None, Fraction(1))


@dataclass(frozen=True)
class Provenance:
    rayset: str
    source: str
    L: int
    universe: int

    def to_json(self) -> dict:
        return {"rayset": self.rayset, "source": self.source, "L": self.L,
                "universe": self.universe}

    @classmethod
    def from_json(cls, doc: dict) -> "Provenance":
        return cls(doc["rayset"], doc["source"], doc["L"], doc["universe"])


@dataclass(frozen=True)
class Inequality:
    """``<functional> <= bound(lambda)`` for lambda in ``lambda_interval``."""

    functional: Expression
    bound: BoundEnvelope
    kind: Kind
    lambda_interval: LambdaInterval
    provenance: Provenance

    def bound_at(self, lam) -> Fraction:
        return self.bound(lam)

    def to_json(self) -> dict:
        return {
            "kind": self.kind.value,
            "functional": serialize(self.functional),
            "bound": self.bound.to_json(),
            "lambda_interval": self.lambda_interval.to_json(),
            "provenance": self.provenance.to_json(),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "Inequality":
        prov = Provenance.from_json(doc["provenance"])
        return cls(
            parse_expression(doc["functional"], prov.universe),
            BoundEnvelope.from_json(doc["bound"]),
            Kind(doc["kind"]),
            LambdaInterval.from_json(doc["lambda_interval"]),
            prov,
        )


def relaxed_envelope(bounds: BoundsReport, L: int) -> BoundEnvelope:
    """``max(lam*f + L, lam*f' + L - 1)``, dropping a branch whose class is empty.

    Only the ``lam*f + L`` line is known to be attained (by the KS-obeying
    maximiser of F); the other line carries no witness.
    """
    lines = {}
    if bounds.f is not None:
        lines[Coefficient(bounds.f, L)] = bounds.argmax_ks
    if bounds.f_prime is not None:
        lines.setdefault(Coefficient(bounds.f_prime, L - 1), None)
    return envelope_from_lines(lines)


def assemble_inequality(
    f_tilde: Expression,
    bounds: BoundsReport,
    kind: Kind | str,
    graph: OrthogonalityGraph,
    bases: BasisList,
    provenance: Provenance | None = None,
) -> Inequality:
    kind = Kind(kind)
    if f_tilde.universe != graph.vertex_count:
        raise ProvenanceError("functional and ray set have different sizes")
    if provenance is None:
        provenance = Provenance("", "", bases.L, graph.vertex_count)
    if provenance.L != bases.L or provenance.universe != graph.vertex_count:
        raise ProvenanceError("provenance does not match the ray set")
    interval = select_lambda(bounds.f, bounds.f_prime)
    if kind is Kind.RELAXED:
        env = relaxed_envelope(bounds, bases.L)
    else:
        env = bound_envelope(f_tilde, graph, bases, Restriction.ALL)
    return Inequality(f_tilde, env, kind, interval, provenance)


def specialize(inequality: Inequality, lam=1) -> Inequality:
    """Fix lambda: a lambda-free functional with a constant bound.

    At lambda = 1 the tight inequality on the KCBS pentagon becomes
    ``sum P_i - sum P_i P_{i+1} <= 2``.
    """
    lam = as_fraction(lam)
    value = inequality.bound(lam)
    return Inequality(
        inequality.functional.at_lambda(lam),
        BoundEnvelope((Coefficient(0, value),)),
        inequality.kind,
        LambdaInterval(lam, lam),
        inequality.provenance,
    )


@dataclass(frozen=True)
class Derivation:
    """Everything computed by :func:`derive` for one ray set and source functional."""

    rayset: RaySet
    graph: OrthogonalityGraph
    bases: BasisList
    F: Expression
    f_tilde: Expression
    bounds: BoundsReport
    is_ks: bool
    relaxed: Inequality
    tight: Inequality | None = None


def derive(rayset: RaySet, F: Expression | None = None, tight: bool = False) -> Derivation:
    """Run the whole construction.

    With ``F`` omitted the ray set must be a KS set and the lambda-free
    functional is used, whose bound is ``L - 1``.
    """
    graph, bases = rayset_summary(rayset)
    ks = is_ks_set(graph, bases).is_ks
    if F is None:
        if not ks:
            raise NotAKSSetError(
                "ray set is not a KS set; supply the KS inequality's functional F"
            )
        F = Expression(graph.vertex_count)
        f_tilde = build_ks_set_F_tilde(graph, bases)
        source = "ks-set"
    else:
        f_tilde = build_F_tilde(F, graph, bases)
        source = serialize(F)
    bounds = compute_bounds(F, graph, bases)
    prov = Provenance(rayset.source, source, bases.L, graph.vertex_count)
    relaxed = assemble_inequality(f_tilde, bounds, Kind.RELAXED, graph, bases, prov)
    tight_ineq = (
        assemble_inequality(f_tilde, bounds, Kind.TIGHT, graph, bases, prov) if tight else None
    )
    return Derivation(rayset, graph, bases, F, f_tilde, bounds, ks, relaxed, tight_ineq)
