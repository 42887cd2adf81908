"""Search over 0/1 value assignments.

Two independent routes compute the same maxima:

* :func:`max_over_assignments` -- depth-first branch and bound with unit
  propagation of the KS rules and an optimistic-completion bound;
* :func:`exhaustive_lines` -- vectorised enumeration of all ``2**mu``
  assignments (numpy, exact int64 arithmetic), used as the oracle.

All objective arithmetic is done on integers obtained by clearing the
denominators of the expression's rational coefficients, so results are exact.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Sequence

import numpy as np

from .expression import Assignment, Coefficient, Expression, evaluate_affine, as_fraction
from .rayset import BasisList, OrthogonalityGraph, RaySet, rayset_summary

EXHAUSTIVE_LIMIT = 22


class Restriction(str, Enum):
    ALL = "all"
    KS_OBEYING = "ks_obeying"
    KS_VIOLATING = "ks_violating"


@dataclass(frozen=True)
class KSStatus:
    """Verdict of the KS rules on one assignment.

    Witness indices are 0-based: ``edge_witness`` is a vertex pair, and
    ``basis_witness`` is ``(basis position, number of ones in that basis)``.
    """

    verdict: str
    edge_witness: tuple[int, int] | None = None
    basis_witness: tuple[int, int] | None = None

    @property
    def obeys(self) -> bool:
        return self.verdict == "obeys"

    def to_json(self) -> dict:
        return {
            "verdict": self.verdict,
            "edge_witness": [i + 1 for i in self.edge_witness] if self.edge_witness else None,
            "basis_witness": (
                {"basis": self.basis_witness[0] + 1, "ones": self.basis_witness[1]}
                if self.basis_witness else None
            ),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "KSStatus":
        edge = doc.get("edge_witness")
        basis = doc.get("basis_witness")
        return cls(
            doc["verdict"],
            (edge[0] - 1, edge[1] - 1) if edge else None,
            (basis["basis"] - 1, basis["ones"]) if basis else None,
        )


def check_ks_rules(
    assignment: Sequence[int], graph: OrthogonalityGraph, bases: BasisList
) -> KSStatus:
    if len(assignment) != graph.vertex_count:
        raise ValueError(
            f"assignment has length {len(assignment)}, expected {graph.vertex_count}"
        )
    edge = next(
        ((i, j) for i, j in graph.sorted_edges() if assignment[i] and assignment[j]), None
    )
    basis = None
    for alpha, members in enumerate(bases):
        ones = sum(assignment[k] for k in members)
        if ones != 1:
            basis = (alpha, ones)
            break
    verdict = "violates" if edge or basis else "obeys"
    return KSStatus(verdict, edge, basis)


def _violates(assignment: Sequence[int], graph: OrthogonalityGraph, bases: BasisList) -> bool:
    return not check_ks_rules(assignment, graph, bases).obeys


# -- integer objectives ----------------------------------------------------

@dataclass
class _Objective:
    const: int
    lin: list[int]
    quad: dict[tuple[int, int], int]


def _clear_denominators(values: list[Fraction]) -> int:
    return math.lcm(*(v.denominator for v in values)) if values else 1


def _terms(expr: Expression):
    yield (), expr.constant
    for i, c in expr.linear.items():
        yield (i,), c
    for p, c in expr.quadratic.items():
        yield p, c


def _build_objective(expr: Expression, weight) -> _Objective:
    """Integer objective with ``weight(coefficient)`` per monomial."""
    raw = [(idx, weight(c)) for idx, c in _terms(expr)]
    scale = _clear_denominators([w for _, w in raw])
    obj = _Objective(0, [0] * expr.universe, {})
    for idx, w in raw:
        w = int(w * scale)
        if len(idx) == 0:
            obj.const += w
        elif len(idx) == 1:
            obj.lin[idx[0]] += w
        elif w:
            obj.quad[idx] = w
    return obj


def _lambda_objective(expr: Expression, lam: Fraction) -> _Objective:
    return _build_objective(expr, lambda c: c.value(lam))


def _lex_objective(expr: Expression, slope_first: bool) -> _Objective:
    """Lexicographic (intercept, slope) or (slope, intercept) objective.

    The leading component is multiplied by more than the spread of the
    trailing one, so an integer maximum is a lexicographic maximum.
    """
    coeffs = [c for _, c in _terms(expr)]
    scale = _clear_denominators([c.a for c in coeffs] + [c.b for c in coeffs])
    spread = 2 * sum(abs(int(c.a * scale)) + abs(int(c.b * scale)) for c in coeffs) + 1
    if slope_first:
        return _build_objective(expr, lambda c: (c.a * spread + c.b) * scale)
    return _build_objective(expr, lambda c: (c.b * spread + c.a) * scale)


# -- branch and bound ------------------------------------------------------

@dataclass
class SearchResult:
    best: int | None
    argmax: list[Assignment] = field(default_factory=list)
    nodes: int = 0

    @property
    def feasible(self) -> bool:
        return self.best is not None


class _Search:
    """Maximise an integer quadratic pseudo-Boolean objective over one class.

    Variables are branched in index order, value 0 first, so the first
    maximiser reached is the lexicographically smallest one.
    """

    def __init__(self, obj: _Objective, graph: OrthogonalityGraph, bases: BasisList,
                 restriction: Restriction, collect_ties: bool = False,
                 first_feasible: bool = False):
        self.mu = graph.vertex_count
        self.obj = obj
        self.restriction = Restriction(restriction)
        self.collect_ties = collect_ties
        self.first_feasible = first_feasible
        self.graph = graph
        self.bases = bases
        self.adj = [sorted(s) for s in graph.neighbors()]
        self.qadj: list[list[tuple[int, int]]] = [[] for _ in range(self.mu)]
        for (i, j), w in obj.quad.items():
            self.qadj[i].append((j, w))
            self.qadj[j].append((i, w))
        self.bases_of: list[list[int]] = [[] for _ in range(self.mu)]
        for alpha, members in enumerate(bases):
            for k in members:
                self.bases_of[k].append(alpha)
        # optimistic gain from products with later variables
        obeying = self.restriction is Restriction.KS_OBEYING
        self.pos_after = [0] * self.mu
        for (i, j), w in obj.quad.items():
            if w > 0 and not (obeying and graph.has_edge(i, j)):
                self.pos_after[min(i, j)] += w
        self.result = SearchResult(None)

    def run(self) -> SearchResult:
        state = [-1] * self.mu
        gain = list(self.obj.lin)
        self._dfs(0, state, gain, self.obj.const, False)
        if self.result.best is not None and not self.collect_ties:
            self.result.argmax = self.result.argmax[:1]
        return self.result

    def _set(self, k: int, v: int, state, gain, cur: int, violated: bool):
        """Assign ``x_k = v`` with KS propagation for the obeying class.

        Returns the updated ``(cur, violated)`` or None on a conflict.
        """
        obeying = self.restriction is Restriction.KS_OBEYING
        queue = [(k, v)]
        while queue:
            k, v = queue.pop()
            if state[k] != -1:
                if state[k] != v:
                    return None
                continue
            state[k] = v
            if v == 1:
                cur += gain[k]
                for j, w in self.qadj[k]:
                    gain[j] += w
                for j in self.adj[k]:
                    if state[j] == 1:
                        if obeying:
                            return None
                        violated = True
                    elif obeying and state[j] == -1:
                        queue.append((j, 0))
            if obeying:
                for alpha in self.bases_of[k]:
                    members = self.bases.bases[alpha]
                    ones = sum(1 for m in members if state[m] == 1)
                    free = [m for m in members if state[m] == -1]
                    if ones > 1 or (ones == 0 and not free):
                        return None
                    if ones == 1:
                        queue.extend((m, 0) for m in free)
                    elif len(free) == 1:
                        queue.append((free[0], 1))
        return cur, violated

    def _dfs(self, k: int, state, gain, cur: int, violated: bool):
        res = self.result
        res.nodes += 1
        mu = self.mu
        while k < mu and state[k] != -1:
            k += 1
        if k == mu:
            self._leaf(state, cur, violated)
            return
        if res.best is not None:
            if self.first_feasible:
                return
            bound = cur
            for i in range(k, mu):
                if state[i] == -1:
                    g = gain[i] + self.pos_after[i]
                    if g > 0:
                        bound += g
            if bound < res.best or (bound == res.best and not self.collect_ties):
                return
        for v in (0, 1):
            st, gn = list(state), list(gain)
            out = self._set(k, v, st, gn, cur, violated)
            if out is not None:
                self._dfs(k + 1, st, gn, out[0], out[1])

    def _leaf(self, state, cur: int, violated: bool):
        restriction = self.restriction
        if restriction is not Restriction.ALL:
            bad = violated or _violates(state, self.graph, self.bases)
            if bad != (restriction is Restriction.KS_VIOLATING):
                return
        res = self.result
        if res.best is None or cur > res.best:
            res.best = cur
            res.argmax = [tuple(state)]
        elif cur == res.best and self.collect_ties:
            res.argmax.append(tuple(state))


def _search(expr, graph, bases, restriction, obj, collect_ties=False) -> SearchResult:
    if expr.universe != graph.vertex_count:
        raise ValueError(
            f"expression universe {expr.universe} does not match {graph.vertex_count} rays"
        )
    return _Search(obj, graph, bases, restriction, collect_ties).run()


@dataclass(frozen=True)
class Maximum:
    """Maximum over one assignment class; ``value`` is None if the class is empty."""

    value: Fraction | None
    assignment: Assignment | None

    @property
    def feasible(self) -> bool:
        return self.value is not None


def max_over_assignments(
    expr: Expression,
    graph: OrthogonalityGraph,
    bases: BasisList,
    restriction: Restriction | str = Restriction.ALL,
    lam=0,
) -> Maximum:
    """Exact maximum of ``expr`` at fixed lambda over a class of assignments.

    Ties go to the lexicographically smallest assignment.
    """
    lam = as_fraction(lam)
    res = _search(expr, graph, bases, restriction, _lambda_objective(expr, lam))
    if not res.feasible:
        return Maximum(None, None)
    a = res.argmax[0]
    return Maximum(evaluate_affine(expr, a).value(lam), a)


@dataclass(frozen=True)
class KSSetResult:
    """Outcome of the KS-set test.

    ``assignment`` is an obeying assignment when one exists.  Otherwise the
    search space was exhausted; ``nodes`` counts the search nodes visited.
    """

    is_ks: bool
    assignment: Assignment | None
    nodes: int

    def to_json(self) -> dict:
        return {
            "is_ks": self.is_ks,
            "certificate": (
                {"kind": "exhaustion", "nodes": self.nodes} if self.is_ks
                else {"kind": "assignment", "assignment": list(self.assignment)}
            ),
        }

    @classmethod
    def from_json(cls, doc: dict) -> "KSSetResult":
        cert = doc["certificate"]
        if doc["is_ks"]:
            return cls(True, None, cert["nodes"])
        return cls(False, tuple(cert["assignment"]), 0)


def is_ks_set(graph: OrthogonalityGraph | RaySet, bases: BasisList | None = None) -> KSSetResult:
    """True iff no 0/1 assignment obeys the KS rules."""
    if isinstance(graph, RaySet):
        graph, bases = rayset_summary(graph)
    obj = _Objective(0, [0] * graph.vertex_count, {})
    search = _Search(obj, graph, bases, Restriction.KS_OBEYING, first_feasible=True)
    res = search.run()
    if res.feasible:
        return KSSetResult(False, res.argmax[0], res.nodes)
    return KSSetResult(True, None, res.nodes)


# -- bounds f and f' -------------------------------------------------------

@dataclass(frozen=True)
class BoundsReport:
    f: Fraction | None
    f_prime: Fraction | None
    argmax_ks: Assignment | None = None
    argmax_exks: Assignment | None = None

    def to_json(self) -> dict:
        from .expression import fraction_to_json

        def q(v):
            return fraction_to_json(v) if v is not None else "infeasible"

        return {
            "f": q(self.f),
            "f_prime": q(self.f_prime),
            "argmax_ks": list(self.argmax_ks) if self.argmax_ks else None,
            "argmax_exks": list(self.argmax_exks) if self.argmax_exks else None,
        }

    @classmethod
    def from_json(cls, doc: dict) -> "BoundsReport":
        from .expression import fraction_from_json

        def q(v):
            return None if v == "infeasible" else fraction_from_json(v)

        def a(v):
            return tuple(v) if v is not None else None

        return cls(q(doc["f"]), q(doc["f_prime"]), a(doc["argmax_ks"]), a(doc["argmax_exks"]))


def compute_bounds(expr: Expression, graph: OrthogonalityGraph, bases: BasisList, lam=0) -> BoundsReport:
    """``f`` over KS-obeying and ``f'`` over KS-violating assignments."""
    ks = max_over_assignments(expr, graph, bases, Restriction.KS_OBEYING, lam)
    exks = max_over_assignments(expr, graph, bases, Restriction.KS_VIOLATING, lam)
    return BoundsReport(ks.value, exks.value, ks.assignment, exks.assignment)


# -- envelopes -------------------------------------------------------------

def _line_key(c: Coefficient):
    return (c.a, c.b)


def prune_lines(lines: Sequence[Coefficient], lam_max=None) -> list[Coefficient]:
    """Lines that reach the upper envelope somewhere on ``(0, lam_max]``.

    A line touching the envelope at a single point is kept.  The result is
    sorted by slope, then intercept.
    """
    uniq = sorted(set(lines), key=_line_key)
    hi_limit = as_fraction(lam_max) if lam_max is not None else None
    kept = []
    for l in uniq:
        lo, lo_open = Fraction(0), True
        hi, hi_open = hi_limit, False
        ok = True
        for m in uniq:
            if m == l:
                continue
            da, db = l.a - m.a, m.b - l.b
            if da == 0:
                if db > 0:
                    ok = False
                    break
            elif da > 0:
                t = db / da
                # lambda > 0 stays open; any positive lower bound is closed
                if t > lo:
                    lo, lo_open = t, False
            else:
                t = db / da
                if hi is None or t < hi:
                    hi, hi_open = t, False
        if not ok:
            continue
        if hi is None or lo < hi or (lo == hi and not lo_open and not hi_open):
            kept.append(l)
    return kept


@dataclass(frozen=True)
class BoundEnvelope:
    """Upper envelope ``max_k (a_k * lambda + b_k)``; no lines means infeasible."""

    lines: tuple[Coefficient, ...]
    witnesses: tuple[Assignment | None, ...] = ()

    @property
    def feasible(self) -> bool:
        return bool(self.lines)

    def __call__(self, lam) -> Fraction:
        if not self.lines:
            raise ValueError("envelope of an empty assignment class")
        lam = as_fraction(lam)
        return max(c.value(lam) for c in self.lines)

    def breakpoints(self) -> list[Fraction]:
        """Positive lambdas where the maximising line changes."""
        pts = set()
        ls = self.lines
        for i in range(len(ls)):
            for j in range(i + 1, len(ls)):
                if ls[i].a != ls[j].a:
                    t = (ls[j].b - ls[i].b) / (ls[i].a - ls[j].a)
                    if t > 0 and ls[i].value(t) == self(t):
                        pts.add(t)
        return sorted(pts)

    def to_json(self) -> dict:
        from .expression import fraction_to_json

        return {
            "lines": [
                {"slope": fraction_to_json(c.a), "intercept": fraction_to_json(c.b)}
                for c in self.lines
            ],
            "witnesses": [list(w) if w is not None else None for w in self.witnesses],
        }

    @classmethod
    def from_json(cls, doc: dict) -> "BoundEnvelope":
        from .expression import fraction_from_json

        lines = tuple(
            Coefficient(fraction_from_json(d["slope"]), fraction_from_json(d["intercept"]))
            for d in doc["lines"]
        )
        wits = tuple(tuple(w) if w is not None else None for w in doc.get("witnesses", ()))
        return cls(lines, wits)


def envelope_from_lines(lines: dict[Coefficient, Assignment | None], lam_max=None) -> BoundEnvelope:
    kept = prune_lines(list(lines), lam_max)
    return BoundEnvelope(tuple(kept), tuple(lines[c] for c in kept))


def bound_envelope(
    expr: Expression,
    graph: OrthogonalityGraph,
    bases: BasisList,
    restriction: Restriction | str = Restriction.ALL,
) -> BoundEnvelope:
    """Upper envelope over lambda in (0, inf) of ``expr`` on an assignment class.

    Parametric search: the maximisers as lambda -> 0+ and lambda -> inf give
    the outermost lines; each pair of adjacent lines is split by querying the
    maximum where they cross, until every crossing lies on the envelope.
    Lines through a crossing point are all collected.
    """
    found: dict[Coefficient, Assignment] = {}

    def line_of(a: Assignment) -> Coefficient:
        c = evaluate_affine(expr, a)
        if c not in found or a < found[c]:
            found[c] = a
        return c

    left = _search(expr, graph, bases, restriction, _lex_objective(expr, slope_first=False))
    if not left.feasible:
        return BoundEnvelope(())
    right = _search(expr, graph, bases, restriction, _lex_objective(expr, slope_first=True))
    l0 = line_of(left.argmax[0])
    l1 = line_of(right.argmax[0])

    stack = [(l0, l1)]
    while stack:
        lo, hi = stack.pop()
        if lo == hi or lo.a >= hi.a:
            continue
        t = (lo.b - hi.b) / (hi.a - lo.a)
        res = _search(expr, graph, bases, restriction, _lambda_objective(expr, t),
                      collect_ties=True)
        ties = [line_of(a) for a in res.argmax]
        top = max(c.value(t) for c in ties)
        if top > lo.value(t):
            mid = max(ties, key=_line_key)
            stack += [(lo, mid), (mid, hi)]
    return envelope_from_lines(found)


# -- exhaustive oracle -----------------------------------------------------

def _all_assignments(mu: int) -> np.ndarray:
    """Rows in lexicographic order (first ray is the most significant bit)."""
    idx = np.arange(2**mu, dtype=np.int64)
    shifts = np.arange(mu - 1, -1, -1, dtype=np.int64)
    return ((idx[:, None] >> shifts) & 1).astype(np.int8)


def _class_mask(x: np.ndarray, graph: OrthogonalityGraph, bases: BasisList,
                restriction: Restriction) -> np.ndarray:
    if restriction is Restriction.ALL:
        return np.ones(len(x), dtype=bool)
    violated = np.zeros(len(x), dtype=bool)
    for i, j in graph.edges:
        violated |= (x[:, i] & x[:, j]).astype(bool)
    for members in bases:
        violated |= x[:, list(members)].sum(axis=1, dtype=np.int64) != 1
    return violated if restriction is Restriction.KS_VIOLATING else ~violated


def _vector_values(x: np.ndarray, obj: _Objective) -> np.ndarray:
    vals = np.full(len(x), obj.const, dtype=np.int64)
    vals += x.astype(np.int64) @ np.array(obj.lin, dtype=np.int64)
    for (i, j), w in obj.quad.items():
        vals += w * (x[:, i] & x[:, j]).astype(np.int64)
    return vals


def exhaustive_lines(
    expr: Expression,
    graph: OrthogonalityGraph,
    bases: BasisList,
    restriction: Restriction | str = Restriction.ALL,
) -> dict[Coefficient, Assignment]:
    """Every distinct (slope, intercept) realised on the class, by full enumeration.

    Each line maps to the lexicographically smallest assignment realising it.
    """
    restriction = Restriction(restriction)
    mu = graph.vertex_count
    if mu > EXHAUSTIVE_LIMIT:
        raise ValueError(f"exhaustive enumeration limited to {EXHAUSTIVE_LIMIT} rays")
    if expr.universe != mu:
        raise ValueError(f"expression universe {expr.universe} does not match {mu} rays")
    coeffs = [c for _, c in _terms(expr)]
    scale = _clear_denominators([c.a for c in coeffs] + [c.b for c in coeffs])
    slope_obj = _build_objective(expr, lambda c: c.a * scale)
    icpt_obj = _build_objective(expr, lambda c: c.b * scale)
    # _build_objective re-clears denominators; these are already integers
    x = _all_assignments(mu)
    keep = np.flatnonzero(_class_mask(x, graph, bases, restriction))
    if keep.size == 0:
        return {}
    x = x[keep]
    pairs = np.stack([_vector_values(x, slope_obj), _vector_values(x, icpt_obj)], axis=1)
    uniq, first = np.unique(pairs, axis=0, return_index=True)
    out = {}
    for (s, b), row in zip(uniq.tolist(), first.tolist()):
        out[Coefficient(Fraction(s, scale), Fraction(b, scale))] = tuple(int(v) for v in x[row])
    return dict(sorted(out.items(), key=lambda kv: _line_key(kv[0])))


def exhaustive_max(
    expr: Expression,
    graph: OrthogonalityGraph,
    bases: BasisList,
    restriction: Restriction | str = Restriction.ALL,
    lam=0,
) -> Maximum:
    lam = as_fraction(lam)
    lines = exhaustive_lines(expr, graph, bases, restriction)
    if not lines:
        return Maximum(None, None)
    best = max(c.value(lam) for c in lines)
    arg = min(a for c, a in lines.items() if c.value(lam) == best)
    return Maximum(best, arg)


def exhaustive_envelope(expr, graph, bases, restriction=Restriction.ALL) -> BoundEnvelope:
    return envelope_from_lines(exhaustive_lines(expr, graph, bases, restriction))
