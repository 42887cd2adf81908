import itertools
import random
from fractions import Fraction

import pytest

from ksineq.classical import (
    BoundsReport,
    compute_bounds,
    check_ks_rules,
    exhaustive_lines,
)
from ksineq.conversion import (
    Inequality,
    Kind,
    LambdaInterval,
    NotAKSSetError,
    ProvenanceError,
    Provenance,
    assemble_inequality,
    basis_term,
    build_F_tilde,
    build_ks_set_F_tilde,
    derive,
    select_lambda,
    specialize,
)
from ksineq.expression import Coefficient, Expression, ExpressionError, evaluate, parse_expression
from ksineq.rayset import BasisList, OrthogonalityGraph, load_rayset

from oracles import obeys_ks, random_expression, random_graph_instance

FUNCTIONALS = {"kcbs-5": "P1+P2+P3+P4+P5", "yu-oh-13": "P1+P2+P3+P4", "cabello-18": None}


def _handmade_F_tilde(F, graph, bases, a, lam):
    """Value of the derived functional computed term by term from its definition."""
    value = lam * evaluate(F, a)
    value -= sum(a[i] * a[j] for i, j in graph.edges)
    for b in bases:
        value += sum(a[k] for k in b) - 2 * sum(a[i] * a[j] for i, j in itertools.combinations(b, 2))
    return value


def test_yu_oh_F_tilde_term_by_term(yu_oh):
    _, graph, bases = yu_oh
    F = parse_expression("P1+P2+P3+P4", 13)
    ft = build_F_tilde(F, graph, bases)
    # 4 lambda-linear terms, 9 unit linear terms from the bases; pairs inside a
    # basis carry -1 - 2 = -3, the other 12 edges carry -1
    assert {i: c for i, c in ft.linear.items() if c.a} == {i: Coefficient(1, 0) for i in range(4)}
    assert sorted(i for i, c in ft.linear.items() if c.b) == [4, 5, 6, 7, 8, 9, 10, 11, 12]
    in_basis = {p for b in bases for p in itertools.combinations(b, 2)}
    assert len(in_basis) == 12
    for e in graph.edges:
        assert ft.quadratic[e] == Coefficient(0, -3 if e in in_basis else -1)
    rng = random.Random(3)
    for _ in range(200):
        a = tuple(rng.randint(0, 1) for _ in range(13))
        lam = Fraction(rng.randint(1, 5), rng.randint(1, 5))
        assert evaluate(ft, a, lam) == _handmade_F_tilde(F, graph, bases, a, lam)


def test_kcbs_F_tilde(kcbs):
    _, graph, bases = kcbs
    ft = build_F_tilde(parse_expression("P1+P2+P3+P4+P5", 5), graph, bases)
    assert str(ft) == "L*P1+L*P2+L*P3+L*P4+L*P5-P1*P2-P1*P5-P2*P3-P3*P4-P4*P5"


def test_empty_graph_F_tilde():
    g = OrthogonalityGraph(3, frozenset())
    ft = build_F_tilde(parse_expression("P1-P3", 3), g, BasisList(()))
    assert str(ft) == "L*P1-L*P3"


def test_cabello_F_tilde(cabello):
    _, graph, bases = cabello
    ft = build_ks_set_F_tilde(graph, bases)
    assert ft.is_lambda_free
    # every ray lies in exactly two bases
    assert all(c == Coefficient(0, 2) for c in ft.linear.values()) and len(ft.linear) == 18


def test_F_tilde_input_checks(kcbs, yu_oh):
    _, graph, bases = kcbs
    with pytest.raises(ExpressionError):
        build_F_tilde(parse_expression("P1", 4), graph, bases)
    with pytest.raises(ExpressionError):
        build_F_tilde(parse_expression("L*P1", 5), graph, bases)
    with pytest.raises(ExpressionError):
        build_F_tilde(parse_expression("P1*P3", 5), graph, bases)
    with pytest.raises(NotAKSSetError):
        build_ks_set_F_tilde(yu_oh[1], yu_oh[2])
    with pytest.raises(NotAKSSetError):
        derive(load_rayset("kcbs-5"))


def test_basis_lemma_exhaustive():
    for n in range(1, 6):
        term = basis_term(tuple(range(n)), n)
        for a in itertools.product((0, 1), repeat=n):
            x = sum(a)
            assert evaluate(term, a) == x * (2 - x)


@pytest.mark.parametrize("f, fp, upper, default", [
    (2, 5, Fraction(1, 3), Fraction(1, 3)),
    (1, 4, Fraction(1, 3), Fraction(1, 3)),
    (3, 3, None, 1),
    (4, 1, None, 1),
    (None, 0, None, 1),
    (2, None, None, 1),
])
def test_select_lambda(f, fp, upper, default):
    iv = select_lambda(f, fp)
    assert iv.upper == upper and iv.default_choice == default
    assert LambdaInterval.from_json(iv.to_json()) == iv
    assert not iv.contains(0)
    if upper is not None:
        assert iv.contains(upper) and not iv.contains(upper + Fraction(1, 10**9))


def test_select_lambda_needs_a_class():
    with pytest.raises(ValueError):
        select_lambda(None, None)


def test_lambda_guarantee_kcbs():
    # inside the interval the relaxed bound equals lam*f + L, so exceeding it
    # means exceeding f; just past the upper end the f' line takes over
    iv = select_lambda(2, 5)
    for lam in (Fraction(1, 10), Fraction(1, 4), iv.upper):
        assert max(2 * lam, 5 * lam - 1) == 2 * lam
    lam = iv.upper + Fraction(1, 100)
    assert 5 * lam - 1 > 2 * lam


def _derivation(name):
    rs = load_rayset(name)
    text = FUNCTIONALS[name]
    F = parse_expression(text, len(rs.rays)) if text else None
    return derive(rs, F, tight=True)


def test_kcbs_derivation():
    d = _derivation("kcbs-5")
    assert (d.bounds.f, d.bounds.f_prime) == (2, 5)
    assert d.relaxed.lambda_interval.upper == Fraction(1, 3)
    assert set(d.relaxed.bound.lines) == {Coefficient(2, 0), Coefficient(5, -1)}
    assert set(d.tight.bound.lines) == {Coefficient(2, 0), Coefficient(3, -1),
                                        Coefficient(4, -3), Coefficient(5, -5)}
    assert d.tight.bound(1) == 2
    assert d.tight.lambda_interval == d.relaxed.lambda_interval


def test_yu_oh_derivation():
    d = _derivation("yu-oh-13")
    assert d.bases.L == 4 and (d.bounds.f, d.bounds.f_prime) == (1, 4)
    for lam in (Fraction(1, 10), Fraction(1, 3)):
        assert d.relaxed.bound(lam) == 4 + lam
    assert set(d.tight.bound.lines) == {Coefficient(1, 4), Coefficient(4, 2)}


def test_cabello_derivation():
    d = _derivation("cabello-18")
    assert d.is_ks and d.bounds.f is None
    assert d.relaxed.bound.lines == (Coefficient(0, 8),)
    assert d.tight.bound.lines == (Coefficient(0, 8),)
    assert d.relaxed.provenance.source == "ks-set"


@pytest.mark.parametrize("name", ["kcbs-5", "yu-oh-13"])
def test_soundness_over_lambda_grid(name):
    d = _derivation(name)
    lines_all = exhaustive_lines(d.f_tilde, d.graph, d.bases)
    for k in range(1, 26):
        lam = Fraction(k, 10)
        top = max(c.value(lam) for c in lines_all)
        assert top <= d.relaxed.bound(lam)
        assert top == d.tight.bound(lam)
        assert d.tight.bound(lam) <= d.relaxed.bound(lam)


@pytest.mark.parametrize("name", ["kcbs-5", "yu-oh-13", "cabello-18"])
def test_tight_witnesses_attain(name):
    d = _derivation(name)
    for line, wit in zip(d.tight.bound.lines, d.tight.bound.witnesses):
        assert wit is not None
        for lam in (1, 2):
            assert evaluate(d.f_tilde, wit, lam) == line.value(lam)


def test_relaxed_witness_obeys():
    d = _derivation("kcbs-5")
    wit = d.relaxed.bound.witnesses[list(d.relaxed.bound.lines).index(Coefficient(2, 0))]
    assert check_ks_rules(wit, d.graph, d.bases).obeys


@pytest.mark.parametrize("seed", range(15))
def test_random_graph_soundness(seed):
    rng = random.Random(500 + seed)
    graph, bases = random_graph_instance(rng, rng.randint(2, 10), rng.randint(1, 3))
    F = random_expression(rng, graph, with_lambda=False)
    ft = build_F_tilde(F, graph, bases)
    rep = compute_bounds(F, graph, bases)
    ineq = assemble_inequality(ft, rep, "relaxed", graph, bases)
    edges, bl = list(graph.edges), list(bases)
    for lam in (Fraction(1, 3), 1, Fraction(7, 2)):
        for a in itertools.product((0, 1), repeat=graph.vertex_count):
            v = evaluate(ft, a, lam)
            assert v <= ineq.bound(lam)
            if obeys_ks(a, edges, bl):
                assert v == lam * evaluate(F, a) + bases.L


def test_specialize_kcbs():
    d = _derivation("kcbs-5")
    s1 = specialize(d.tight, 1)
    assert s1.bound(1) == 2 and s1.functional.is_lambda_free
    assert str(s1.functional) == "P1+P2+P3+P4+P5-P1*P2-P1*P5-P2*P3-P3*P4-P4*P5"
    assert specialize(d.tight, Fraction(1, 3)).bound(0) == Fraction(2, 3)
    tiny = specialize(d.relaxed, Fraction(1, 10**6)).bound(0)
    assert 0 < tiny < Fraction(1, 10**5)


def test_inequality_json_roundtrip():
    for name in FUNCTIONALS:
        d = _derivation(name)
        for ineq in (d.relaxed, d.tight):
            assert Inequality.from_json(ineq.to_json()) == ineq


def test_provenance_mismatch(kcbs):
    _, graph, bases = kcbs
    ft = build_F_tilde(parse_expression("P1", 5), graph, bases)
    rep = BoundsReport(Fraction(1), Fraction(1), None, None)
    with pytest.raises(ProvenanceError):
        assemble_inequality(ft, rep, Kind.RELAXED, graph, bases, Provenance("x", "P1", 3, 5))
    with pytest.raises(ProvenanceError):
        assemble_inequality(Expression(4), rep, Kind.RELAXED, graph, bases)
