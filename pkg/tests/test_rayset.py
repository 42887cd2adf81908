import itertools
import json
import math

import numpy as np
import pytest

from ksineq.rayset import (
    OrthogonalityGraph,
    RaySetError,
    build_orthogonality_graph,
    enumerate_bases,
    load_rayset,
    rayset_from_json,
    rayset_summary,
)

from oracles import random_graph_instance

# Yu-Oh rays scaled to integers, in P1..P13 order; orthogonality is exact here.
YU_OH_INT = [
    (1, 1, 1), (-1, 1, 1), (1, -1, 1), (1, 1, -1),
    (0, 1, 0), (1, 0, 1), (1, 0, -1),
    (0, 0, 1), (1, 1, 0), (1, -1, 0),
    (1, 0, 0), (0, 1, 1), (0, 1, -1),
]


def test_kcbs_graph_is_pentagon(kcbs):
    _, graph, _ = kcbs
    assert graph.sorted_edges() == [(0, 1), (0, 4), (1, 2), (2, 3), (3, 4)]


def test_single_ray_graph():
    rs = rayset_from_json({"dim": 2, "rays": [{"name": "a", "v": [1, 0]}]})
    graph = build_orthogonality_graph(rs)
    assert graph.vertex_count == 1
    assert graph.edges == frozenset()


def test_yu_oh_edges_match_exact_dot_products(yu_oh):
    _, graph, _ = yu_oh
    expected = {
        (i, j)
        for i, j in itertools.combinations(range(13), 2)
        if sum(x * y for x, y in zip(YU_OH_INT[i], YU_OH_INT[j])) == 0
    }
    assert set(graph.edges) == expected
    assert len(expected) == 24


def test_yu_oh_vectors(yu_oh):
    rs, _, _ = yu_oh
    names = [r.name for r in rs.rays]
    assert names == ["h0", "h1", "h2", "h3", "z2", "y2+", "y2-", "z3", "y3+", "y3-",
                     "z1", "y1+", "y1-"]
    for ray, ints in zip(rs.rays, YU_OH_INT):
        v = np.array(ints, dtype=float)
        assert np.allclose(ray.vector.real, v / np.linalg.norm(v), atol=1e-15)
    z1 = rs.rays[10].vector.real
    assert np.allclose(z1, [1, 0, 0])
    h1 = rs.rays[1].vector.real
    assert np.allclose(h1, np.array([-1, 1, 1]) / math.sqrt(3))


def test_kcbs_vectors(kcbs):
    rs, _, _ = kcbs
    c = math.cos(math.pi / 5)
    for ray in rs.rays:
        assert abs(ray.vector[2].real ** 2 - c / (1 + c)) < 1e-14
        assert abs(np.linalg.norm(ray.vector) - 1) < 1e-12


@pytest.mark.parametrize("name, L", [("kcbs-5", 0), ("yu-oh-13", 4), ("cabello-18", 9)])
def test_corpus_basis_counts(corpus_sets, name, L):
    assert corpus_sets[name][2].L == L


def test_yu_oh_bases_are_the_four_triples(yu_oh):
    _, _, bases = yu_oh
    assert {tuple(b) for b in bases.one_based()} == {
        (5, 6, 7), (8, 9, 10), (11, 12, 13), (5, 8, 11)
    }
    assert list(bases.bases) == sorted(bases.bases)


def _brute_cliques(graph, n):
    return sorted(
        c for c in itertools.combinations(range(graph.vertex_count), n)
        if all(graph.has_edge(i, j) for i, j in itertools.combinations(c, 2))
    )


@pytest.mark.parametrize("name", ["kcbs-5", "yu-oh-13", "cabello-18"])
def test_bases_match_subset_scan(corpus_sets, name):
    rs, graph, bases = corpus_sets[name]
    assert list(bases.bases) == _brute_cliques(graph, rs.dim)


def test_cabello_has_nine_bases_by_subset_scan(cabello):
    _, graph, _ = cabello
    assert len(_brute_cliques(graph, 4)) == 9


@pytest.mark.parametrize("seed", range(20))
def test_clique_enumeration_random_graphs(seed):
    import random

    rng = random.Random(seed)
    mu = rng.randint(1, 20)
    n = rng.randint(1, 4)
    graph, _ = random_graph_instance(rng, mu, n)
    found = enumerate_bases(graph, n)
    assert list(found.bases) == _brute_cliques(graph, n)
    for b in found:
        assert all(graph.has_edge(i, j) for i, j in itertools.combinations(b, 2))


@pytest.mark.parametrize("name", ["kcbs-5", "yu-oh-13", "cabello-18"])
def test_graph_symmetry(corpus_sets, name):
    _, graph, _ = corpus_sets[name]
    assert all(i != j for i, j in graph.edges)
    for i in range(graph.vertex_count):
        for j in range(graph.vertex_count):
            if i != j:
                assert graph.has_edge(i, j) == graph.has_edge(j, i)


@pytest.mark.parametrize("name", ["kcbs-5", "yu-oh-13", "cabello-18"])
def test_serialize_reload_idempotent(corpus_sets, name, tmp_path):
    rs, graph, bases = corpus_sets[name]
    path = tmp_path / "rs.json"
    path.write_text(json.dumps(rs.to_json()))
    again = load_rayset(path)
    g2, b2 = rayset_summary(again)
    assert g2 == graph
    assert b2 == bases


def test_graph_only_roundtrip(tmp_path):
    doc = {"dim": 3, "graph": {"vertices": 5, "edges": [[1, 2], [2, 3], [3, 4], [4, 5], [5, 1]]}}
    rs = rayset_from_json(doc)
    assert not rs.has_vectors
    graph, bases = rayset_summary(rs)
    assert len(graph.edges) == 5 and bases.L == 0
    path = tmp_path / "g.json"
    path.write_text(json.dumps(rs.to_json()))
    assert rayset_summary(load_rayset(path))[0] == graph


def test_parallel_rays_rejected():
    doc = {"dim": 3, "rays": [{"name": "a", "v": [1, 0, 0]}, {"name": "b", "v": [-2, 0, 0]}]}
    with pytest.raises(RaySetError, match="parallel"):
        rayset_from_json(doc)


def test_parallel_up_to_complex_phase_rejected():
    doc = {"dim": 2, "rays": [{"v": [1, 0]}, {"v": [[0, 1], 0]}]}
    with pytest.raises(RaySetError, match="parallel"):
        rayset_from_json(doc)


def test_zero_ray_rejected():
    with pytest.raises(RaySetError, match="zero"):
        rayset_from_json({"dim": 2, "rays": [{"v": [0, 0]}]})


def test_dimension_mismatch_rejected():
    with pytest.raises(RaySetError, match="dimension"):
        rayset_from_json({"dim": 3, "rays": [{"v": [1, 0]}]})


@pytest.mark.parametrize("doc", [
    {},
    {"dim": 0, "rays": [{"v": [1]}]},
    {"dim": 2},
    {"dim": 2, "rays": []},
    {"dim": 2, "rays": [{"v": ["x", 1]}]},
    {"dim": 2, "graph": {"vertices": 2, "edges": [[1, 1]]}},
    {"dim": 2, "graph": {"vertices": 2, "edges": [[1, 3]]}},
])
def test_malformed_documents(doc):
    with pytest.raises(RaySetError):
        rayset_from_json(doc)


def test_malformed_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(RaySetError):
        load_rayset(path)


def test_unknown_source():
    with pytest.raises(RaySetError):
        load_rayset("no-such-corpus-entry")


def test_tolerance_override_changes_graph():
    # rays at 89.99 degrees: orthogonal only with a loose tolerance
    eps = math.cos(math.radians(89.99))
    doc = {"dim": 2, "rays": [{"v": [1, 0]}, {"v": [eps, math.sqrt(1 - eps**2)]}]}
    assert rayset_summary(rayset_from_json(doc))[0].edges == frozenset()
    loose = rayset_from_json(doc, tolerance=1e-3)
    assert rayset_summary(loose)[0].edges == frozenset({(0, 1)})


def test_complex_rays_orthogonality():
    doc = {"dim": 2, "rays": [{"v": [1, [0, 1]]}, {"v": [1, [0, -1]]}]}
    rs = rayset_from_json(doc)
    graph, bases = rayset_summary(rs)
    assert graph.edges == frozenset({(0, 1)})
    assert bases.bases == ((0, 1),)


def test_graph_rejects_bad_edge():
    with pytest.raises(RaySetError):
        OrthogonalityGraph(3, frozenset({(2, 1)}))
