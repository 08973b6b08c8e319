import itertools
import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import brute_force_automorphisms, random_relabel, small_graphs
from tauttwist.graphs import (GraphError, StableGraph, automorphism_count, canonical_key, canonize,
                              enumerate_stable_graphs, insert_graph_at_vertex, splice, trivial_graph)


def divisor_count(g, n):
    """Codimension-1 strata: one non-separating divisor plus unordered genus/marking splits."""
    count = 1 if g >= 1 else 0
    seen = set()
    for h in range(g + 1):
        for size in range(n + 1):
            for subset in itertools.combinations(range(n), size):
                if 2 * h - 2 + size + 1 <= 0 or 2 * (g - h) - 2 + (n - size) + 1 <= 0:
                    continue
                side = (h, frozenset(subset))
                other = (g - h, frozenset(range(n)) - side[1])
                seen.add(frozenset((side, other)))
    return count + len(seen)


def test_stability_enforced():
    with pytest.raises(GraphError):
        StableGraph((0,), (0, 0), ())
    with pytest.raises(GraphError):
        StableGraph((1, 0), (0,), ((0, 1),))  # genus-0 vertex of valence 1


def test_disconnected_rejected():
    with pytest.raises(GraphError):
        StableGraph((1, 1), (0, 1), ())


def test_basic_invariants():
    g = StableGraph((0, 1), (0, 0, 1), ((0, 1), (0, 0)))
    assert (g.n, g.num_vertices, g.num_edges, g.h1, g.genus) == (3, 2, 2, 1, 2)
    assert g.markings_at(0) == [1, 2]
    assert g.local_points(0) == [("leg", 1), ("leg", 2), ("half", 0, 0), ("half", 1, 0), ("half", 1, 1)]


def test_json_round_trip():
    g = StableGraph((0, 1), (0, 0, 1), ((0, 1), (0, 0)))
    assert StableGraph.from_json(g.to_json()) == g


@pytest.mark.parametrize("g,n", [(0, 3), (0, 4), (0, 5), (1, 1), (1, 2), (1, 3), (2, 0), (2, 1), (2, 2), (3, 0)])
def test_divisor_counts(g, n):
    graphs = enumerate_stable_graphs(g, n, 1)
    assert sum(1 for x in graphs if x.num_edges == 1) == divisor_count(g, n)
    assert sum(1 for x in graphs if x.num_edges == 0) == 1


def test_known_stratum_totals():
    # all strata: M_0,5 has 26, M_1,2 has 5, M_2 has 7
    assert len(enumerate_stable_graphs(0, 5, 2)) == 26
    assert len(enumerate_stable_graphs(1, 2, 2)) == 5
    assert len(enumerate_stable_graphs(2, 0, 3)) == 7


def test_genus1_one_marking():
    graphs = enumerate_stable_graphs(1, 1, 1)
    assert sorted(automorphism_count(x) for x in graphs) == [1, 2]


def test_enumeration_errors():
    with pytest.raises(GraphError):
        enumerate_stable_graphs(0, 2, 1)
    with pytest.raises(GraphError):
        enumerate_stable_graphs(4, 0, 1)
    with pytest.raises(GraphError):
        enumerate_stable_graphs(1, 1, -1)


def test_enumeration_distinct_and_canonical():
    graphs = enumerate_stable_graphs(2, 2, 2)
    keys = [canonical_key(x) for x in graphs]
    assert len(set(keys)) == len(keys)
    assert keys == sorted(keys)


@pytest.mark.parametrize("graph", small_graphs(), ids=str)
def test_automorphisms_brute_force(graph):
    assert automorphism_count(graph) == brute_force_automorphisms(graph)


def test_canonical_form_under_random_relabelings():
    rng = random.Random(1729)
    pool = small_graphs()
    for _ in range(1000):
        graph = rng.choice(pool)
        copy = random_relabel(graph, rng)
        assert canonical_key(copy) == canonical_key(graph)
        assert automorphism_count(copy) == automorphism_count(graph)


@settings(max_examples=60, deadline=None)
@given(st.data())
def test_canonical_form_property(data):
    pool = small_graphs()
    graph = data.draw(st.sampled_from(pool))
    seed = data.draw(st.integers(0, 10 ** 6))
    copy = random_relabel(graph, random.Random(seed))
    assert canonize(copy).key == canonize(graph).key
    # canonical representative is itself a fixed point
    assert canonize(canonize(copy).graph).graph == canonize(graph).graph


def test_half_edge_attributes_break_loop_symmetry():
    loop = StableGraph((1,), (0,), ((0, 0),))
    assert canonize(loop).automorphisms == 2
    assert canonize(loop, hattr=[(0, 1)]).automorphisms == 1
    assert canonize(loop, hattr=[(0, 1)]).key == canonize(loop, hattr=[(1, 0)]).key


def test_splice_glues_boundary():
    outer = StableGraph((0, 1), (0, 0, 0), ((0, 1),))
    inner = StableGraph((0, 0), (0, 0, 1, 1), ((0, 1),))
    new = splice(outer, 0, inner)
    assert new.graph.num_vertices == 3
    assert new.graph.num_edges == 2
    assert new.graph.genus == outer.genus
    outer = StableGraph((0, 1), (0, 0), ((0, 1),))
    assert insert_graph_at_vertex(outer, 0, trivial_graph(0, 3)) == StableGraph((1, 0), (1, 1), ((1, 0),))


def test_splice_rejects_wrong_type():
    outer = StableGraph((0, 1), (0, 0), ((0, 1),))
    with pytest.raises(GraphError):
        splice(outer, 0, trivial_graph(1, 3))
