from __future__ import annotations

import json
import math

import pytest
from hypothesis import given
from hypothesis import strategies as st

from clusterkit import graphs as G
from clusterkit.graphs import ColoredGraph, GraphClass


def random_graph(draw_whites=st.integers(1, 3), draw_blacks=st.integers(0, 3)):
    @st.composite
    def build(draw):
        n, k = draw(draw_whites), draw(draw_blacks)
        if n + k < 2:
            k = 1
        mask = draw(st.integers(0, (1 << math.comb(n + k, 2)) - 1))
        return ColoredGraph(n, k, mask)

    return build()


@pytest.mark.parametrize("n,k,cls,expected", [
    (2, 1, "two", 1), (2, 1, "af", 2), (2, 0, "af", 1), (2, 0, "two", 1),
    (4, 0, "conn", 38), (3, 0, "conn", 4), (1, 2, "two", 1),
])
def test_small_counts(n, k, cls, expected):
    assert G.count_graphs(n, k, cls) == expected


@pytest.mark.parametrize("k,af,two", [(0, 1, 1), (1, 2, 1), (2, 16, 10), (3, 328, 238)])
def test_two_white_counts(k, af, two):
    assert G.count_graphs(2, k, GraphClass.ARTICULATION_FREE) == af
    assert G.count_graphs(2, k, GraphClass.TWO_CONNECTED) == two


@pytest.mark.parametrize("n,k", [(1, 3), (2, 2), (3, 1), (2, 3), (3, 2)])
def test_counts_match_networkx(n, k, nx_counts):
    want = nx_counts(n, k)
    for cls in GraphClass:
        assert G.count_graphs(n, k, cls) == want[cls.value]


def test_connected_counts_oeis():
    # labeled connected graphs on n nodes: 1, 1, 4, 38, 728, 26704
    assert [G.count_graphs(n, 0, "conn") for n in range(2, 7)] == [1, 4, 38, 728, 26704]


def test_enumeration_is_sorted_and_unique():
    masks = [g.mask for g in G.enumerate_graphs(2, 2, "af")]
    assert masks == sorted(set(masks))


def test_cap():
    with pytest.raises(G.SizeLimitError):
        G.count_graphs(2, 8, "af")
    assert G.count_graphs(2, 2, "af", max_vertices=4) == 16
    with pytest.raises(G.GraphDomainError):
        G.count_graphs(0, 3, "af")


def test_path_is_nodal():
    g = ColoredGraph.from_edges(2, 1, [(1, 3), (2, 3)])
    cut, art, nodal = G.classify_vertices(g)
    assert cut == nodal == {3} and not art
    assert G.graph_in_class(g, "af") and not G.graph_in_class(g, "two")


def test_pendant_black_is_articulation():
    g = ColoredGraph.from_edges(2, 1, [(1, 2), (2, 3)])
    _, art, nodal = G.classify_vertices(g)
    assert art == {2} and not nodal


def test_white_cutpoint_separating_and_hanging():
    # 2 separates whites 1 and 3 and also carries a black pendant 4
    g = ColoredGraph.from_edges(3, 1, [(1, 2), (2, 3), (2, 4)])
    cut, art, nodal = G.classify_vertices(g)
    assert art == {2} and not nodal
    assert G.separates_whites(g, 2)


@given(random_graph())
def test_classification_partition(g):
    if not g.is_connected():
        with pytest.raises(G.GraphDomainError):
            G.classify_vertices(g)
        return
    cut, art, nodal = G.classify_vertices(g)
    assert art | nodal == cut and not art & nodal
    for v in nodal:
        assert G.separates_whites(g, v)


@given(random_graph())
def test_class_inclusions(g):
    two = G.graph_in_class(g, "two")
    af = G.graph_in_class(g, "af")
    conn = G.graph_in_class(g, "conn")
    assert (not two or af) and (not af or conn)


@given(random_graph())
def test_json_round_trip(g):
    assert ColoredGraph.from_dict(json.loads(json.dumps(g.to_dict()))) == g
    assert G.graphs_from_json(G.graphs_to_json([g])) == [g]


def test_from_edges_rejects_bad_input():
    with pytest.raises(ValueError):
        ColoredGraph.from_edges(2, 1, [(1, 1)])
    with pytest.raises(ValueError):
        ColoredGraph.from_edges(2, 1, [(1, 4)])


@pytest.mark.parametrize("n,k,cls", [(2, 2, "af"), (2, 3, "two"), (1, 3, "conn"), (3, 2, "af")])
def test_iso_multiplicities_sum_to_count(n, k, cls):
    reps = G.class_iso(n, k, cls)
    assert sum(m for _, m in reps) == G.count_graphs(n, k, cls)
    assert all(math.factorial(k) % m == 0 for _, m in reps)  # orbit sizes divide k!


@given(random_graph(draw_blacks=st.integers(1, 3)), st.randoms())
def test_canonical_mask_invariant_under_black_relabeling(g, rnd):
    blacks = list(range(g.n_white + 1, g.n_vertices + 1))
    perm = blacks[:]
    rnd.shuffle(perm)
    relabel = dict(zip(blacks, perm))
    h = ColoredGraph.from_edges(g.n_white, g.n_black,
                                [(relabel.get(i, i), relabel.get(j, j)) for i, j in g.edges])
    assert G.canonical_mask(g) == G.canonical_mask(h)


def test_census_rows():
    rows = G.census(4, whites=(2,))
    got = {(r["class"], r["k"]): r["count"] for r in rows}
    assert got[("af", 2)] == 16 and got[("two", 2)] == 10
    assert G.census_csv(rows).splitlines()[0] == "class,n,k,count"


# cancellation ---------------------------------------------------------------


def test_ursell_coefficients():
    assert G.ursell_coefficient(frozenset(), 1) == 1
    assert G.ursell_coefficient(frozenset({(0, 1)}), 2) == -1
    tri = frozenset({(0, 1), (0, 2), (1, 2)})
    assert G.ursell_coefficient(tri, 3) == 2  # (-1)^{n-1} (n-1)! on complete overlap


@pytest.mark.parametrize("nv", [2, 3, 4, 5])
def test_cancellation_small_exhaustive(nv):
    for n in range(1, nv + 1):
        for g in G.enumerate_graphs(n, nv - n, "conn"):
            assert G.multiindex_cancellation_sum(g) == int(G.graph_in_class(g, "af"))


def test_cancellation_rejects_disconnected_and_large():
    with pytest.raises(G.GraphDomainError):
        G.multiindex_cancellation_sum(ColoredGraph(2, 1, 0))
    with pytest.raises(G.SizeLimitError):
        G.multiindex_cancellation_sum(ColoredGraph.from_edges(2, 6, [(i, i + 1) for i in range(1, 8)]))


def test_blocks_of_path():
    g = ColoredGraph.from_edges(2, 2, [(1, 3), (3, 4), (4, 2)])
    assert sorted(map(sorted, G.blocks(g))) == [[1, 3], [2, 4], [3, 4]]
