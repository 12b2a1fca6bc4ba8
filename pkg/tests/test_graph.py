import io
import random

import networkx as nx
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagster_ftsc.exceptions import (
    GraphFormatError,
    GraphParseError,
    NotStronglyConnectedError,
    RankOutOfRangeError,
)
from dagster_ftsc.graph import (
    Digraph,
    bfs_tree,
    compute_sccs,
    delete_vertices,
    exact_diameter,
    extract_scc_by_rank,
    induced_subgraph,
    is_strongly_connected,
    longest_bfs_path,
    longest_bfs_path_lb,
    parse_graph,
    reachable,
    reverse,
    split_edges,
    strong_components,
    write_snap,
)
from dagster_ftsc.queries import FtQuery, ground_truth_2ftsc
from tests.graphs import (
    FIX_A,
    FIX_C4,
    bidirected_path,
    digraph,
    random_strongly_connected,
)


@st.composite
def small_digraphs(draw, max_vertices=8):
    n = draw(st.integers(min_value=1, max_value=max_vertices))
    edges = draw(
        st.lists(
            st.tuples(st.integers(0, n - 1), st.integers(0, n - 1)), max_size=3 * n
        )
    )
    return digraph(n, edges)


def partition(labels):
    groups = {}
    for vertex, label in enumerate(labels):
        groups.setdefault(label, set()).add(vertex)
    return {frozenset(group) for group in groups.values()}


def test_parse_snap():
    graph, id_map = parse_graph(b"# c\n1 2\n2 1\n", "snap")

    assert graph.vertex_count == 2
    assert graph.edge_count == 2
    assert list(graph.edges()) == [(0, 1), (1, 0)]
    assert id_map == {"1": 0, "2": 1}


def test_parse_snap_keeps_duplicates_and_self_loops():
    graph, _ = parse_graph("7 7\r\n7 9\r\n7 9\r\n9 7\r\n", "snap")

    assert graph.edge_count == 4
    assert graph.out_adjacency[0] == (0, 1, 1)
    assert graph.label(1) == "9"


def test_parse_dimacs():
    graph, _ = parse_graph(b"c roads\np sp 3 2\na 1 2 5\na 2 3 1\n", "dimacs")

    assert graph.vertex_count == 3
    assert graph.edge_count == 2
    assert list(graph.edges()) == [(0, 1), (1, 2)]


def test_parse_dimacs_keeps_isolated_vertices():
    graph, id_map = parse_graph("p sp 4 1\na 3 1 2\n", "dimacs")

    assert graph.vertex_count == 4
    assert id_map == {"3": 0, "1": 1, "2": 2, "4": 3}


def test_parse_errors_carry_line_numbers():
    with pytest.raises(GraphParseError) as error:
        parse_graph("1 2\n# fine\n3\n", "snap")

    assert error.value.line_number == 3


@pytest.mark.parametrize(
    "content",
    [
        "p sp 2 2\na 1 2 1\n",
        "p sp 2 1\na 1 3 1\n",
        "a 1 2 1\np sp 2 1\n",
        "c no header\n",
    ],
)
def test_parse_dimacs_inconsistent_header(content):
    with pytest.raises(GraphFormatError):
        parse_graph(content, "dimacs")


def test_parse_unknown_format():
    with pytest.raises(GraphFormatError):
        parse_graph("1 2\n", "graphml")


def test_write_snap_uses_original_labels():
    graph, _ = parse_graph("a b\nb c\nc a\n", "snap")
    stream = io.StringIO()
    write_snap(graph, stream)

    again, _ = parse_graph(stream.getvalue(), "snap")
    assert again == graph
    assert "a b" in stream.getvalue()


def test_adjacency_lists_agree():
    for tail, heads in enumerate(FIX_A.out_adjacency):
        for head in heads:
            assert tail in FIX_A.in_adjacency[head]
    assert sum(map(len, FIX_A.in_adjacency)) == FIX_A.edge_count == 8


def test_compute_sccs_cycle():
    labeling = compute_sccs(FIX_C4)

    assert labeling.component_count == 1
    assert labeling.component_sizes == (4,)
    assert labeling.component_edge_counts == (4,)


def test_compute_sccs_after_deletion():
    assert compute_sccs(delete_vertices(FIX_C4, [1]).graph).component_count == 3
    components = {frozenset(c) for c in strong_components(FIX_A, {0})}
    assert components == {frozenset({3, 4, 5}), frozenset({1}), frozenset({2})}


def test_compute_sccs_reverse_topological_order():
    # 0 -> 1 -> {2, 3}
    graph = digraph(4, [(0, 1), (1, 2), (2, 3), (3, 2)])
    labeling = compute_sccs(graph)

    assert labeling.component_of[2] == labeling.component_of[3] == 0
    assert labeling.component_of[1] == 1
    assert labeling.component_of[0] == 2


@settings(max_examples=300, deadline=None)
@given(small_digraphs())
def test_compute_sccs_matches_pairwise_reachability(graph):
    reach = [reachable(graph, v) for v in graph.vertices]
    brute = [
        min(u for u in graph.vertices if u in reach[v] and v in reach[u])
        for v in graph.vertices
    ]

    assert partition(compute_sccs(graph).component_of) == partition(brute)


@settings(max_examples=100, deadline=None)
@given(small_digraphs(max_vertices=12))
def test_compute_sccs_matches_networkx(graph):
    reference = nx.DiGraph()
    reference.add_nodes_from(graph.vertices)
    reference.add_edges_from(graph.edges())
    expected = {frozenset(c) for c in nx.strongly_connected_components(reference)}

    assert partition(compute_sccs(graph).component_of) == expected
    assert partition(compute_sccs(reverse(graph)).component_of) == expected


def test_extract_scc_by_rank():
    assert extract_scc_by_rank(FIX_A, 1) == induced_subgraph(FIX_A, range(6)).graph

    cycle = extract_scc_by_rank(delete_vertices(FIX_A, [0]).graph, 1)
    assert (cycle.vertex_count, cycle.edge_count) == (3, 3)
    assert [cycle.label(v) for v in cycle.vertices] == ["3", "4", "5"]

    with pytest.raises(RankOutOfRangeError):
        extract_scc_by_rank(FIX_A, 2)


def test_extract_scc_ties_broken_by_component_id():
    # Two 2-cycles; the sink {2, 3} is completed first.
    graph = digraph(4, [(0, 1), (1, 0), (1, 2), (2, 3), (3, 2)])

    first = extract_scc_by_rank(graph, 1)
    assert [first.label(v) for v in first.vertices] == ["2", "3"]


def test_reverse():
    single = reverse(digraph(2, [(0, 1)]))
    assert list(single.edges()) == [(1, 0)]

    assert sorted(reverse(FIX_C4).edges()) == [(0, 3), (1, 0), (2, 1), (3, 2)]
    assert reverse(reverse(FIX_A)) == FIX_A


def test_bfs_tree_chain():
    tree = bfs_tree(FIX_A, 0)

    assert tree.parent == (None, 0, 1, 2, 3, 4)
    assert tree.level == (0, 1, 2, 3, 4, 5)
    assert tree.is_ancestor(1, 5)
    assert not tree.is_ancestor(5, 1)
    assert tree.depth == 5


def test_bfs_tree_blocked():
    tree = bfs_tree(FIX_A, 0, {2})

    assert [tree.reached(v) for v in FIX_A.vertices] == [True, True, False, False, False, False]
    assert tree.preorder[3] is None and tree.descendant_count[3] is None


@settings(max_examples=200, deadline=None)
@given(small_digraphs(max_vertices=10), st.data())
def test_bfs_ancestry_formula_matches_parent_walk(graph, data):
    root = data.draw(st.integers(0, graph.vertex_count - 1))
    tree = bfs_tree(graph, root)
    for u in graph.vertices:
        for v in graph.vertices:
            walk = v if tree.reached(v) else None
            ancestors = set()
            while walk is not None:
                ancestors.add(walk)
                walk = tree.parent[walk]
            assert tree.is_ancestor(u, v) == (u in ancestors)


def test_longest_bfs_path_lb():
    assert longest_bfs_path_lb(FIX_C4, 0) == 3
    assert longest_bfs_path_lb(FIX_A, 0) == 5
    assert longest_bfs_path_lb(bidirected_path(100), 0) == 99
    assert longest_bfs_path(FIX_A, 0) == [0, 1, 2, 3, 4, 5]


def test_exact_diameter():
    assert exact_diameter(FIX_C4) == 3
    assert exact_diameter(FIX_A) == 5
    with pytest.raises(NotStronglyConnectedError):
        exact_diameter(digraph(2, [(0, 1)]))


def test_diameter_within_factor_two_of_bound():
    rng = random.Random(3)
    for _ in range(100):
        graph = random_strongly_connected(rng, rng.randint(2, 25), rng.uniform(0.02, 0.3))
        start = rng.randrange(graph.vertex_count)
        bound = longest_bfs_path_lb(graph, start)
        assert bound <= exact_diameter(graph) <= 2 * bound


def test_split_edges():
    split = split_edges(digraph(2, [(0, 1)]))
    assert split.vertex_count == 3
    assert list(split.edges()) == [(0, 2), (2, 1)]

    cycle = split_edges(FIX_C4)
    assert (cycle.vertex_count, cycle.edge_count) == (8, 8)
    assert is_strongly_connected(cycle)


def test_split_edges_turns_edge_failures_into_vertex_failures():
    split = split_edges(FIX_A)
    edges = list(FIX_A.edges())
    for first in range(len(edges)):
        for second in range(first, len(edges)):
            removed = {edges[first], edges[second]}
            kept = digraph(6, (e for e in edges if e not in removed))
            for x in FIX_A.vertices:
                for y in FIX_A.vertices:
                    query = FtQuery(x, y, 6 + first, 6 + second)
                    direct = y in reachable(kept, x) and x in reachable(kept, y)
                    assert ground_truth_2ftsc(split, query) == direct


def test_digraph_rejects_out_of_range_edges():
    with pytest.raises(GraphFormatError):
        Digraph.from_edges(2, [(0, 2)])
