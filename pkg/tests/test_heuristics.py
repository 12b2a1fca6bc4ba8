import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dagster_ftsc.auxiliary import search_1ftsc, search_2ftssr
from dagster_ftsc.exceptions import EdgeBudgetExceeded
from dagster_ftsc.graph import delete_vertices, reachable
from dagster_ftsc.heuristics import (
    EdgeAccessCounter,
    SeedVerdict,
    ancestry_seed_build,
    bi_bfs_query,
    bi_bfs_reach,
    chbfs_query,
    sbfs_query,
    seed_reach_check,
    simple_bfs_query,
    simple_bfs_reach,
)
from dagster_ftsc.queries import FtQuery, ground_truth_2ftsc
from dagster_ftsc.runner import build_engine
from tests.graphs import (
    FIX_A,
    FIX_K4B,
    all_queries,
    digraph,
    directed_path,
    random_strong_sample,
)


def test_simple_bfs_counts_every_consumed_entry():
    counter = EdgeAccessCounter()
    assert simple_bfs_reach(directed_path(3), 0, 2, frozenset(), counter)
    assert counter.count == 2


def test_simple_bfs_query_needs_both_directions():
    counter = EdgeAccessCounter()
    assert not simple_bfs_query(directed_path(4), FtQuery(0, 2, 3, 3), counter)
    # Two entries to reach 2, one more to find 3 failed on the way back.
    assert counter.count == 3


def test_bidirectional_bfs_meets_in_the_middle():
    counter = EdgeAccessCounter()
    assert bi_bfs_reach(directed_path(4), 0, 3, frozenset(), counter)
    assert counter.count == 4


def test_bidirectional_bfs_stops_when_a_side_runs_dry():
    counter = EdgeAccessCounter()
    assert not bi_bfs_reach(directed_path(4), 3, 0, frozenset(), counter)
    assert counter.count == 0


def test_counter_limit():
    counter = EdgeAccessCounter(limit=1)
    with pytest.raises(EdgeBudgetExceeded):
        simple_bfs_reach(directed_path(4), 0, 3, frozenset(), counter)


def test_degenerate_queries_cost_nothing():
    counter = EdgeAccessCounter()
    assert not bi_bfs_query(FIX_A, FtQuery(1, 2, 1, 3), counter)
    assert bi_bfs_query(FIX_A, FtQuery(4, 4, 1, 3), counter)
    assert counter.count == 0


def test_seed_proves_paths_avoiding_the_failures():
    seed = ancestry_seed_build(FIX_A, 0)
    assert seed_reach_check(seed, 4, 1, 2, 3) is SeedVerdict.PROVEN_REACHABLE
    # 1 lies on the tree path from 0 to 5.
    assert seed_reach_check(seed, 3, 5, 1, 2) is SeedVerdict.UNKNOWN
    assert seed_reach_check(seed, 3, 5, 0, None) is SeedVerdict.UNKNOWN
    assert seed_reach_check(seed, 3, 5, None, None) is SeedVerdict.PROVEN_REACHABLE


def test_sbfs_answers_by_seed():
    seeds = [ancestry_seed_build(FIX_K4B, 0)]
    counter = EdgeAccessCounter()
    outcome = sbfs_query(FIX_K4B, seeds, FtQuery(1, 2, 3, 3), counter)
    assert outcome.answer
    assert outcome.answered_by_seed
    assert outcome.edges_accessed == 0


def test_sbfs_falls_back_to_search():
    seeds = [ancestry_seed_build(FIX_A, 0)]
    outcome = sbfs_query(FIX_A, seeds, FtQuery(4, 1, 2, 3), EdgeAccessCounter())
    assert not outcome.answer
    assert not outcome.answered_by_seed


def test_chbfs_rejects_by_seed():
    oracles = [search_2ftssr(FIX_A, 0)]
    outcome = chbfs_query(FIX_A, oracles, FtQuery(1, 4, 2, 5), EdgeAccessCounter())
    assert not outcome.answer
    assert outcome.answered_by_seed
    assert outcome.ssr_calls == 4


def test_chbfs_falls_back_when_seed_is_inconclusive():
    oracles = [search_2ftssr(FIX_A, 0)]
    outcome = chbfs_query(FIX_A, oracles, FtQuery(3, 5, 1, 2), EdgeAccessCounter())
    assert outcome.answer
    assert not outcome.answered_by_seed
    assert outcome.edges_accessed > 0


def test_chbfs_skips_failed_seeds():
    oracles = [search_2ftssr(FIX_A, 0)]
    outcome = chbfs_query(FIX_A, oracles, FtQuery(3, 5, 0, 1), EdgeAccessCounter())
    assert outcome.answer
    assert outcome.ssr_calls == 0


def test_search_oracles_on_a_subgraph():
    sub = delete_vertices(FIX_A, [0])
    ssr = search_2ftssr(sub, 3)
    assert ssr.reach_from_source(5, None, None)
    assert not ssr.reach_from_source(1, None, None)
    assert not ssr.reach_from_source(5, 4, None)
    # Vertices outside the subgraph are never reached, failures there are ignored.
    assert not ssr.reach_to_source(0, None, None)
    assert ssr.reach_to_source(4, 0, 1)

    onefault = search_1ftsc(sub)
    assert onefault.ftsc(3, 5, None)
    assert not onefault.ftsc(3, 5, 4)
    assert onefault.ftsc(3, 5, 0)
    assert not onefault.ftsc(1, 2, None)


def test_engines_match_ground_truth():
    rng = random.Random(13)
    for graph in random_strong_sample(seed=13, count=20, n_range=(4, 7)):
        seed_vertices = rng.sample(range(graph.vertex_count), 2)
        seeds = [ancestry_seed_build(graph, s) for s in seed_vertices]
        oracles = [search_2ftssr(graph, s) for s in seed_vertices]
        for query in map(FtQuery._make, all_queries(graph.vertex_count)):
            expected = ground_truth_2ftsc(graph, query)
            counter = EdgeAccessCounter()
            assert simple_bfs_query(graph, query, counter) == expected
            assert bi_bfs_query(graph, query, counter) == expected
            assert sbfs_query(graph, seeds, query, counter).answer == expected
            assert chbfs_query(graph, oracles, query, counter).answer == expected


HEURISTIC_METHODS = [
    "simple-bfs",
    "bi-bfs",
    "sbfs:1",
    "sbfs:2",
    "sbfs:3",
    "chbfs:1",
    "chbfs:2",
    "chbfs:3",
]


def assert_heuristics_match_ground_truth(graph, rng_seed):
    engines = [
        (method, build_engine(graph, method, rng_seed=rng_seed)) for method in HEURISTIC_METHODS
    ]
    bound = 2 * graph.edge_count
    for query in map(FtQuery._make, all_queries(graph.vertex_count)):
        expected = ground_truth_2ftsc(graph, query)
        for method, engine in engines:
            outcome = engine.query(query)
            assert outcome.answer == expected, (method, query)
            assert outcome.edges_accessed <= bound, (method, query)
            if outcome.answered_by_seed:
                assert outcome.edges_accessed == 0, (method, query)


def test_seeded_engines_match_ground_truth():
    for rng_seed, graph in enumerate(random_strong_sample(seed=17, count=25, n_range=(4, 7))):
        assert_heuristics_match_ground_truth(graph, rng_seed)


@pytest.mark.slow
def test_seeded_engines_match_ground_truth_up_to_ten_vertices():
    for rng_seed, graph in enumerate(random_strong_sample(seed=19, count=200, n_range=(4, 10))):
        assert_heuristics_match_ground_truth(graph, rng_seed)


def test_shared_counter_only_grows():
    graph = next(random_strong_sample(seed=29, count=1, n_range=(7, 7)))
    shared = EdgeAccessCounter()
    for query in map(FtQuery._make, all_queries(graph.vertex_count)):
        before = shared.count
        own = EdgeAccessCounter()
        assert bi_bfs_query(graph, query, shared) == bi_bfs_query(graph, query, own)
        assert shared.count == before + own.count


@st.composite
def seed_checks(draw, max_vertices=8):
    n = draw(st.integers(min_value=1, max_value=max_vertices))
    vertex = st.integers(0, n - 1)
    edges = draw(st.lists(st.tuples(vertex, vertex), max_size=3 * n))
    failure = st.one_of(st.none(), vertex)
    return (
        digraph(n, edges),
        draw(vertex),
        draw(vertex),
        draw(vertex),
        draw(failure),
        draw(failure),
    )


@settings(max_examples=300, deadline=None)
@given(seed_checks())
def test_seed_proofs_are_sound(case):
    graph, root, source, target, f1, f2 = case
    seed = ancestry_seed_build(graph, root)
    verdict = seed_reach_check(seed, source, target, f1, f2)
    if verdict is SeedVerdict.PROVEN_REACHABLE:
        failed = {f for f in (f1, f2) if f is not None}
        assert target in reachable(graph, source, failed)
