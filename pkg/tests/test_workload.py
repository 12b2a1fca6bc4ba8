import pytest

from dagster_ftsc.exceptions import FtscError, NoBadInstanceError
from dagster_ftsc.graph import strong_components
from dagster_ftsc.queries import FtQuery, ground_truth_2ftsc
from dagster_ftsc.workload import WorkloadSpec, gen_bad_queries, gen_random_queries
from tests.graphs import BAD_SAP, FIX_2T, FIX_A, FIX_K4B, all_queries, bad_instance_graph


def test_parse_workload():
    assert WorkloadSpec.parse("random:5", rng_seed=3) == WorkloadSpec("random", 5, 3)
    assert WorkloadSpec.parse("bad:10", seed_count=2).seed_count == 2


@pytest.mark.parametrize("text", ["bad:x", "random", "walk:3", "random:0", "random:-2"])
def test_malformed_workloads(text):
    with pytest.raises(FtscError):
        WorkloadSpec.parse(text)


def test_negative_seed_count():
    with pytest.raises(FtscError):
        WorkloadSpec("bad", 3, seed_count=-1)


def test_random_queries_are_reproducible():
    spec = WorkloadSpec("random", 200, rng_seed=17)
    queries = gen_random_queries(FIX_A, spec)
    assert queries == gen_random_queries(FIX_A, spec)
    assert len(queries) == 200
    assert all(0 <= v < 6 for query in queries for v in query)
    assert queries != gen_random_queries(FIX_A, WorkloadSpec("random", 200, rng_seed=18))


def test_random_true_rate_matches_exhaustive_enumeration():
    exhaustive = [ground_truth_2ftsc(FIX_A, FtQuery._make(q)) for q in all_queries(6)]
    expected = sum(exhaustive) / len(exhaustive)
    queries = gen_random_queries(FIX_A, WorkloadSpec("random", 10_000, rng_seed=5))
    observed = sum(ground_truth_2ftsc(FIX_A, q) for q in queries) / len(queries)
    assert abs(observed - expected) <= 0.02


def test_random_queries_keep_coincidences():
    queries = gen_random_queries(FIX_A, WorkloadSpec("random", 2000))
    assert any(q.x == q.y for q in queries)
    assert any(q.f1 == q.f2 for q in queries)


def test_bad_queries_strand_every_seed():
    graph = bad_instance_graph()
    spec = WorkloadSpec("bad", 300, rng_seed=4, seed_count=10)
    seeds, queries = gen_bad_queries(graph, spec)
    assert len(set(seeds)) == 10
    assert all(seed >= 20 for seed in seeds)
    largest = max(strong_components(graph, {BAD_SAP}), key=len)
    for query in queries:
        assert query.f1 == BAD_SAP
        assert query.f2 != BAD_SAP
        assert query.x in largest and query.y in largest
    assert (seeds, queries) == gen_bad_queries(graph, spec)


def test_bad_queries_pick_the_sap_that_strands_enough_vertices():
    seeds, queries = gen_bad_queries(FIX_2T, WorkloadSpec("bad", 20, seed_count=2))
    sap = queries[0].f1
    assert sap in (2, 3)
    expected_seeds = {0, 1} if sap == 2 else {4, 5}
    assert set(seeds) == expected_seeds
    pool = {3, 4, 5} if sap == 2 else {0, 1, 2}
    assert all(q.x in pool and q.y in pool for q in queries)


def test_no_bad_instance():
    with pytest.raises(NoBadInstanceError):
        gen_bad_queries(FIX_K4B, WorkloadSpec("bad", 5, seed_count=1))
    with pytest.raises(NoBadInstanceError):
        gen_bad_queries(FIX_A, WorkloadSpec("bad", 5, seed_count=10))
