"""Engine descriptors and the measurement loop behind every benchmark."""

import logging
import random
import time
from abc import ABC, abstractmethod
from typing import Iterable, List, Optional, Sequence, Union

from dagster import DagsterLogManager, get_dagster_logger

from dagster_ftsc.auxiliary import search_2ftssr
from dagster_ftsc.exceptions import CrossCheckMismatch, MethodDescriptorError
from dagster_ftsc.graph import Digraph
from dagster_ftsc.heuristics import (
    EdgeAccessCounter,
    ancestry_seed_build,
    bi_bfs_query,
    chbfs_query,
    sbfs_query,
    simple_bfs_query,
)
from dagster_ftsc.oracles import ChTreeOracle, PartialTreeOracle, SccTreeOracle, validate_seeds
from dagster_ftsc.queries import FtQuery, QueryOutcome, ground_truth_2ftsc
from dagster_ftsc.report import Report, ReportAccumulator
from dagster_ftsc.structure import DEFAULT_PAIR_BUDGET, SplitSelector

logger = get_dagster_logger()

Log = Union[logging.Logger, DagsterLogManager]

METHOD_FAMILIES = (
    "ground-truth",
    "simple-bfs",
    "bi-bfs",
    "sbfs",
    "chbfs",
    "tree",
    "partial-tree",
    "chtree",
)


class QueryEngine(ABC):
    method: str

    @abstractmethod
    def query(self, query: FtQuery) -> QueryOutcome:
        pass


class GroundTruthEngine(QueryEngine):
    def __init__(self, graph: Digraph) -> None:
        self.graph = graph
        self.method = "ground-truth"

    def query(self, query: FtQuery) -> QueryOutcome:
        return QueryOutcome(answer=ground_truth_2ftsc(self.graph, query))


class SearchEngine(QueryEngine):
    """simple-bfs and bi-bfs, with a private edge counter per query."""

    def __init__(self, graph: Digraph, method: str) -> None:
        self.graph = graph
        self.method = method
        self._search = simple_bfs_query if method == "simple-bfs" else bi_bfs_query

    def query(self, query: FtQuery) -> QueryOutcome:
        counter = EdgeAccessCounter()
        answer = self._search(self.graph, query, counter)
        return QueryOutcome(answer=answer, edges_accessed=counter.count)


class SeededEngine(QueryEngine):
    """sbfs:k over ancestry seeds or chbfs:k over exact reachability oracles."""

    def __init__(self, graph: Digraph, method: str, seeds: Sequence[int], exact: bool) -> None:
        self.graph = graph
        self.method = method
        self.exact = exact
        if exact:
            self.seeds = [search_2ftssr(graph, s) for s in seeds]
        else:
            self.seeds = [ancestry_seed_build(graph, s) for s in seeds]

    def query(self, query: FtQuery) -> QueryOutcome:
        counter = EdgeAccessCounter()
        if self.exact:
            return chbfs_query(self.graph, self.seeds, query, counter)
        return sbfs_query(self.graph, self.seeds, query, counter)


class TreeEngine(QueryEngine):
    def __init__(
        self, method: str, oracle: Union[SccTreeOracle, PartialTreeOracle, ChTreeOracle]
    ) -> None:
        self.method = method
        self.oracle = oracle

    def query(self, query: FtQuery) -> QueryOutcome:
        return self.oracle.query(query)


def _count_argument(method: str, argument: str) -> int:
    try:
        value = int(argument)
    except ValueError as error:
        raise MethodDescriptorError(f"Method {method} needs an integer argument") from error
    if value < 0:
        raise MethodDescriptorError(f"Method {method} needs a non-negative argument")
    return value


def pick_seeds(
    graph: Digraph, count: int, seeds: Optional[Sequence[int]] = None, rng_seed: int = 0
) -> List[int]:
    """The first `count` given seeds, or `count` vertices drawn without replacement."""
    if seeds is not None:
        validate_seeds(graph, seeds)
        return list(seeds[:count])
    rng = random.Random(rng_seed)
    return rng.sample(range(graph.vertex_count), min(count, graph.vertex_count))


def build_engine(
    graph: Digraph,
    method: str,
    seeds: Optional[Sequence[int]] = None,
    rng_seed: int = 0,
    simulate: bool = False,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    log: Log = logger,
) -> QueryEngine:
    """Build the query engine named by a method descriptor.

    Args:
        graph (Digraph): The graph every query runs on.
        method (str): One of ground-truth, simple-bfs, bi-bfs, sbfs:k, chbfs:k,
            tree:<selector>, partial-tree:<Δ> or chtree:k.
        seeds (Optional[Sequence[int]]): Seed vertices for the seeded methods; drawn
            with rng_seed when absent.
        rng_seed (int): Seed for random seed choice and the random splitter.
        simulate (bool): Run ChTree internal nodes by bidirectional BFS.
        pair_budget (int): Pair budget of the 3-connectivity test in partial trees.
        log (Union[logging.Logger, DagsterLogManager]): Where construction is reported.

    Returns:
        QueryEngine: The engine.
    """
    family, _, argument = method.partition(":")
    if family not in METHOD_FAMILIES:
        raise MethodDescriptorError(
            f"Unknown method {method}, expected one of {METHOD_FAMILIES}"
        )
    if family in ("ground-truth", "simple-bfs", "bi-bfs"):
        if argument:
            raise MethodDescriptorError(f"Method {family} takes no argument")
        if family == "ground-truth":
            return GroundTruthEngine(graph)
        return SearchEngine(graph, family)
    if not argument:
        raise MethodDescriptorError(f"Method {family} needs an argument, e.g. {family}:1")

    if family in ("sbfs", "chbfs", "chtree"):
        chosen = pick_seeds(graph, _count_argument(method, argument), seeds, rng_seed)
        log.info(f"{method}: seeds {[graph.label(s) for s in chosen]}")
        if family == "chtree":
            return TreeEngine(method, ChTreeOracle(graph, chosen, simulate=simulate, log=log))
        return SeededEngine(graph, method, chosen, exact=family == "chbfs")
    if family == "tree":
        selector = SplitSelector.from_name(argument, rng_seed)
        return TreeEngine(method, SccTreeOracle(graph, selector, log=log))

    delta = _count_argument(method, argument)
    if delta < 1:
        raise MethodDescriptorError("partial-tree needs Δ >= 1")
    return TreeEngine(method, PartialTreeOracle(graph, delta, pair_budget, log=log))


def run_workload(
    graph: Digraph,
    engine: Union[str, QueryEngine],
    queries: Iterable[FtQuery],
    cross_check: bool = False,
    graph_name: str = "graph",
    seeds: Optional[Sequence[int]] = None,
    rng_seed: int = 0,
    simulate: bool = False,
    log: Log = logger,
) -> Report:
    """Answer every query with the engine and aggregate the outcomes.

    A method descriptor is built into an engine first. With cross_check, every
    answer is compared to ground truth and the first disagreement raises
    CrossCheckMismatch.
    """
    if isinstance(engine, str):
        engine = build_engine(graph, engine, seeds, rng_seed, simulate, log=log)
    accumulator = ReportAccumulator(graph_name=graph_name, method=engine.method)
    start = time.perf_counter()
    for index, query in enumerate(queries):
        outcome = engine.query(query)
        if cross_check:
            expected = ground_truth_2ftsc(graph, query)
            if outcome.answer != expected:
                raise CrossCheckMismatch(
                    f"{engine.method} answered {outcome.answer} for query #{index} "
                    f"{tuple(query)}, ground truth is {expected}"
                )
        accumulator.add(outcome)
    accumulator.wall_time_seconds = time.perf_counter() - start
    report = accumulator.report()
    log.info(
        f"{engine.method} on {graph_name}: {report.query_count} queries, "
        f"{report.answered_true} true, {float(report.mean_edges_per_query):.2f} edges/query"
    )
    return report
