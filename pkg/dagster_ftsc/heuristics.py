"""Instrumented search engines: simple BFS, bidirectional BFS and seeded variants.

Every engine counts one edge access per adjacency entry it consumes, in either
direction. Seed checks and oracle calls cost nothing.
"""

from collections import deque
from dataclasses import dataclass
from enum import Enum
from typing import AbstractSet, Callable, Dict, Optional, Sequence

from dagster_ftsc.auxiliary import TwoFtSsrOracle
from dagster_ftsc.exceptions import EdgeBudgetExceeded
from dagster_ftsc.graph import BfsTree, Digraph, bfs_tree, reverse
from dagster_ftsc.queries import FtQuery, QueryOutcome, degenerate_answer

SettleHook = Callable[[int], bool]


@dataclass
class EdgeAccessCounter:
    count: int = 0
    limit: Optional[int] = None

    def tick(self) -> None:
        self.count += 1
        if self.limit is not None and self.count > self.limit:
            raise EdgeBudgetExceeded(f"edge accesses exceeded the limit of {self.limit}")


def simple_bfs_reach(
    graph: Digraph,
    source: int,
    target: int,
    failed: AbstractSet[int],
    counter: EdgeAccessCounter,
) -> bool:
    """Plain BFS from source, stopping as soon as target is discovered."""
    if source in failed or target in failed:
        return False
    if source == target:
        return True
    seen = {source}
    queue = deque([source])
    while queue:
        vertex = queue.popleft()
        for head in graph.out_adjacency[vertex]:
            counter.tick()
            if head in failed or head in seen:
                continue
            if head == target:
                return True
            seen.add(head)
            queue.append(head)
    return False


def simple_bfs_query(graph: Digraph, query: FtQuery, counter: EdgeAccessCounter) -> bool:
    trivial = degenerate_answer(query)
    if trivial is not None:
        return trivial
    failed = query.failed
    return simple_bfs_reach(graph, query.x, query.y, failed, counter) and simple_bfs_reach(
        graph, query.y, query.x, failed, counter
    )


_HOOK = object()


class _Frontier:
    """One side of a bidirectional search, consumed one adjacency entry at a time."""

    def __init__(self, root: int, adjacency, on_settle: Optional[SettleHook]) -> None:
        self.adjacency = adjacency
        self.on_settle = on_settle
        self.queue = deque([root])
        self.discovered = {root}
        self.settled = {root}
        self.current: Optional[int] = None
        self.position = 0

    def next_entry(self):
        while self.current is None or self.position >= len(self.adjacency[self.current]):
            if not self.queue:
                return None
            self.current = self.queue.popleft()
            self.position = 0
            self.settled.add(self.current)
            if self.on_settle is not None and self.on_settle(self.current):
                return _HOOK
        entry = self.adjacency[self.current][self.position]
        self.position += 1
        return entry


def bi_bfs_reach(
    graph: Digraph,
    source: int,
    target: int,
    failed: AbstractSet[int],
    counter: EdgeAccessCounter,
    on_forward_settle: Optional[SettleHook] = None,
    on_backward_settle: Optional[SettleHook] = None,
) -> bool:
    """Bidirectional BFS alternating strictly one edge per turn, forward side first.

    The searches meet when one side touches a vertex the other side has
    settled (dequeued, or its root). A side that has nothing left to consume
    on its turn ends the search negatively. The optional hooks run when a side
    settles a vertex; a True result ends the search positively.
    """
    if source in failed or target in failed:
        return False
    if source == target:
        return True
    forward = _Frontier(source, graph.out_adjacency, on_forward_settle)
    backward = _Frontier(target, graph.in_adjacency, on_backward_settle)
    side, other = forward, backward
    while True:
        entry = side.next_entry()
        if entry is _HOOK:
            return True
        if entry is None:
            return False
        counter.tick()
        if entry not in failed:
            if entry in other.settled:
                return True
            if entry not in side.discovered:
                side.discovered.add(entry)
                side.queue.append(entry)
        side, other = other, side


def bi_bfs_query(graph: Digraph, query: FtQuery, counter: EdgeAccessCounter) -> bool:
    trivial = degenerate_answer(query)
    if trivial is not None:
        return trivial
    failed = query.failed
    return bi_bfs_reach(graph, query.x, query.y, failed, counter) and bi_bfs_reach(
        graph, query.y, query.x, failed, counter
    )


class SeedVerdict(Enum):
    PROVEN_REACHABLE = "proven_reachable"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class AncestrySeed:
    """BFS trees into and out of a seed vertex with O(1) ancestry tests."""

    seed: int
    forward: BfsTree
    backward: BfsTree


def ancestry_seed_build(graph: Digraph, root: int) -> AncestrySeed:
    return AncestrySeed(
        seed=root, forward=bfs_tree(graph, root), backward=bfs_tree(reverse(graph), root)
    )


def seed_reach_check(
    seed: AncestrySeed,
    source: int,
    target: int,
    f1: Optional[int],
    f2: Optional[int],
) -> SeedVerdict:
    """Prove source reaches target through the seed when no failure sits on either tree path."""
    failed = {f for f in (f1, f2) if f is not None}
    if seed.seed in failed or source in failed or target in failed:
        return SeedVerdict.UNKNOWN
    if not (seed.backward.reached(source) and seed.forward.reached(target)):
        return SeedVerdict.UNKNOWN
    for failure in failed:
        if seed.backward.is_ancestor(failure, source) or seed.forward.is_ancestor(
            failure, target
        ):
            return SeedVerdict.UNKNOWN
    return SeedVerdict.PROVEN_REACHABLE


def _proven(seed: AncestrySeed, source: int, target: int, query: FtQuery) -> bool:
    verdict = seed_reach_check(seed, source, target, query.f1, query.f2)
    return verdict is SeedVerdict.PROVEN_REACHABLE


def sbfs_query(
    graph: Digraph,
    seeds: Sequence[AncestrySeed],
    query: FtQuery,
    counter: EdgeAccessCounter,
) -> QueryOutcome:
    """Seeded BFS: try the seeds first, then bidirectional BFS with seed hooks."""
    trivial = degenerate_answer(query)
    if trivial is not None:
        return QueryOutcome(answer=trivial)

    forward_proven = backward_proven = False
    for seed in seeds:
        forward_proven = forward_proven or _proven(seed, query.x, query.y, query)
        backward_proven = backward_proven or _proven(seed, query.y, query.x, query)
        if forward_proven and backward_proven:
            return QueryOutcome(answer=True, answered_by_seed=True)

    by_vertex: Dict[int, AncestrySeed] = {seed.seed: seed for seed in seeds}
    failed = query.failed

    def phase(source: int, target: int) -> bool:
        def forward_hook(vertex: int) -> bool:
            seed = by_vertex.get(vertex)
            return seed is not None and _proven(seed, vertex, target, query)

        def backward_hook(vertex: int) -> bool:
            seed = by_vertex.get(vertex)
            return seed is not None and _proven(seed, source, vertex, query)

        return bi_bfs_reach(graph, source, target, failed, counter, forward_hook, backward_hook)

    start = counter.count
    answer = (forward_proven or phase(query.x, query.y)) and (
        backward_proven or phase(query.y, query.x)
    )
    return QueryOutcome(answer=answer, edges_accessed=counter.count - start)


def chbfs_query(
    graph: Digraph,
    ch_seeds: Sequence[TwoFtSsrOracle],
    query: FtQuery,
    counter: EdgeAccessCounter,
) -> QueryOutcome:
    """Seeds with exact reachability oracles: conclusive either way, else bidirectional BFS."""
    trivial = degenerate_answer(query)
    if trivial is not None:
        return QueryOutcome(answer=trivial)

    calls = 0
    for oracle in ch_seeds:
        if oracle.source in query.failed:
            continue
        calls += 4
        from_x = oracle.reach_from_source(query.x, query.f1, query.f2)
        from_y = oracle.reach_from_source(query.y, query.f1, query.f2)
        to_x = oracle.reach_to_source(query.x, query.f1, query.f2)
        to_y = oracle.reach_to_source(query.y, query.f1, query.f2)
        if from_x != from_y or to_x != to_y:
            return QueryOutcome(answer=False, ssr_calls=calls, answered_by_seed=True)
        if from_x and to_x:
            return QueryOutcome(answer=True, ssr_calls=calls, answered_by_seed=True)

    start = counter.count
    answer = bi_bfs_query(graph, query, counter)
    return QueryOutcome(answer=answer, edges_accessed=counter.count - start, ssr_calls=calls)
