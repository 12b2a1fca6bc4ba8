"""FtQuery and QueryOutcome, the degenerate-query contract and brute-force ground truth."""

from dataclasses import dataclass
from typing import FrozenSet, NamedTuple, Optional

from dagster_ftsc.graph import Digraph, reachable


class FtQuery(NamedTuple):
    """Are x and y strongly connected once f1 and f2 fail?"""

    x: int
    y: int
    f1: int
    f2: int

    @property
    def failed(self) -> FrozenSet[int]:
        return frozenset((self.f1, self.f2))


@dataclass
class QueryOutcome:
    answer: bool
    edges_accessed: int = 0
    depth_reached: Optional[int] = None
    ssr_calls: int = 0
    onefault_calls: int = 0
    answered_by_seed: bool = False


def degenerate_answer(query: FtQuery) -> Optional[bool]:
    """Answer for coinciding vertices, or None when the query needs a search.

    A failed query vertex gives False; x == y gives True. f1 == f2 needs no
    special case since the failed set then holds a single vertex.
    """
    if query.x in query.failed or query.y in query.failed:
        return False
    if query.x == query.y:
        return True
    return None


def ground_truth_2ftsc(graph: Digraph, query: FtQuery) -> bool:
    """Two full searches in G - {f1, f2}."""
    trivial = degenerate_answer(query)
    if trivial is not None:
        return trivial
    failed = query.failed
    return query.y in reachable(graph, query.x, failed) and query.x in reachable(
        graph, query.y, failed
    )
