"""Auxiliary reachability oracles behind the interfaces the tree algorithms rely on.

The implementations here answer by search, memoizing the reached set per
failure set. They work on an induced subgraph but take and return vertex ids of
the parent graph; failures outside the subgraph are ignored.
"""

from abc import ABC, abstractmethod
from functools import lru_cache
from typing import FrozenSet, Optional, Union

from dagster_ftsc.graph import Digraph, InducedSubgraph, reachable, reverse

CACHE_SIZE = 4096


class TwoFtSsrOracle(ABC):
    """Single-source reachability under up to two vertex failures."""

    source: int

    @abstractmethod
    def reach_from_source(self, vertex: int, f1: Optional[int], f2: Optional[int]) -> bool:
        """Is vertex reachable from the source in G - {f1, f2}?"""

    @abstractmethod
    def reach_to_source(self, vertex: int, f1: Optional[int], f2: Optional[int]) -> bool:
        """Does vertex reach the source in G - {f1, f2}?"""


class OneFtScOracle(ABC):
    """Strong connectivity under one vertex failure."""

    @abstractmethod
    def ftsc(self, x: int, y: int, failure: Optional[int]) -> bool:
        """Are x and y strongly connected in G - failure?"""


class SearchTwoFtSsr(TwoFtSsrOracle):
    def __init__(self, subgraph: InducedSubgraph, source: int) -> None:
        self.subgraph = subgraph
        self.source = source
        self._local_source = subgraph.to_local(source)
        self._reverse = reverse(subgraph.graph)
        self._forward_reach = lru_cache(maxsize=CACHE_SIZE)(self._reach_forward)
        self._backward_reach = lru_cache(maxsize=CACHE_SIZE)(self._reach_backward)

    def _blocked(self, f1: Optional[int], f2: Optional[int]) -> FrozenSet[int]:
        return self.subgraph.local_set(f for f in (f1, f2) if f is not None)

    def _reach_forward(self, blocked: FrozenSet[int]) -> FrozenSet[int]:
        return reachable(self.subgraph.graph, self._local_source, blocked)

    def _reach_backward(self, blocked: FrozenSet[int]) -> FrozenSet[int]:
        return reachable(self._reverse, self._local_source, blocked)

    def reach_from_source(self, vertex: int, f1: Optional[int], f2: Optional[int]) -> bool:
        local = self.subgraph.to_local(vertex)
        return local is not None and local in self._forward_reach(self._blocked(f1, f2))

    def reach_to_source(self, vertex: int, f1: Optional[int], f2: Optional[int]) -> bool:
        local = self.subgraph.to_local(vertex)
        return local is not None and local in self._backward_reach(self._blocked(f1, f2))


def _as_subgraph(graph: Union[Digraph, InducedSubgraph]) -> InducedSubgraph:
    if isinstance(graph, Digraph):
        return InducedSubgraph.whole(graph)
    return graph


def search_2ftssr(graph: Union[Digraph, InducedSubgraph], source: int) -> TwoFtSsrOracle:
    return SearchTwoFtSsr(_as_subgraph(graph), source)


class SearchOneFtSc(OneFtScOracle):
    def __init__(self, subgraph: InducedSubgraph) -> None:
        self.subgraph = subgraph
        self._reach = lru_cache(maxsize=CACHE_SIZE)(self._reach_from)

    def _reach_from(self, local_source: int, blocked: FrozenSet[int]) -> FrozenSet[int]:
        return reachable(self.subgraph.graph, local_source, blocked)

    def ftsc(self, x: int, y: int, failure: Optional[int]) -> bool:
        if x == failure or y == failure:
            return False
        local_x = self.subgraph.to_local(x)
        local_y = self.subgraph.to_local(y)
        if local_x is None or local_y is None:
            return False
        if local_x == local_y:
            return True
        blocked = self.subgraph.local_set([failure] if failure is not None else [])
        return local_y in self._reach(local_x, blocked) and local_x in self._reach(
            local_y, blocked
        )


def search_1ftsc(graph: Union[Digraph, InducedSubgraph]) -> OneFtScOracle:
    return SearchOneFtSc(_as_subgraph(graph))
