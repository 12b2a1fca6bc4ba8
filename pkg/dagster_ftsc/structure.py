"""Per-vertex structural analyses and split-vertex selection strategies."""

import math
from collections import Counter
from dataclasses import dataclass
from typing import AbstractSet, Dict, FrozenSet, List, Optional, Sequence, Tuple

import numpy as np
from dagster import get_dagster_logger

from dagster_ftsc.exceptions import MethodDescriptorError
from dagster_ftsc.graph import (
    NO_VERTICES,
    Digraph,
    count_components,
    induced_subgraph,
    longest_bfs_path,
    require_strongly_connected,
    reverse,
    strong_components,
)
from dagster_ftsc.utils import separator_quality

logger = get_dagster_logger()

SELECTOR_KINDS = ("random", "lnt", "mcn", "label_propagation", "pagerank", "qsep_mcn")

# Command-line spellings of the selector kinds.
SELECTOR_ALIASES = {
    "lp": "label_propagation",
    "pr": "pagerank",
    "qsep-mcn": "qsep_mcn",
}

DEFAULT_PAIR_BUDGET = 250_000


@dataclass(frozen=True)
class SplitSelector:
    """How split vertices are chosen while building an SCC-tree."""

    kind: str = "mcn"
    rng_seed: int = 0
    pagerank_iterations: int = 20
    pagerank_damping: float = 0.85
    lp_iterations: int = 10

    def __post_init__(self) -> None:
        if self.kind not in SELECTOR_KINDS:
            raise MethodDescriptorError(f"Unknown split selector {self.kind!r}")
        if not 0 < self.pagerank_damping < 1:
            raise MethodDescriptorError("pagerank_damping must lie in (0, 1)")
        if self.pagerank_iterations < 1 or self.lp_iterations < 1:
            raise MethodDescriptorError("iteration counts must be positive")

    @classmethod
    def from_name(cls, name: str, rng_seed: int = 0) -> "SplitSelector":
        return cls(kind=SELECTOR_ALIASES.get(name, name), rng_seed=rng_seed)


@dataclass(frozen=True)
class DominatorTree:
    root: int
    idom: Tuple[Optional[int], ...]

    def non_trivial_dominators(self) -> FrozenSet[int]:
        """Vertices that immediately dominate some other vertex."""
        return frozenset(d for d in self.idom if d is not None)

    def dominators_of(self, vertex: int) -> List[int]:
        chain = []
        current = self.idom[vertex]
        while current is not None:
            chain.append(current)
            current = self.idom[current]
        return chain


@dataclass(frozen=True)
class LoopNestingTree:
    root: int
    header: Tuple[Optional[int], ...]

    @property
    def height(self) -> int:
        depth: Dict[int, int] = {self.root: 0}
        for vertex in range(len(self.header)):
            chain = []
            while vertex not in depth:
                chain.append(vertex)
                vertex = self.header[vertex]
            for member in reversed(chain):
                depth[member] = depth[vertex] + 1
                vertex = member
        return max(depth.values())


def _dfs_preorder(
    graph: Digraph, root: int, blocked: AbstractSet[int] = NO_VERTICES
) -> Tuple[List[int], List[int], List[int]]:
    """Iterative DFS in adjacency order: (preorder vertex list, dfnum, parent)."""
    n = graph.vertex_count
    dfnum = [-1] * n
    parent = [-1] * n
    order: List[int] = []
    stack = [(root, -1)]
    while stack:
        vertex, caller = stack.pop()
        if dfnum[vertex] != -1 or vertex in blocked:
            continue
        dfnum[vertex] = len(order)
        order.append(vertex)
        parent[vertex] = caller
        for head in reversed(graph.out_adjacency[vertex]):
            if dfnum[head] == -1 and head not in blocked:
                stack.append((head, vertex))
    return order, dfnum, parent


def dominator_tree(
    graph: Digraph, root: int, blocked: AbstractSet[int] = NO_VERTICES
) -> DominatorTree:
    """Lengauer-Tarjan dominators with path compression.

    Vertices unreachable from root (or blocked) have no immediate dominator.
    """
    n = graph.vertex_count
    order, dfnum, parent = _dfs_preorder(graph, root, blocked)
    semi = list(range(n))
    best = list(range(n))
    ancestor = [-1] * n
    idom = [-1] * n
    samedom = [-1] * n
    bucket: List[List[int]] = [[] for _ in range(n)]

    def lowest_semi_ancestor(vertex: int) -> int:
        path = []
        current = vertex
        while ancestor[current] != -1 and ancestor[ancestor[current]] != -1:
            path.append(current)
            current = ancestor[current]
        while path:
            member = path.pop()
            link = ancestor[member]
            candidate = best[link]
            ancestor[member] = ancestor[link]
            if dfnum[semi[candidate]] < dfnum[semi[best[member]]]:
                best[member] = candidate
        return best[vertex]

    for position in range(len(order) - 1, 0, -1):
        vertex = order[position]
        tree_parent = parent[vertex]
        candidate_semi = tree_parent
        for tail in graph.in_adjacency[vertex]:
            if dfnum[tail] == -1:
                continue
            if dfnum[tail] <= dfnum[vertex]:
                option = tail
            else:
                option = semi[lowest_semi_ancestor(tail)]
            if dfnum[option] < dfnum[candidate_semi]:
                candidate_semi = option
        semi[vertex] = candidate_semi
        bucket[candidate_semi].append(vertex)
        ancestor[vertex] = tree_parent

        for pending in bucket[tree_parent]:
            lowest = lowest_semi_ancestor(pending)
            if semi[lowest] == semi[pending]:
                idom[pending] = tree_parent
            else:
                samedom[pending] = lowest
        bucket[tree_parent] = []

    for vertex in order[1:]:
        if samedom[vertex] != -1:
            idom[vertex] = idom[samedom[vertex]]

    return DominatorTree(
        root=root,
        idom=tuple(None if d == -1 else d for d in idom),
    )


def _naive_saps(graph: Digraph, blocked: AbstractSet[int] = NO_VERTICES) -> FrozenSet[int]:
    base = count_components(graph, blocked)
    return frozenset(
        v
        for v in graph.vertices
        if v not in blocked and count_components(graph, blocked | {v}) > base
    )


def _saps_of_strong_graph(graph: Digraph, root: int = 0) -> FrozenSet[int]:
    forward = dominator_tree(graph, root).non_trivial_dominators()
    backward = dominator_tree(reverse(graph), root).non_trivial_dominators()
    saps = set(forward | backward)
    saps.discard(root)
    if graph.vertex_count > 2 and count_components(graph, {root}) > 1:
        saps.add(root)
    return frozenset(saps)


def saps_of_any_graph(
    graph: Digraph, blocked: AbstractSet[int] = NO_VERTICES
) -> FrozenSet[int]:
    """SAPs of graph minus blocked, which need not be strongly connected.

    Removing a vertex only affects its own SCC, so the answer is the union of
    the SAPs of every SCC with at least three vertices.
    """
    saps = set()
    for component in strong_components(graph, blocked):
        if len(component) < 3:
            continue
        sub = induced_subgraph(graph, component)
        saps.update(sub.to_parent(v) for v in _saps_of_strong_graph(sub.graph))
    return frozenset(saps)


def strong_articulation_points(graph: Digraph, method: str = "dominators") -> FrozenSet[int]:
    """All vertices whose removal increases the number of SCCs.

    Args:
        graph (Digraph): A strongly connected graph.
        method (str): "dominators" (default) or "naive" removal-based search.
    """
    require_strongly_connected(graph, "strong_articulation_points")
    if method == "naive":
        return _naive_saps(graph)
    if method != "dominators":
        raise MethodDescriptorError(f"Unknown SAP method {method}")
    return _saps_of_strong_graph(graph)


def loop_nesting_tree(graph: Digraph, root: int = 0) -> LoopNestingTree:
    """Loop nesting tree from one DFS, collapsing loops in reverse preorder."""
    require_strongly_connected(graph, "loop_nesting_tree")
    n = graph.vertex_count
    order, dfnum, parent = _dfs_preorder(graph, root)
    descendants = [1] * n
    for vertex in reversed(order[1:]):
        descendants[parent[vertex]] += descendants[vertex]

    def is_descendant(vertex: int, header: int) -> bool:
        return dfnum[header] <= dfnum[vertex] < dfnum[header] + descendants[header]

    union = list(range(n))

    def find(vertex: int) -> int:
        top = vertex
        while union[top] != top:
            top = union[top]
        while union[vertex] != top:
            union[vertex], vertex = top, union[vertex]
        return top

    # Every collapsed loop keeps its vertices so entries into any of them are seen.
    collapsed: List[List[int]] = [[v] for v in range(n)]
    header: List[Optional[int]] = [None] * n
    for candidate in reversed(order):
        body = set()
        worklist = [candidate]
        while worklist:
            representative = worklist.pop()
            for member in collapsed[representative]:
                for tail in graph.in_adjacency[member]:
                    if not is_descendant(tail, candidate):
                        continue
                    source = find(tail)
                    if source != candidate and source not in body:
                        body.add(source)
                        worklist.append(source)
        for representative in sorted(body):
            header[representative] = candidate
            union[representative] = candidate
            collapsed[candidate].extend(collapsed[representative])
            collapsed[representative] = []

    return LoopNestingTree(root=root, header=tuple(header))


def pair_score(component_sizes: Sequence[int]) -> int:
    """Number of strongly connected vertex pairs."""
    return sum(size * (size - 1) // 2 for size in component_sizes)


def mcn_select(graph: Digraph) -> int:
    """Most critical node: the vertex whose deletion leaves the fewest strongly connected pairs."""
    if graph.vertex_count == 1:
        return 0
    best_vertex, best_score = 0, None
    for vertex in graph.vertices:
        components = strong_components(graph, {vertex})
        score = pair_score([len(c) for c in components])
        if best_score is None or score < best_score:
            best_vertex, best_score = vertex, score
    return best_vertex


def _undirected_neighbors(graph: Digraph) -> List[Tuple[int, ...]]:
    return [
        tuple(sorted(set(graph.out_adjacency[v]) | set(graph.in_adjacency[v]) - {v}))
        for v in graph.vertices
    ]


def propagate_labels(graph: Digraph, iterations: int = 10) -> List[int]:
    """Synchronous label propagation; ties go to the smallest label."""
    neighbors = _undirected_neighbors(graph)
    labels = list(graph.vertices)
    for _ in range(iterations):
        updated = []
        for vertex in graph.vertices:
            if not neighbors[vertex]:
                updated.append(labels[vertex])
                continue
            counts = Counter(labels[u] for u in neighbors[vertex])
            top = max(counts.values())
            updated.append(min(label for label, count in counts.items() if count == top))
        if updated == labels:
            break
        labels = updated
    return labels


def label_propagation_select(graph: Digraph, selector: SplitSelector = SplitSelector()) -> int:
    labels = propagate_labels(graph, selector.lp_iterations)
    neighbors = _undirected_neighbors(graph)
    cross = [
        sum(1 for u in neighbors[v] if labels[u] != labels[v]) for v in graph.vertices
    ]
    return max(graph.vertices, key=lambda v: (cross[v], -v))


def pagerank(graph: Digraph, iterations: int = 20, damping: float = 0.85) -> np.ndarray:
    n = graph.vertex_count
    tails = np.fromiter((t for t, _ in graph.edges()), dtype=np.int64, count=graph.edge_count)
    heads = np.fromiter((h for _, h in graph.edges()), dtype=np.int64, count=graph.edge_count)
    out_degree = np.bincount(tails, minlength=n).astype(float)
    dangling = out_degree == 0
    rank = np.full(n, 1.0 / n)
    for _ in range(iterations):
        share = np.zeros(n)
        np.divide(rank, out_degree, out=share, where=~dangling)
        inflow = np.bincount(heads, weights=share[tails], minlength=n)
        rank = (1.0 - damping) / n + damping * (inflow + rank[dangling].sum() / n)
    return rank


def pagerank_select(graph: Digraph, selector: SplitSelector = SplitSelector()) -> int:
    rank = pagerank(graph, selector.pagerank_iterations, selector.pagerank_damping)
    # Symmetric graphs produce floating noise between equal ranks.
    return int(np.flatnonzero(rank >= rank.max() - 1e-12)[0])


def is_q_separator(graph: Digraph, separator: Sequence[int], quality: int) -> bool:
    limit = graph.vertex_count - quality * len(separator)
    return all(
        len(component) <= limit
        for component in strong_components(graph, frozenset(separator))
    )


def q_separator(
    graph: Digraph, selector: Optional[SplitSelector] = None
) -> Optional[List[int]]:
    """A verified q-separator taken from evenly spaced vertices of a long BFS path.

    Returns None when the longest BFS path from vertex 0 (in G or its reverse)
    is shorter than sqrt(n), or when no candidate passes verification.
    """
    require_strongly_connected(graph, "q_separator")
    n = graph.vertex_count
    path = longest_bfs_path(graph, 0)
    if len(path) - 1 < math.sqrt(n):
        return None
    quality = separator_quality(n)
    spacing = math.ceil(len(path) / 2)
    while spacing >= 1:
        candidate = path[spacing::spacing]
        if candidate and is_q_separator(graph, candidate, quality):
            logger.debug(f"q-separator of size {len(candidate)} with q={quality} (n={n})")
            return candidate
        spacing //= 2
    return None


def separation_pairs(graph: Digraph) -> List[Tuple[int, int]]:
    """All unordered vertex pairs whose removal increases the SCC count, in lexicographic order."""
    base = count_components(graph)
    return [
        (first, second)
        for first in graph.vertices
        for second in range(first + 1, graph.vertex_count)
        if count_components(graph, {first, second}) > base
    ]


def is_three_connected(
    graph: Digraph, pair_budget: int = DEFAULT_PAIR_BUDGET
) -> Optional[bool]:
    """True when a strongly connected graph on at least four vertices has no separation pair.

    Returns None without deciding when the pair enumeration would exceed pair_budget.
    """
    n = graph.vertex_count
    if n < 4:
        return False
    if n * (n - 1) // 2 > pair_budget:
        return None
    for first in graph.vertices:
        for second in range(first + 1, n):
            if count_components(graph, {first, second}) > 1:
                return False
    return True


def proper_separation_pair_vertices(graph: Digraph) -> FrozenSet[int]:
    """SAPs of the graph plus every vertex of a proper separation pair."""
    saps = strong_articulation_points(graph)
    saps_without: Dict[int, FrozenSet[int]] = {
        v: saps_of_any_graph(graph, frozenset({v})) for v in graph.vertices
    }
    members = set(saps)
    for first, partners in saps_without.items():
        for second in partners:
            if first in saps_without[second]:
                members.update((first, second))
    return frozenset(members)
