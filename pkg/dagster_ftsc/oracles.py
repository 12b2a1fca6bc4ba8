"""Query engines built on decomposition trees.

Every engine here first applies the degenerate-query contract, then maps the
query into the SCC of the input graph that holds x and y (x and y in different
SCCs are never strongly connected), and only then walks a tree.
"""

import logging
import threading
from collections import deque
from dataclasses import dataclass, field
from typing import (
    Callable,
    Dict,
    FrozenSet,
    List,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
)

from dagster import DagsterLogManager, get_dagster_logger

from dagster_ftsc.auxiliary import (
    OneFtScOracle,
    TwoFtSsrOracle,
    search_1ftsc,
    search_2ftssr,
)
from dagster_ftsc.exceptions import SeedError
from dagster_ftsc.graph import (
    Digraph,
    InducedSubgraph,
    compute_sccs,
    induced_subgraph,
    require_strongly_connected,
    strong_components,
)
from dagster_ftsc.heuristics import (
    AncestrySeed,
    EdgeAccessCounter,
    ancestry_seed_build,
    bi_bfs_query,
    bi_bfs_reach,
    sbfs_query,
)
from dagster_ftsc.queries import FtQuery, QueryOutcome, degenerate_answer
from dagster_ftsc.scc_tree import (
    THREE_CONNECTED,
    PartialSccTree,
    RootedTreeMixin,
    SccTree,
    _tree_shape,
    build_partial_scc_tree,
    build_scc_tree,
    tree_path_and_nca,
)
from dagster_ftsc.structure import DEFAULT_PAIR_BUDGET, SplitSelector

logger = get_dagster_logger()

Log = Union[logging.Logger, DagsterLogManager]


@dataclass(frozen=True)
class LocalQuery:
    component: int
    x: int
    y: int
    failed: FrozenSet[int]

    def failure_pair(self) -> Tuple[Optional[int], Optional[int]]:
        ordered = sorted(self.failed)
        if not ordered:
            return None, None
        return ordered[0], ordered[-1]


class ComponentForest:
    """The SCCs of a graph as induced subgraphs, for engines that need strong connectivity."""

    def __init__(self, graph: Digraph) -> None:
        self.graph = graph
        labeling = compute_sccs(graph)
        self.component_of = labeling.component_of
        self.components = [induced_subgraph(graph, members) for members in labeling.members()]

    def nontrivial(self) -> List[int]:
        return [k for k, sub in enumerate(self.components) if sub.graph.vertex_count > 1]

    def localize(self, query: FtQuery) -> Optional[LocalQuery]:
        component = self.component_of[query.x]
        if component != self.component_of[query.y]:
            return None
        sub = self.components[component]
        return LocalQuery(
            component=component,
            x=sub.to_local(query.x),
            y=sub.to_local(query.y),
            failed=frozenset(sub.local_set(query.failed)),
        )


class BiBfsTwoFtSsr(TwoFtSsrOracle):
    """Answers reachability from and to the source by bidirectional BFS."""

    def __init__(self, subgraph: InducedSubgraph, source: int) -> None:
        self.subgraph = subgraph
        self.source = source
        self._local_source = subgraph.to_local(source)

    def _reach(self, start: int, end: int, f1: Optional[int], f2: Optional[int]) -> bool:
        local_start = self.subgraph.to_local(start)
        local_end = self.subgraph.to_local(end)
        if local_start is None or local_end is None:
            return False
        blocked = self.subgraph.local_set(f for f in (f1, f2) if f is not None)
        return bi_bfs_reach(
            self.subgraph.graph, local_start, local_end, blocked, EdgeAccessCounter()
        )

    def reach_from_source(self, vertex: int, f1: Optional[int], f2: Optional[int]) -> bool:
        return self._reach(self.source, vertex, f1, f2)

    def reach_to_source(self, vertex: int, f1: Optional[int], f2: Optional[int]) -> bool:
        return self._reach(vertex, self.source, f1, f2)


class NodeOracles:
    """Per-node subgraphs and oracles of one tree, each built once on first use."""

    def __init__(
        self,
        graph: Digraph,
        vertex_set: Callable[[int], Sequence[int]],
        split_of: Callable[[int], Optional[int]],
        simulate: bool = False,
    ) -> None:
        self.graph = graph
        self.vertex_set = vertex_set
        self.split_of = split_of
        self.simulate = simulate
        self._lock = threading.RLock()
        self._subgraphs: Dict[int, InducedSubgraph] = {}
        self._ssr: Dict[int, TwoFtSsrOracle] = {}
        self._onefault: Dict[int, OneFtScOracle] = {}

    def _once(self, cache: dict, node: int, factory: Callable[[], object]):
        value = cache.get(node)
        if value is None:
            with self._lock:
                value = cache.get(node)
                if value is None:
                    value = factory()
                    cache[node] = value
        return value

    def subgraph(self, node: int) -> InducedSubgraph:
        return self._once(
            self._subgraphs, node, lambda: induced_subgraph(self.graph, self.vertex_set(node))
        )

    def ssr(self, node: int) -> TwoFtSsrOracle:
        def build() -> TwoFtSsrOracle:
            if self.simulate:
                return BiBfsTwoFtSsr(self.subgraph(node), self.split_of(node))
            return search_2ftssr(self.subgraph(node), self.split_of(node))

        return self._once(self._ssr, node, build)

    def onefault(self, node: int) -> OneFtScOracle:
        return self._once(self._onefault, node, lambda: search_1ftsc(self.subgraph(node)))


def three_step_descent(
    tree: RootedTreeMixin,
    oracles: NodeOracles,
    query: LocalQuery,
    outcome: QueryOutcome,
) -> Optional[int]:
    """Walk the common root path of x and y applying the three query steps.

    Sets outcome.answer and returns None when an internal node decides the
    query; returns the leaf node otherwise (x and y share a leaf).
    """
    x, y, failed = query.x, query.y, query.failed
    f1, f2 = query.failure_pair()
    path, nca = tree_path_and_nca(tree, x, y)
    for position, node in enumerate(path):
        outcome.depth_reached = tree.depth[node]
        split = oracles.split_of(node)
        if split is None:
            return node

        if split in failed:
            if node == nca:
                outcome.answer = False
                return None
            child = path[position + 1]
            others = failed - {split}
            other = next(iter(others)) if others else None
            if other is None or not tree.contains(child, other):
                # G_w is strongly connected and holds x and y.
                outcome.answer = True
                return None
            outcome.onefault_calls += 1
            outcome.answer = oracles.onefault(child).ftsc(x, y, other)
            return None

        ssr = oracles.ssr(node)
        outcome.ssr_calls += 4
        from_x = ssr.reach_from_source(x, f1, f2)
        from_y = ssr.reach_from_source(y, f1, f2)
        to_x = ssr.reach_to_source(x, f1, f2)
        to_y = ssr.reach_to_source(y, f1, f2)
        if from_x != from_y or to_x != to_y:
            outcome.answer = False
            return None
        if from_x and to_x:
            outcome.answer = True
            return None
        if node == nca:
            outcome.answer = False
            return None
    raise AssertionError("the common path always ends at the nearest common ancestor")


def _prepare(
    forest: ComponentForest, query: FtQuery
) -> Tuple[Optional[QueryOutcome], Optional[LocalQuery]]:
    # Answers that need no tree walk are produced at the root.
    trivial = degenerate_answer(query)
    if trivial is not None:
        return QueryOutcome(answer=trivial, depth_reached=0), None
    local = forest.localize(query)
    if local is None:
        return QueryOutcome(answer=False, depth_reached=0), None
    if not local.failed:
        return QueryOutcome(answer=True, depth_reached=0), None
    return None, local


class SccTreeOracle:
    """2-FT-SC oracle over one SCC-tree per SCC of the graph."""

    def __init__(
        self,
        graph: Digraph,
        selector: SplitSelector = SplitSelector(),
        eager: bool = False,
        log: Log = logger,
    ) -> None:
        self.graph = graph
        self.selector = selector
        self.forest = ComponentForest(graph)
        self.trees: Dict[int, SccTree] = {}
        self.oracles: Dict[int, NodeOracles] = {}
        for component in self.forest.nontrivial():
            sub = self.forest.components[component].graph
            tree = build_scc_tree(sub, selector, log)
            self.trees[component] = tree
            self.oracles[component] = NodeOracles(
                sub,
                vertex_set=tree.vertex_set,
                split_of=lambda node, tree=tree: tree.split_vertex[node],
            )
        if eager:
            for component, tree in self.trees.items():
                for node in range(len(tree.split_vertex)):
                    self.oracles[component].ssr(node)

    @property
    def height(self) -> int:
        return max((tree.height for tree in self.trees.values()), default=0)

    def query(self, query: FtQuery) -> QueryOutcome:
        outcome, local = _prepare(self.forest, query)
        if outcome is not None:
            return outcome
        outcome = QueryOutcome(answer=False)
        tree = self.trees[local.component]
        three_step_descent(tree, self.oracles[local.component], local, outcome)
        return outcome


def tree_oracle_query(oracle: SccTreeOracle, query: FtQuery) -> QueryOutcome:
    return oracle.query(query)


def _bounded_search(
    adjacency, source: int, failed: FrozenSet[int], limit: int, counter: EdgeAccessCounter
) -> Tuple[bool, Set[int]]:
    """Search until `limit` edges have been traversed; returns (overflowed, reached)."""
    reached = {source}
    queue = deque([source])
    traversed = 0
    while queue:
        vertex = queue.popleft()
        for neighbor in adjacency[vertex]:
            counter.tick()
            traversed += 1
            if traversed >= limit:
                return True, reached
            if neighbor in failed or neighbor in reached:
                continue
            reached.add(neighbor)
            queue.append(neighbor)
    return False, reached


def delta_bounded_query(graph: Digraph, query: FtQuery, delta: int) -> Tuple[bool, int]:
    """Answer a query on a Δ-good graph with at most 4Δ+4 edge accesses.

    Searches from x and y (forward first, backward only if needed) stop after
    Δ+1 traversed edges. Both directions overflowing for a vertex places it in
    the unique large SCC of G - {f1, f2}.

    Δ-goodness says nothing about a single failure, so f1 == f2 runs an
    unbounded bidirectional search and reports every edge it reads.

    Returns:
        Tuple[bool, int]: The answer and the number of edges accessed.
    """
    trivial = degenerate_answer(query)
    if trivial is not None:
        return trivial, 0
    if query.f1 == query.f2:
        counter = EdgeAccessCounter()
        return bi_bfs_query(graph, query, counter), counter.count

    counter = EdgeAccessCounter(limit=4 * delta + 4)
    failed = query.failed
    limit = delta + 1

    def decide(adjacency) -> Optional[bool]:
        over_x, reached_x = _bounded_search(adjacency, query.x, failed, limit, counter)
        over_y, reached_y = _bounded_search(adjacency, query.y, failed, limit, counter)
        if over_x and over_y:
            return None
        if over_x != over_y:
            return False
        return query.y in reached_x and query.x in reached_y

    answer = decide(graph.out_adjacency)
    if answer is None:
        answer = decide(graph.in_adjacency)
    if answer is None:
        answer = True
    return answer, counter.count


class PartialTreeOracle:
    """2-FT-SC oracle over partial SCC-trees, answering at leaves in O(Δ)."""

    def __init__(
        self,
        graph: Digraph,
        delta: int,
        pair_budget: int = DEFAULT_PAIR_BUDGET,
        eager: bool = False,
        log: Log = logger,
    ) -> None:
        self.graph = graph
        self.delta = delta
        self.forest = ComponentForest(graph)
        self.trees: Dict[int, PartialSccTree] = {}
        self.oracles: Dict[int, NodeOracles] = {}
        for component in self.forest.nontrivial():
            sub = self.forest.components[component].graph
            effective = min(delta, max(1, sub.edge_count))
            tree = build_partial_scc_tree(sub, effective, pair_budget, log)
            self.trees[component] = tree
            self.oracles[component] = NodeOracles(
                sub,
                vertex_set=lambda node, tree=tree: tree.nodes[node].vertices,
                split_of=lambda node, tree=tree: tree.nodes[node].split_vertex,
            )
        if eager:
            for component, tree in self.trees.items():
                for node, entry in enumerate(tree.nodes):
                    if not entry.is_leaf:
                        self.oracles[component].ssr(node)

    @property
    def height(self) -> int:
        return max((tree.height for tree in self.trees.values()), default=0)

    def query(self, query: FtQuery) -> QueryOutcome:
        outcome, local = _prepare(self.forest, query)
        if outcome is not None:
            return outcome
        tree = self.trees[local.component]
        oracles = self.oracles[local.component]
        outcome = QueryOutcome(answer=False)
        leaf = three_step_descent(tree, oracles, local, outcome)
        if leaf is None:
            return outcome

        node = tree.nodes[leaf]
        leaf_graph = oracles.subgraph(leaf)
        inside = sorted(f for f in local.failed if f in leaf_graph.index)
        if node.leaf_kind == THREE_CONNECTED or not inside:
            outcome.answer = True
        elif len(inside) == 1:
            outcome.onefault_calls += 1
            outcome.answer = oracles.onefault(leaf).ftsc(local.x, local.y, inside[0])
        else:
            leaf_query = FtQuery(
                leaf_graph.to_local(local.x),
                leaf_graph.to_local(local.y),
                leaf_graph.to_local(inside[0]),
                leaf_graph.to_local(inside[1]),
            )
            outcome.answer, edges = delta_bounded_query(
                leaf_graph.graph, leaf_query, tree.delta
            )
            outcome.edges_accessed += edges
        return outcome


def partial_tree_query(oracle: PartialTreeOracle, query: FtQuery) -> QueryOutcome:
    return oracle.query(query)


@dataclass(frozen=True)
class ChNode:
    vertices: Tuple[int, ...]
    parent: Optional[int]
    split_vertex: Optional[int] = None

    @property
    def is_leaf(self) -> bool:
        return self.split_vertex is None


@dataclass(frozen=True)
class ChTree(RootedTreeMixin):
    """SCC-tree split on CH-seeds, with ancestry seeds at the leaves."""

    seeds: Tuple[int, ...]
    nodes: Tuple[ChNode, ...]
    home_node: Tuple[int, ...]
    parent: Tuple[Optional[int], ...]
    children: Tuple[Tuple[int, ...], ...]
    depth: Tuple[int, ...]
    tree_preorder: Tuple[int, ...]
    subtree_size: Tuple[int, ...]
    height: int
    root: int
    leaf_seeds: Dict[int, Tuple[AncestrySeed, ...]] = field(compare=False, hash=False)

    def home(self, vertex: int) -> int:
        return self.home_node[vertex]


def validate_seeds(graph: Digraph, seeds: Sequence[int]) -> None:
    if len(set(seeds)) != len(seeds):
        raise SeedError(f"duplicate seeds in {list(seeds)}")
    for seed in seeds:
        if not 0 <= seed < graph.vertex_count:
            raise SeedError(f"seed {seed} outside [0, {graph.vertex_count})")


def chtree_build(graph: Digraph, seeds: Sequence[int], leaf_budget: int = 1) -> ChTree:
    """Expand an SCC-tree on the seeds in list order.

    A node without an unused seed becomes a leaf.

    Every leaf keeps `leaf_budget` ancestry seeds rooted at its lowest-index vertices.
    """
    require_strongly_connected(graph, "chtree_build")
    validate_seeds(graph, seeds)

    nodes: List[ChNode] = []
    leaf_seeds: Dict[int, Tuple[AncestrySeed, ...]] = {}
    work = deque([(tuple(graph.vertices), None)])
    while work:
        members, parent_node = work.popleft()
        member_set = set(members)
        node_id = len(nodes)
        split = next((seed for seed in seeds if seed in member_set), None)
        nodes.append(ChNode(vertices=members, parent=parent_node, split_vertex=split))
        sub = induced_subgraph(graph, members)
        if split is None:
            roots = range(min(leaf_budget, sub.graph.vertex_count))
            leaf_seeds[node_id] = tuple(ancestry_seed_build(sub.graph, r) for r in roots)
            continue
        components = strong_components(sub.graph, {sub.to_local(split)})
        for component in sorted(components, key=min):
            work.append((tuple(sub.to_parent(v) for v in sorted(component)), node_id))

    root, children, depth, preorder, subtree_size = _tree_shape([n.parent for n in nodes])
    home_node = [0] * graph.vertex_count
    for node_id, node in enumerate(nodes):
        if node.is_leaf:
            for vertex in node.vertices:
                home_node[vertex] = node_id
        else:
            home_node[node.split_vertex] = node_id
    return ChTree(
        seeds=tuple(seeds),
        nodes=tuple(nodes),
        home_node=tuple(home_node),
        parent=tuple(n.parent for n in nodes),
        children=children,
        depth=depth,
        tree_preorder=preorder,
        subtree_size=subtree_size,
        height=max(depth),
        root=root,
        leaf_seeds=leaf_seeds,
    )


class ChTreeOracle:
    """CH-seeds organized as a decomposition tree; leaves fall back to seeded BFS.

    In simulation mode the internal-node reachability checks run bidirectional
    BFS instead of oracle lookups; they are still reported as oracle calls.
    """

    def __init__(
        self,
        graph: Digraph,
        seeds: Sequence[int],
        leaf_budget: int = 1,
        simulate: bool = False,
        log: Log = logger,
    ) -> None:
        validate_seeds(graph, seeds)
        self.graph = graph
        self.forest = ComponentForest(graph)
        self.trees: Dict[int, ChTree] = {}
        self.oracles: Dict[int, NodeOracles] = {}
        for component in self.forest.nontrivial():
            sub = self.forest.components[component]
            local_seeds = [sub.to_local(s) for s in seeds if s in sub.index]
            tree = chtree_build(sub.graph, local_seeds, leaf_budget)
            self.trees[component] = tree
            self.oracles[component] = NodeOracles(
                sub.graph,
                vertex_set=lambda node, tree=tree: tree.nodes[node].vertices,
                split_of=lambda node, tree=tree: tree.nodes[node].split_vertex,
                simulate=simulate,
            )
        log.info(
            f"Built ChTree with {len(seeds)} seeds over {len(self.trees)} SCC(s)"
            + (" in simulation mode" if simulate else "")
        )

    def query(self, query: FtQuery) -> QueryOutcome:
        outcome, local = _prepare(self.forest, query)
        if outcome is not None:
            outcome.answered_by_seed = True
            return outcome
        tree = self.trees[local.component]
        oracles = self.oracles[local.component]
        outcome = QueryOutcome(answer=False, answered_by_seed=True)
        leaf = three_step_descent(tree, oracles, local, outcome)
        if leaf is None:
            return outcome

        leaf_graph = oracles.subgraph(leaf)
        inside = sorted(f for f in local.failed if f in leaf_graph.index)
        if not inside:
            outcome.answer = True
            return outcome
        leaf_query = FtQuery(
            leaf_graph.to_local(local.x),
            leaf_graph.to_local(local.y),
            leaf_graph.to_local(inside[0]),
            leaf_graph.to_local(inside[-1]),
        )
        counter = EdgeAccessCounter()
        leaf_outcome = sbfs_query(leaf_graph.graph, tree.leaf_seeds[leaf], leaf_query, counter)
        outcome.answer = leaf_outcome.answer
        outcome.edges_accessed += leaf_outcome.edges_accessed
        outcome.answered_by_seed = leaf_outcome.answered_by_seed
        return outcome


def chtree_query(oracle: ChTreeOracle, query: FtQuery) -> QueryOutcome:
    return oracle.query(query)
