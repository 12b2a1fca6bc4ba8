"""SCC-trees, partial SCC-trees and the Δ-good test."""

import logging
import random
from collections import deque
from dataclasses import dataclass
from functools import cached_property
from typing import (
    AbstractSet,
    Deque,
    Dict,
    FrozenSet,
    List,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from dagster import DagsterLogManager, get_dagster_logger

from dagster_ftsc.exceptions import DeltaOutOfRangeError, MethodDescriptorError
from dagster_ftsc.graph import (
    Digraph,
    InducedSubgraph,
    induced_subgraph,
    require_strongly_connected,
    strong_components,
)
from dagster_ftsc.structure import (
    DEFAULT_PAIR_BUDGET,
    SplitSelector,
    is_three_connected,
    label_propagation_select,
    loop_nesting_tree,
    mcn_select,
    pagerank_select,
    q_separator,
)

logger = get_dagster_logger()

Log = Union[logging.Logger, DagsterLogManager]

SMALL = "Small"
THREE_CONNECTED = "ThreeConnected"
DELTA_GOOD = "DeltaGood"

TWO_LARGE_SCCS = "two_large_sccs"
BOTH_SIDES_EXCEED = "both_sides_exceed"

DELTA_GOOD_STRATEGIES = ("naive", "pruned")

# Used for the many trial builds of the Δ search.
_quiet = logging.getLogger("dagster_ftsc.quiet")
_quiet.setLevel(logging.WARNING)


def _tree_shape(parent: Sequence[Optional[int]]):
    """Children, depths, preorder ranks and subtree sizes of a parent array."""
    size = len(parent)
    children: List[List[int]] = [[] for _ in range(size)]
    roots = []
    for node, up in enumerate(parent):
        if up is None:
            roots.append(node)
        else:
            children[up].append(node)
    if len(roots) != 1:
        raise ValueError(f"expected exactly one root, found {len(roots)}")
    root = roots[0]

    depth = [0] * size
    preorder = [0] * size
    subtree_size = [1] * size
    visit_order = []
    stack = [root]
    while stack:
        node = stack.pop()
        preorder[node] = len(visit_order)
        visit_order.append(node)
        for child in reversed(children[node]):
            depth[child] = depth[node] + 1
            stack.append(child)
    if len(visit_order) != size:
        raise ValueError("parent array does not describe a tree")
    for node in reversed(visit_order):
        if parent[node] is not None:
            subtree_size[parent[node]] += subtree_size[node]

    return (
        root,
        tuple(tuple(c) for c in children),
        tuple(depth),
        tuple(preorder),
        tuple(subtree_size),
    )


class RootedTreeMixin:
    """Ancestry queries shared by full and partial SCC-trees.

    Requires `root`, `parent`, `children`, `tree_preorder`, `subtree_size`
    attributes and a `home(vertex)` method naming the node that owns a vertex.
    """

    def is_ancestor_node(self, ancestor: int, node: int) -> bool:
        start = self.tree_preorder[ancestor]
        return start <= self.tree_preorder[node] < start + self.subtree_size[ancestor]

    def contains(self, node: int, vertex: int) -> bool:
        """Whether vertex lies in the vertex set of node, in O(1)."""
        return self.is_ancestor_node(node, self.home(vertex))

    def path_to_node(self, node: int) -> List[int]:
        path = [node]
        while self.parent[path[-1]] is not None:
            path.append(self.parent[path[-1]])
        path.reverse()
        return path

    @cached_property
    def nodes_in_preorder(self) -> Tuple[int, ...]:
        ordered = [0] * len(self.parent)
        for node, rank in enumerate(self.tree_preorder):
            ordered[rank] = node
        return tuple(ordered)

    def subtree_nodes(self, node: int) -> Tuple[int, ...]:
        start = self.tree_preorder[node]
        return self.nodes_in_preorder[start : start + self.subtree_size[node]]


@dataclass(frozen=True)
class SccTree(RootedTreeMixin):
    """One node per vertex; the children of N(t) are the SCCs of G[S_t] - t."""

    node_of: Tuple[int, ...]
    split_vertex: Tuple[int, ...]
    parent: Tuple[Optional[int], ...]
    children: Tuple[Tuple[int, ...], ...]
    depth: Tuple[int, ...]
    tree_preorder: Tuple[int, ...]
    subtree_size: Tuple[int, ...]
    height: int
    root: int

    @classmethod
    def from_parents(
        cls, split_vertex: Sequence[int], parent: Sequence[Optional[int]]
    ) -> "SccTree":
        root, children, depth, preorder, subtree_size = _tree_shape(parent)
        node_of = [0] * len(split_vertex)
        for node, vertex in enumerate(split_vertex):
            node_of[vertex] = node
        return cls(
            node_of=tuple(node_of),
            split_vertex=tuple(split_vertex),
            parent=tuple(parent),
            children=children,
            depth=depth,
            tree_preorder=preorder,
            subtree_size=subtree_size,
            height=max(depth),
            root=root,
        )

    def home(self, vertex: int) -> int:
        return self.node_of[vertex]

    def vertex_set(self, node: int) -> List[int]:
        return sorted(self.split_vertex[k] for k in self.subtree_nodes(node))

    def to_document(self, graph: Digraph) -> List[dict]:
        return [
            {
                "node": node,
                "split_vertex": graph.label(self.split_vertex[node]),
                "parent": self.parent[node],
                "depth": self.depth[node],
                "subtree_size": self.subtree_size[node],
            }
            for node in self.nodes_in_preorder
        ]


def _choose_split(
    sub: InducedSubgraph,
    selector: SplitSelector,
    rng: random.Random,
    pending: Tuple[int, ...],
) -> Tuple[int, Tuple[int, ...]]:
    """Pick the split vertex of one subgraph, plus the separator vertices still pending."""
    local = sub.graph
    if local.vertex_count == 1:
        return sub.to_parent(0), ()
    kind = selector.kind
    if kind == "random":
        chosen = rng.randrange(local.vertex_count)
    elif kind == "mcn":
        chosen = mcn_select(local)
    elif kind == "label_propagation":
        chosen = label_propagation_select(local, selector)
    elif kind == "pagerank":
        chosen = pagerank_select(local, selector)
    elif kind == "qsep_mcn":
        if pending:
            return pending[0], pending[1:]
        separator = q_separator(local, selector)
        if separator:
            return sub.to_parent(separator[0]), tuple(sub.to_parent(v) for v in separator[1:])
        chosen = mcn_select(local)
    else:
        raise MethodDescriptorError(f"Selector {kind} cannot split a single subgraph")
    return sub.to_parent(chosen), ()


def build_scc_tree(
    graph: Digraph, selector: SplitSelector = SplitSelector(), log: Log = logger
) -> SccTree:
    """Build an SCC-tree of a strongly connected graph.

    Args:
        graph (Digraph): The graph to decompose.
        selector (SplitSelector): The split-vertex strategy.
        log (Union[logging.Logger, DagsterLogManager]): Where progress is reported.

    Returns:
        SccTree: The decomposition tree.
    """
    require_strongly_connected(graph, "build_scc_tree")

    if selector.kind == "lnt":
        headers = loop_nesting_tree(graph, 0).header
        tree = SccTree.from_parents(list(graph.vertices), list(headers))
    else:
        rng = random.Random(selector.rng_seed)
        split_vertex: List[int] = []
        parent: List[Optional[int]] = []
        work: Deque[Tuple[Tuple[int, ...], Optional[int], Tuple[int, ...]]] = deque(
            [(tuple(graph.vertices), None, ())]
        )
        while work:
            members, parent_node, pending = work.popleft()
            sub = induced_subgraph(graph, members)
            pending = tuple(v for v in pending if v in sub.index)
            split, pending = _choose_split(sub, selector, rng, pending)
            node = len(split_vertex)
            split_vertex.append(split)
            parent.append(parent_node)
            components = strong_components(sub.graph, {sub.to_local(split)})
            for component in sorted(components, key=min):
                work.append((tuple(sub.to_parent(v) for v in sorted(component)), node, pending))
        tree = SccTree.from_parents(split_vertex, parent)

    log.info(
        f"Built SCC-tree ({selector.kind}) on n={graph.vertex_count}: height {tree.height}"
    )
    return tree


def validate_scc_tree(graph: Digraph, tree: SccTree) -> bool:
    """Check the bijection and that children of every node are the SCCs of G[S_t] - t."""
    n = graph.vertex_count
    if len(tree.split_vertex) != n or sorted(tree.split_vertex) != list(range(n)):
        return False
    for node in range(n):
        members = tree.vertex_set(node)
        sub = induced_subgraph(graph, members)
        split = sub.to_local(tree.split_vertex[node])
        expected = {
            frozenset(sub.to_parent(v) for v in component)
            for component in strong_components(sub.graph, {split})
        }
        actual = [frozenset(tree.vertex_set(child)) for child in tree.children[node]]
        if len(actual) != len(expected) or set(actual) != expected:
            return False
    return True


def tree_path_and_nca(tree: RootedTreeMixin, x: int, y: int) -> Tuple[List[int], int]:
    """The common root path of N(x) and N(y), ending at their nearest common ancestor."""
    path_x = tree.path_to_node(tree.home(x))
    path_y = tree.path_to_node(tree.home(y))
    common = []
    for node_x, node_y in zip(path_x, path_y):
        if node_x != node_y:
            break
        common.append(node_x)
    return common, common[-1]


@dataclass(frozen=True)
class DeltaGoodReport:
    delta: int
    verdict: bool
    witness_pair: Optional[Tuple[int, int]] = None
    witness_vertex: Optional[int] = None
    witness_kind: Optional[str] = None


def check_delta(graph: Digraph, delta: int) -> None:
    upper = max(1, graph.edge_count)
    if not 1 <= delta <= upper:
        raise DeltaOutOfRangeError(f"delta {delta} outside [1, {upper}]")


def side_exceeds(
    graph: Digraph, vertex: int, failed: AbstractSet[int], delta: int, forward: bool
) -> bool:
    """Whether G[Succ(vertex) + failed] (Pred for forward=False) has more than delta edges.

    Succ and Pred are taken in G - failed. The search stops as soon as the
    induced edge count passes delta.
    """
    adjacency = graph.out_adjacency if forward else graph.in_adjacency
    inside = set()
    edges = 0

    def admit(member: int) -> None:
        nonlocal edges
        edges += sum(1 for head in graph.out_adjacency[member] if head in inside or head == member)
        edges += sum(1 for tail in graph.in_adjacency[member] if tail in inside)
        inside.add(member)

    for failure in sorted(failed):
        admit(failure)
    admit(vertex)
    if edges > delta:
        return True
    queue = deque([vertex])
    while queue:
        current = queue.popleft()
        for neighbor in adjacency[current]:
            if neighbor in inside:
                continue
            admit(neighbor)
            if edges > delta:
                return True
            queue.append(neighbor)
    return False


def _pair_violation(
    graph: Digraph,
    failed: FrozenSet[int],
    components: List[List[int]],
    delta: int,
    representatives_only: bool,
) -> Optional[Tuple[str, Optional[int]]]:
    large = [c for c in components if graph.induced_edge_count(set(c)) > delta]
    if len(large) >= 2:
        return TWO_LARGE_SCCS, None
    core = set(large[0]) if large else set()
    if representatives_only:
        candidates = sorted(min(c) for c in components if c[0] not in core)
    else:
        candidates = sorted(v for c in components if c[0] not in core for v in c)
    for vertex in candidates:
        if side_exceeds(graph, vertex, failed, delta, True) and side_exceeds(
            graph, vertex, failed, delta, False
        ):
            return BOTH_SIDES_EXCEED, vertex
    return None


def is_delta_good(graph: Digraph, delta: int, strategy: str = "pruned") -> DeltaGoodReport:
    """Test whether a strongly connected graph is Δ-good.

    "naive" scans every separation pair in lexicographic order and checks every
    vertex outside the large SCC. "pruned" loops over single removals first,
    rejects as soon as G - v has three large SCCs, and checks one vertex per
    SCC of G - {v, u}. Both give the same verdict.
    """
    check_delta(graph, delta)
    require_strongly_connected(graph, "is_delta_good")
    n = graph.vertex_count

    if strategy == "naive":
        for first in graph.vertices:
            for second in range(first + 1, n):
                failed = frozenset((first, second))
                components = strong_components(graph, failed)
                if len(components) <= 1:
                    continue
                violation = _pair_violation(graph, failed, components, delta, False)
                if violation:
                    kind, vertex = violation
                    return DeltaGoodReport(delta, False, (first, second), vertex, kind)
        return DeltaGoodReport(delta, True)

    if strategy != "pruned":
        raise MethodDescriptorError(f"Unknown Δ-good strategy {strategy}")

    for first in graph.vertices:
        single = strong_components(graph, {first})
        large = sum(1 for c in single if graph.induced_edge_count(set(c)) > delta)
        if large >= 3:
            # Any second removal destroys at most one of them.
            other = 1 if first == 0 else 0
            pair = (min(first, other), max(first, other))
            return DeltaGoodReport(delta, False, pair, None, TWO_LARGE_SCCS)
        for second in range(first + 1, n):
            failed = frozenset((first, second))
            components = strong_components(graph, failed)
            if len(components) <= 1:
                continue
            violation = _pair_violation(graph, failed, components, delta, True)
            if violation:
                kind, vertex = violation
                return DeltaGoodReport(delta, False, (first, second), vertex, kind)
    return DeltaGoodReport(delta, True)


def find_good_separation_pair(graph: Digraph, delta: int) -> Optional[Tuple[int, int]]:
    """The lexicographically first separation pair leaving only SCCs with at most delta edges."""
    for first in graph.vertices:
        for second in range(first + 1, graph.vertex_count):
            components = strong_components(graph, {first, second})
            if len(components) > 1 and all(
                graph.induced_edge_count(set(c)) <= delta for c in components
            ):
                return first, second
    return None


def _shrinking_pair(graph: Digraph, delta: int) -> Optional[Tuple[int, int]]:
    """First separation pair whose SCCs are all small or have fewer than m - delta edges."""
    limit = graph.edge_count - delta
    for first in graph.vertices:
        for second in range(first + 1, graph.vertex_count):
            components = strong_components(graph, {first, second})
            if len(components) <= 1:
                continue
            counts = (graph.induced_edge_count(set(c)) for c in components)
            if all(count <= delta or count < limit for count in counts):
                return first, second
    return None


@dataclass(frozen=True)
class PartialNode:
    vertices: Tuple[int, ...]
    edge_count: int
    parent: Optional[int]
    case: int
    split_vertex: Optional[int] = None
    leaf_kind: Optional[str] = None
    second_of_pair: bool = False

    @property
    def is_leaf(self) -> bool:
        return self.leaf_kind is not None


@dataclass(frozen=True)
class PartialSccTree(RootedTreeMixin):
    """SCC-tree whose expansion stops at Small, ThreeConnected and DeltaGood leaves."""

    delta: int
    nodes: Tuple[PartialNode, ...]
    home_node: Tuple[int, ...]
    parent: Tuple[Optional[int], ...]
    children: Tuple[Tuple[int, ...], ...]
    depth: Tuple[int, ...]
    tree_preorder: Tuple[int, ...]
    subtree_size: Tuple[int, ...]
    height: int
    root: int

    def home(self, vertex: int) -> int:
        return self.home_node[vertex]

    @property
    def case_trace(self) -> Dict[int, int]:
        return {k: node.case for k, node in enumerate(self.nodes) if not node.is_leaf}

    def leaves(self) -> List[int]:
        return [k for k, node in enumerate(self.nodes) if node.is_leaf]

    def split_path(self, node: int) -> List[int]:
        """Split vertices chosen on the way from the root down to node."""
        return [
            self.nodes[k].split_vertex
            for k in self.path_to_node(node)
            if not self.nodes[k].is_leaf
        ]

    def max_case5_per_path(self) -> int:
        """Most shrinking-pair expansions on any root-to-leaf path."""
        return max(
            sum(
                1
                for k in self.path_to_node(leaf)
                if self.nodes[k].case == 5 and not self.nodes[k].second_of_pair
            )
            for leaf in self.leaves()
        )

    def to_document(self, graph: Digraph) -> List[dict]:
        document = []
        for k in self.nodes_in_preorder:
            node = self.nodes[k]
            entry = {
                "node": k,
                "parent": node.parent,
                "depth": self.depth[k],
                "subtree_size": self.subtree_size[k],
                "case": node.case,
            }
            if node.is_leaf:
                entry["leaf_kind"] = node.leaf_kind
                entry["vertices"] = [graph.label(v) for v in node.vertices]
                entry["edge_count"] = node.edge_count
            else:
                entry["split_vertex"] = graph.label(node.split_vertex)
                entry["second_of_pair"] = node.second_of_pair
            document.append(entry)
        return document


def _partial_step(
    sub: InducedSubgraph,
    delta: int,
    forced: Optional[Tuple[int, int]],
    pair_budget: int,
) -> Tuple[Optional[str], Optional[int], int, bool, Optional[int]]:
    """Decide one node: (leaf kind, split vertex, case, second of pair, forced next split)."""
    local = sub.graph
    if local.edge_count <= delta:
        return SMALL, None, 1, False, None
    if forced is not None:
        vertex, case = forced
        return None, vertex, case, True, None
    if is_three_connected(local, pair_budget):
        return THREE_CONNECTED, None, 2, False, None
    pair = find_good_separation_pair(local, delta)
    if pair is not None:
        return None, sub.to_parent(pair[0]), 3, False, sub.to_parent(pair[1])
    if is_delta_good(local, delta, "pruned").verdict:
        return DELTA_GOOD, None, 4, False, None
    pair = _shrinking_pair(local, delta)
    assert pair is not None, "a graph that is not Δ-good has a shrinking separation pair"
    return None, sub.to_parent(pair[0]), 5, False, sub.to_parent(pair[1])


def build_partial_scc_tree(
    graph: Digraph,
    delta: int,
    pair_budget: int = DEFAULT_PAIR_BUDGET,
    log: Log = logger,
) -> PartialSccTree:
    """Build a partial SCC-tree, trying Cases 1 to 5 in order at every node.

    Cases 3 and 5 split on the two vertices of a separation pair over two
    consecutive levels: the first vertex at the node, the second in whichever
    child still contains it (unless that child is already small).

    Args:
        graph (Digraph): A strongly connected graph.
        delta (int): The Δ parameter in [1, m].
        pair_budget (int): Largest number of vertex pairs the 3-connectivity test may enumerate.
        log (Union[logging.Logger, DagsterLogManager]): Where progress is reported.
    """
    check_delta(graph, delta)
    require_strongly_connected(graph, "build_partial_scc_tree")

    nodes: List[PartialNode] = []
    work: Deque[Tuple[Tuple[int, ...], Optional[int], Optional[Tuple[int, int]]]] = deque(
        [(tuple(graph.vertices), None, None)]
    )
    while work:
        members, parent_node, forced = work.popleft()
        sub = induced_subgraph(graph, members)
        leaf_kind, split, case, second, follow = _partial_step(sub, delta, forced, pair_budget)
        node_id = len(nodes)
        nodes.append(
            PartialNode(
                vertices=members,
                edge_count=sub.graph.edge_count,
                parent=parent_node,
                case=case,
                split_vertex=split,
                leaf_kind=leaf_kind,
                second_of_pair=second,
            )
        )
        log.debug(
            f"Partial node {node_id}: case {case}, n={len(members)}, m={sub.graph.edge_count}"
        )
        if leaf_kind is not None:
            continue
        components = strong_components(sub.graph, {sub.to_local(split)})
        for component in sorted(components, key=min):
            child = tuple(sub.to_parent(v) for v in sorted(component))
            child_forced = (follow, case) if follow is not None and follow in child else None
            work.append((child, node_id, child_forced))

    root, children, depth, preorder, subtree_size = _tree_shape([node.parent for node in nodes])
    home_node = [0] * graph.vertex_count
    for node_id, node in enumerate(nodes):
        if node.is_leaf:
            for vertex in node.vertices:
                home_node[vertex] = node_id
        else:
            home_node[node.split_vertex] = node_id

    tree = PartialSccTree(
        delta=delta,
        nodes=tuple(nodes),
        home_node=tuple(home_node),
        parent=tuple(node.parent for node in nodes),
        children=children,
        depth=depth,
        tree_preorder=preorder,
        subtree_size=subtree_size,
        height=max(depth),
        root=root,
    )
    log.info(
        f"Built partial SCC-tree with Δ={delta}: {len(nodes)} nodes, "
        f"{len(tree.leaves())} leaves, height {tree.height}"
    )
    return tree


def delta_predicate(graph: Digraph, delta: int, pair_budget: int = DEFAULT_PAIR_BUDGET) -> bool:
    """Δ-good, or the partial SCC-tree has height at most Δ."""
    if is_delta_good(graph, delta, "pruned").verdict:
        return True
    return build_partial_scc_tree(graph, delta, pair_budget, log=_quiet).height <= delta


def find_min_delta(
    graph: Digraph, pair_budget: int = DEFAULT_PAIR_BUDGET, log: Log = logger
) -> int:
    """Binary search over [1, m] for the smallest Δ satisfying delta_predicate.

    The predicate is treated as monotone; the returned value is re-checked.
    """
    require_strongly_connected(graph, "find_min_delta")
    low, high = 1, max(1, graph.edge_count)
    while low < high:
        middle = (low + high) // 2
        if delta_predicate(graph, middle, pair_budget):
            high = middle
        else:
            low = middle + 1
        log.debug(f"Δ search window [{low}, {high}]")
    if not delta_predicate(graph, low, pair_budget):
        log.warning(f"Δ={low} failed re-verification; falling back to m")
        low = max(1, graph.edge_count)
    log.info(f"Smallest Δ found: {low}")
    return low
