"""Directed graph substrate: representation, ingestion, SCCs and BFS structures."""

from collections import deque
from dataclasses import dataclass, field
from typing import (
    IO,
    AbstractSet,
    Dict,
    Iterable,
    Iterator,
    List,
    Mapping,
    Optional,
    Sequence,
    Tuple,
    Union,
)

from dagster import get_dagster_logger

from dagster_ftsc.exceptions import (
    FtscError,
    GraphFormatError,
    GraphParseError,
    NotStronglyConnectedError,
    RankOutOfRangeError,
)

logger = get_dagster_logger()

GRAPH_FORMATS = ("snap", "dimacs")
NO_VERTICES: AbstractSet[int] = frozenset()


@dataclass(frozen=True)
class Digraph:
    """Immutable directed graph over the dense vertex range 0..n-1.

    Adjacency order is the order in which edges were supplied, which makes
    every traversal (and every edge-access count) reproducible.
    """

    vertex_count: int
    edge_count: int
    out_adjacency: Tuple[Tuple[int, ...], ...]
    in_adjacency: Tuple[Tuple[int, ...], ...]
    original_ids: Optional[Tuple[str, ...]] = None

    @classmethod
    def from_edges(
        cls,
        vertex_count: int,
        edges: Iterable[Tuple[int, int]],
        original_ids: Optional[Sequence[str]] = None,
    ) -> "Digraph":
        out_lists: List[List[int]] = [[] for _ in range(vertex_count)]
        in_lists: List[List[int]] = [[] for _ in range(vertex_count)]
        edge_count = 0
        for tail, head in edges:
            if not (0 <= tail < vertex_count and 0 <= head < vertex_count):
                raise GraphFormatError(
                    f"edge ({tail}, {head}) outside vertex range [0, {vertex_count})"
                )
            out_lists[tail].append(head)
            in_lists[head].append(tail)
            edge_count += 1
        return cls(
            vertex_count=vertex_count,
            edge_count=edge_count,
            out_adjacency=tuple(tuple(heads) for heads in out_lists),
            in_adjacency=tuple(tuple(tails) for tails in in_lists),
            original_ids=tuple(original_ids) if original_ids is not None else None,
        )

    @property
    def vertices(self) -> range:
        return range(self.vertex_count)

    def edges(self) -> Iterator[Tuple[int, int]]:
        for tail, heads in enumerate(self.out_adjacency):
            for head in heads:
                yield tail, head

    def label(self, vertex: int) -> str:
        if self.original_ids is None:
            return str(vertex)
        return self.original_ids[vertex]

    def induced_edge_count(self, vertices: AbstractSet[int]) -> int:
        return sum(
            1 for tail in vertices for head in self.out_adjacency[tail] if head in vertices
        )


@dataclass(frozen=True)
class InducedSubgraph:
    """An induced subgraph together with the map back to its parent graph."""

    graph: Digraph
    vertices: Tuple[int, ...]
    index: Mapping[int, int] = field(repr=False)

    @classmethod
    def whole(cls, graph: Digraph) -> "InducedSubgraph":
        vertices = tuple(graph.vertices)
        return cls(graph=graph, vertices=vertices, index={v: v for v in vertices})

    def to_local(self, vertex: int) -> Optional[int]:
        return self.index.get(vertex)

    def to_parent(self, vertex: int) -> int:
        return self.vertices[vertex]

    def local_set(self, vertices: Iterable[int]) -> AbstractSet[int]:
        """Local indices of the given parent vertices that lie in the subgraph."""
        return frozenset(self.index[v] for v in vertices if v in self.index)


@dataclass(frozen=True)
class BfsTree:
    root: int
    parent: Tuple[Optional[int], ...]
    level: Tuple[Optional[int], ...]
    preorder: Tuple[Optional[int], ...]
    descendant_count: Tuple[Optional[int], ...]

    def reached(self, vertex: int) -> bool:
        return self.level[vertex] is not None

    def is_ancestor(self, ancestor: int, vertex: int) -> bool:
        """Inclusive ancestry: every reached vertex is its own ancestor."""
        start = self.preorder[ancestor]
        rank = self.preorder[vertex]
        if start is None or rank is None:
            return False
        return start <= rank < start + self.descendant_count[ancestor]

    @property
    def depth(self) -> int:
        return max((lvl for lvl in self.level if lvl is not None), default=0)


@dataclass(frozen=True)
class SccLabeling:
    component_of: Tuple[int, ...]
    component_count: int
    component_sizes: Tuple[int, ...]
    component_edge_counts: Tuple[int, ...]

    def members(self) -> List[List[int]]:
        groups: List[List[int]] = [[] for _ in range(self.component_count)]
        for vertex, component in enumerate(self.component_of):
            groups[component].append(vertex)
        return groups


def _decode_lines(data: Union[bytes, str, IO]) -> List[str]:
    if hasattr(data, "read"):
        data = data.read()
    if isinstance(data, bytes):
        data = data.decode("utf-8")
    return data.splitlines()


class _Relabeler:
    def __init__(self) -> None:
        self.index: Dict[str, int] = {}
        self.labels: List[str] = []

    def __call__(self, label: str) -> int:
        vertex = self.index.get(label)
        if vertex is None:
            vertex = len(self.labels)
            self.index[label] = vertex
            self.labels.append(label)
        return vertex


def _parse_snap(lines: List[str]) -> Tuple[Digraph, Dict[str, int]]:
    relabel = _Relabeler()
    edges: List[Tuple[int, int]] = []
    for line_number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        tokens = stripped.split()
        if len(tokens) < 2:
            raise GraphParseError(f"expected 'u v', got {stripped!r}", line_number)
        edges.append((relabel(tokens[0]), relabel(tokens[1])))
    graph = Digraph.from_edges(len(relabel.labels), edges, relabel.labels)
    return graph, relabel.index


def _parse_dimacs(lines: List[str]) -> Tuple[Digraph, Dict[str, int]]:
    relabel = _Relabeler()
    header: Optional[Tuple[int, int]] = None
    edges: List[Tuple[int, int]] = []
    for line_number, line in enumerate(lines, start=1):
        stripped = line.strip()
        if not stripped or stripped.startswith("c"):
            continue
        tokens = stripped.split()
        if tokens[0] == "p":
            if header is not None:
                raise GraphFormatError(f"line {line_number}: second problem line")
            if len(tokens) != 4 or tokens[1] != "sp":
                raise GraphParseError(f"expected 'p sp n m', got {stripped!r}", line_number)
            try:
                header = (int(tokens[2]), int(tokens[3]))
            except ValueError as error:
                raise GraphParseError(str(error), line_number) from error
        elif tokens[0] == "a":
            if header is None:
                raise GraphFormatError(f"line {line_number}: arc before problem line")
            if len(tokens) != 4:
                raise GraphParseError(f"expected 'a u v w', got {stripped!r}", line_number)
            try:
                tail, head = int(tokens[1]), int(tokens[2])
                float(tokens[3])
            except ValueError as error:
                raise GraphParseError(str(error), line_number) from error
            for endpoint in (tail, head):
                if not 1 <= endpoint <= header[0]:
                    raise GraphFormatError(
                        f"line {line_number}: vertex {endpoint} outside 1..{header[0]}"
                    )
            edges.append((relabel(tokens[1]), relabel(tokens[2])))
        else:
            raise GraphParseError(f"unknown line type {tokens[0]!r}", line_number)

    if header is None:
        raise GraphFormatError("missing 'p sp n m' problem line")
    declared_vertices, declared_arcs = header
    if len(edges) != declared_arcs:
        raise GraphFormatError(
            f"header declares {declared_arcs} arcs but {len(edges)} were read"
        )
    # Vertices that never appear on an arc follow in numeric order.
    for label in range(1, declared_vertices + 1):
        relabel(str(label))
    graph = Digraph.from_edges(len(relabel.labels), edges, relabel.labels)
    return graph, relabel.index


def parse_graph(
    data: Union[bytes, str, IO], format: str = "snap"
) -> Tuple[Digraph, Dict[str, int]]:
    """Parse a SNAP edge list or a DIMACS .gr file.

    Vertices are relabeled densely in first-appearance order. Duplicate edges
    and self-loops are kept. DIMACS weights are read and discarded.

    Args:
        data: Raw file content (bytes, text or a readable stream).
        format (str): Either "snap" or "dimacs".

    Returns:
        Tuple[Digraph, Dict[str, int]]: The graph and the map from original
        labels to dense indices.
    """
    lines = _decode_lines(data)
    if format == "snap":
        graph, id_map = _parse_snap(lines)
    elif format == "dimacs":
        graph, id_map = _parse_dimacs(lines)
    else:
        raise GraphFormatError(f"Unrecognized graph format {format}")
    logger.debug(f"Parsed {format} graph with n={graph.vertex_count} m={graph.edge_count}")
    return graph, id_map


def read_graph(path: str, format: str = "snap") -> Tuple[Digraph, Dict[str, int]]:
    try:
        with open(path, "rb") as stream:
            data = stream.read()
    except OSError as error:
        raise FtscError(f"Could not read {path}: {error}") from error
    return parse_graph(data, format)


def write_snap(graph: Digraph, stream: IO[str]) -> None:
    stream.write(f"# Nodes: {graph.vertex_count} Edges: {graph.edge_count}\n")
    for tail, head in graph.edges():
        stream.write(f"{graph.label(tail)} {graph.label(head)}\n")


def strong_components(
    graph: Digraph, blocked: AbstractSet[int] = NO_VERTICES
) -> List[List[int]]:
    """Tarjan's algorithm, iterative, over the graph minus the blocked vertices.

    Components are returned in reverse topological order of the condensation.
    """
    n = graph.vertex_count
    out_adjacency = graph.out_adjacency
    index = [-1] * n
    low = [0] * n
    on_stack = [False] * n
    stack: List[int] = []
    components: List[List[int]] = []
    counter = 0

    for root in range(n):
        if index[root] != -1 or root in blocked:
            continue
        index[root] = low[root] = counter
        counter += 1
        stack.append(root)
        on_stack[root] = True
        work = [(root, 0)]
        while work:
            vertex, position = work[-1]
            heads = out_adjacency[vertex]
            if position < len(heads):
                work[-1] = (vertex, position + 1)
                head = heads[position]
                if head in blocked:
                    continue
                if index[head] == -1:
                    index[head] = low[head] = counter
                    counter += 1
                    stack.append(head)
                    on_stack[head] = True
                    work.append((head, 0))
                elif on_stack[head] and index[head] < low[vertex]:
                    low[vertex] = index[head]
                continue

            work.pop()
            if work:
                caller = work[-1][0]
                if low[vertex] < low[caller]:
                    low[caller] = low[vertex]
            if low[vertex] == index[vertex]:
                component = []
                while True:
                    member = stack.pop()
                    on_stack[member] = False
                    component.append(member)
                    if member == vertex:
                        break
                components.append(component)
    return components


def count_components(graph: Digraph, blocked: AbstractSet[int] = NO_VERTICES) -> int:
    return len(strong_components(graph, blocked))


def compute_sccs(graph: Digraph) -> SccLabeling:
    components = strong_components(graph)
    component_of = [0] * graph.vertex_count
    for component_id, members in enumerate(components):
        for vertex in members:
            component_of[vertex] = component_id
    edge_counts = [0] * len(components)
    for tail, head in graph.edges():
        if component_of[tail] == component_of[head]:
            edge_counts[component_of[tail]] += 1
    return SccLabeling(
        component_of=tuple(component_of),
        component_count=len(components),
        component_sizes=tuple(len(members) for members in components),
        component_edge_counts=tuple(edge_counts),
    )


def is_strongly_connected(graph: Digraph) -> bool:
    return graph.vertex_count > 0 and count_components(graph) == 1


def require_strongly_connected(graph: Digraph, operation: str) -> None:
    if not is_strongly_connected(graph):
        raise NotStronglyConnectedError(f"{operation} requires a strongly connected graph")


def induced_subgraph(graph: Digraph, vertices: Iterable[int]) -> InducedSubgraph:
    """Induced subgraph on the given vertices, re-densified in ascending order."""
    kept = tuple(sorted(set(vertices)))
    index = {vertex: local for local, vertex in enumerate(kept)}
    edges = (
        (index[tail], index[head])
        for tail in kept
        for head in graph.out_adjacency[tail]
        if head in index
    )
    sub = Digraph.from_edges(len(kept), edges, [graph.label(v) for v in kept])
    return InducedSubgraph(graph=sub, vertices=kept, index=index)


def delete_vertices(graph: Digraph, removed: Iterable[int]) -> InducedSubgraph:
    removed = set(removed)
    return induced_subgraph(graph, (v for v in graph.vertices if v not in removed))


def extract_scc_by_rank(graph: Digraph, rank: int = 1) -> Digraph:
    """The rank-th largest SCC (by vertex count, ties by smallest component id)."""
    labeling = compute_sccs(graph)
    if not 1 <= rank <= labeling.component_count:
        raise RankOutOfRangeError(
            f"rank {rank} outside [1, {labeling.component_count}]"
        )
    ordered = sorted(
        range(labeling.component_count),
        key=lambda component: (-labeling.component_sizes[component], component),
    )
    chosen = ordered[rank - 1]
    members = (v for v in graph.vertices if labeling.component_of[v] == chosen)
    extracted = induced_subgraph(graph, members).graph
    logger.info(
        f"Extracted SCC of rank {rank}: n={extracted.vertex_count} m={extracted.edge_count}"
    )
    return extracted


def reverse(graph: Digraph) -> Digraph:
    return Digraph(
        vertex_count=graph.vertex_count,
        edge_count=graph.edge_count,
        out_adjacency=graph.in_adjacency,
        in_adjacency=graph.out_adjacency,
        original_ids=graph.original_ids,
    )


def bfs_levels(
    graph: Digraph, root: int, blocked: AbstractSet[int] = NO_VERTICES
) -> Tuple[List[Optional[int]], List[Optional[int]], List[int]]:
    """Plain BFS returning (parent, level, visit order)."""
    n = graph.vertex_count
    parent: List[Optional[int]] = [None] * n
    level: List[Optional[int]] = [None] * n
    level[root] = 0
    order = [root]
    queue = deque([root])
    while queue:
        vertex = queue.popleft()
        for head in graph.out_adjacency[vertex]:
            if level[head] is None and head not in blocked:
                level[head] = level[vertex] + 1
                parent[head] = vertex
                order.append(head)
                queue.append(head)
    return parent, level, order


def reachable(
    graph: Digraph, source: int, blocked: AbstractSet[int] = NO_VERTICES
) -> AbstractSet[int]:
    if source in blocked:
        return frozenset()
    _, _, order = bfs_levels(graph, source, blocked)
    return frozenset(order)


def bfs_tree(graph: Digraph, root: int, blocked: AbstractSet[int] = NO_VERTICES) -> BfsTree:
    parent, level, order = bfs_levels(graph, root, blocked)
    n = graph.vertex_count
    children: List[List[int]] = [[] for _ in range(n)]
    for vertex in order[1:]:
        children[parent[vertex]].append(vertex)

    preorder: List[Optional[int]] = [None] * n
    descendants: List[Optional[int]] = [None] * n
    rank = 0
    stack = [(root, False)]
    while stack:
        vertex, finished = stack.pop()
        if finished:
            descendants[vertex] = 1 + sum(descendants[child] for child in children[vertex])
            continue
        preorder[vertex] = rank
        rank += 1
        stack.append((vertex, True))
        for child in reversed(children[vertex]):
            stack.append((child, False))

    return BfsTree(
        root=root,
        parent=tuple(parent),
        level=tuple(level),
        preorder=tuple(preorder),
        descendant_count=tuple(descendants),
    )


def eccentricity(graph: Digraph, start: int) -> int:
    _, level, _ = bfs_levels(graph, start)
    return max(lvl for lvl in level if lvl is not None)


def longest_bfs_path_lb(graph: Digraph, start: int = 0) -> int:
    """Largest BFS level from start in either G or its reverse; unreached vertices are ignored."""
    return max(eccentricity(graph, start), eccentricity(reverse(graph), start))


def longest_bfs_path(graph: Digraph, start: int = 0) -> List[int]:
    """A shortest path realizing longest_bfs_path_lb, from G (preferred) or G^R."""
    best: List[int] = [start]
    for candidate in (graph, reverse(graph)):
        parent, level, order = bfs_levels(candidate, start)
        far = order[-1]
        if level[far] + 1 > len(best):
            path = [far]
            while parent[path[-1]] is not None:
                path.append(parent[path[-1]])
            path.reverse()
            best = path
    return best


def exact_diameter(graph: Digraph) -> int:
    require_strongly_connected(graph, "exact_diameter")
    return max(eccentricity(graph, vertex) for vertex in graph.vertices)


def split_edges(graph: Digraph) -> Digraph:
    """Subdivide every edge (x, y) into (x, e), (e, y) with a fresh vertex e."""
    n = graph.vertex_count
    edges: List[Tuple[int, int]] = []
    labels = [graph.label(v) for v in graph.vertices]
    for position, (tail, head) in enumerate(graph.edges()):
        midpoint = n + position
        edges.append((tail, midpoint))
        edges.append((midpoint, head))
        labels.append(f"{graph.label(tail)}->{graph.label(head)}#{position}")
    return Digraph.from_edges(n + graph.edge_count, edges, labels)
