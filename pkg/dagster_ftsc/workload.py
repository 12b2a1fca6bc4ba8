import random
from dataclasses import dataclass
from typing import List, Tuple

from dagster import get_dagster_logger

from dagster_ftsc.exceptions import FtscError, NoBadInstanceError
from dagster_ftsc.graph import Digraph, strong_components
from dagster_ftsc.queries import FtQuery
from dagster_ftsc.structure import strong_articulation_points

logger = get_dagster_logger()

WORKLOAD_KINDS = ("random", "bad")


@dataclass(frozen=True)
class WorkloadSpec:
    kind: str
    count: int
    rng_seed: int = 0
    seed_count: int = 10

    def __post_init__(self) -> None:
        if self.kind not in WORKLOAD_KINDS:
            raise FtscError(
                f"Unknown workload kind {self.kind}, expected one of {WORKLOAD_KINDS}"
            )
        if self.count < 1:
            raise FtscError(f"Workload count must be positive, got {self.count}")
        if self.seed_count < 0:
            raise FtscError(f"Seed count must be non-negative, got {self.seed_count}")

    @classmethod
    def parse(cls, text: str, rng_seed: int = 0, seed_count: int = 10) -> "WorkloadSpec":
        """Parse the `random:N` / `bad:N` form used on the command line."""
        kind, _, count = text.partition(":")
        try:
            return cls(kind=kind, count=int(count), rng_seed=rng_seed, seed_count=seed_count)
        except ValueError as error:
            raise FtscError(
                f"Malformed workload {text!r}, expected random:N or bad:N"
            ) from error


def gen_random_queries(graph: Digraph, spec: WorkloadSpec) -> List[FtQuery]:
    """Uniform independent draws of x, y, f1 and f2; coincidences are kept."""
    rng = random.Random(spec.rng_seed)
    n = graph.vertex_count
    return [
        FtQuery(rng.randrange(n), rng.randrange(n), rng.randrange(n), rng.randrange(n))
        for _ in range(spec.count)
    ]


def _bad_split(graph: Digraph, vertex: int, seed_count: int):
    components = sorted(
        (frozenset(c) for c in strong_components(graph, {vertex})),
        key=lambda c: (-len(c), min(c)),
    )
    stranded = [v for component in components[1:] for v in sorted(component)]
    if len(stranded) < seed_count:
        return None
    return components, stranded


def gen_bad_queries(graph: Digraph, spec: WorkloadSpec) -> Tuple[List[int], List[FtQuery]]:
    """Queries that fail a SAP stranding every seed outside the largest SCC it leaves behind.

    Returns:
        Tuple[List[int], List[FtQuery]]: The seed vertices and the query stream.
    """
    rng = random.Random(spec.rng_seed)
    candidates = sorted(strong_articulation_points(graph))
    rng.shuffle(candidates)
    for sap in candidates:
        split = _bad_split(graph, sap, spec.seed_count)
        if split is None:
            continue
        components, stranded = split
        seeds = rng.sample(stranded, spec.seed_count)
        seeded = set(seeds)
        pool = sorted(
            v for component in components if not seeded & component for v in component
        )
        others = [v for v in graph.vertices if v != sap]
        queries = [
            FtQuery(rng.choice(pool), rng.choice(pool), sap, rng.choice(others))
            for _ in range(spec.count)
        ]
        logger.info(
            f"Bad workload around SAP {graph.label(sap)}: {len(seeds)} seeds, "
            f"{len(pool)} candidate query vertices"
        )
        return seeds, queries
    raise NoBadInstanceError("no bad-instance SAP")
