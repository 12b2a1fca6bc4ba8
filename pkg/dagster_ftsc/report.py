"""Benchmark reports: exact aggregation, YAML documents and CSV export.

Means are kept as exact fractions and only rounded when written out. A YAML
report stores every fraction as a "p/q" string next to its rounded value, so
`parse_report` restores the Report exactly.
"""

import csv
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, Dict, Iterable, List, Optional

import yaml
from dagster import get_dagster_logger

from dagster_ftsc.exceptions import FtscError
from dagster_ftsc.graph import (
    Digraph,
    exact_diameter,
    longest_bfs_path_lb,
    require_strongly_connected,
)
from dagster_ftsc.queries import QueryOutcome
from dagster_ftsc.structure import proper_separation_pair_vertices, strong_articulation_points
from dagster_ftsc.utils import format_fraction, round_fraction

logger = get_dagster_logger()

REPORT_HEADER = (
    "# dagster-ftsc benchmark report\n"
    "# depth_histogram maps the depth of the tree node that produced each answer\n"
    "# (0 = root, also for queries answered without a walk) to a query count;\n"
    "# methods without a tree leave it empty.\n"
)

FRACTION_FIELDS = (
    "pct_answered_by_seed",
    "mean_edges_per_query",
    "mean_ssr_calls",
    "mean_1ftsc_calls",
)

CSV_COLUMNS = (
    "graph_name",
    "method",
    "query_count",
    "answered_true",
    "answered_false",
    "pct_answered_by_seed",
    "mean_edges_per_query",
    "mean_depth",
    "mean_ssr_calls",
    "mean_1ftsc_calls",
    "wall_time_seconds",
)


@dataclass(frozen=True)
class Report:
    graph_name: str
    method: str
    query_count: int
    answered_true: int
    answered_false: int
    pct_answered_by_seed: Fraction
    mean_edges_per_query: Fraction
    depth_histogram: Dict[int, int] = field(default_factory=dict)
    mean_ssr_calls: Fraction = Fraction(0)
    mean_1ftsc_calls: Fraction = Fraction(0)
    wall_time_seconds: float = 0.0

    @property
    def mean_depth(self) -> Optional[Fraction]:
        total = sum(self.depth_histogram.values())
        if not total:
            return None
        return Fraction(sum(d * c for d, c in self.depth_histogram.items()), total)


def _mean(total: int, count: int) -> Fraction:
    return Fraction(total, count) if count else Fraction(0)


@dataclass
class ReportAccumulator:
    """Running sums of query outcomes; merging two accumulators is associative."""

    graph_name: str
    method: str
    query_count: int = 0
    answered_true: int = 0
    answered_by_seed: int = 0
    edges: int = 0
    ssr_calls: int = 0
    onefault_calls: int = 0
    depth_histogram: Dict[int, int] = field(default_factory=dict)
    wall_time_seconds: float = 0.0

    def add(self, outcome: QueryOutcome) -> None:
        self.query_count += 1
        self.answered_true += int(outcome.answer)
        self.answered_by_seed += int(outcome.answered_by_seed)
        self.edges += outcome.edges_accessed
        self.ssr_calls += outcome.ssr_calls
        self.onefault_calls += outcome.onefault_calls
        if outcome.depth_reached is not None:
            depth = outcome.depth_reached
            self.depth_histogram[depth] = self.depth_histogram.get(depth, 0) + 1

    def merge(self, other: "ReportAccumulator") -> "ReportAccumulator":
        if (self.graph_name, self.method) != (other.graph_name, other.method):
            raise FtscError(
                f"Cannot merge reports of {other.graph_name}/{other.method} "
                f"into {self.graph_name}/{self.method}"
            )
        histogram = dict(self.depth_histogram)
        for depth, count in other.depth_histogram.items():
            histogram[depth] = histogram.get(depth, 0) + count
        return ReportAccumulator(
            graph_name=self.graph_name,
            method=self.method,
            query_count=self.query_count + other.query_count,
            answered_true=self.answered_true + other.answered_true,
            answered_by_seed=self.answered_by_seed + other.answered_by_seed,
            edges=self.edges + other.edges,
            ssr_calls=self.ssr_calls + other.ssr_calls,
            onefault_calls=self.onefault_calls + other.onefault_calls,
            depth_histogram=histogram,
            wall_time_seconds=self.wall_time_seconds + other.wall_time_seconds,
        )

    def report(self) -> Report:
        return Report(
            graph_name=self.graph_name,
            method=self.method,
            query_count=self.query_count,
            answered_true=self.answered_true,
            answered_false=self.query_count - self.answered_true,
            pct_answered_by_seed=_mean(100 * self.answered_by_seed, self.query_count),
            mean_edges_per_query=_mean(self.edges, self.query_count),
            depth_histogram=dict(sorted(self.depth_histogram.items())),
            mean_ssr_calls=_mean(self.ssr_calls, self.query_count),
            mean_1ftsc_calls=_mean(self.onefault_calls, self.query_count),
            wall_time_seconds=self.wall_time_seconds,
        )


def report_to_document(report: Report) -> dict:
    document = {
        "graph_name": report.graph_name,
        "method": report.method,
        "query_count": report.query_count,
        "answered_true": report.answered_true,
        "answered_false": report.answered_false,
        "depth_histogram": dict(report.depth_histogram),
        "wall_time_seconds": report.wall_time_seconds,
    }
    for name in FRACTION_FIELDS:
        value = getattr(report, name)
        document[name] = format_fraction(value)
        document[f"{name}_rounded"] = round_fraction(value)
    return document


def report_from_document(document: dict) -> Report:
    try:
        return Report(
            graph_name=str(document["graph_name"]),
            method=str(document["method"]),
            query_count=int(document["query_count"]),
            answered_true=int(document["answered_true"]),
            answered_false=int(document["answered_false"]),
            depth_histogram={
                int(depth): int(count)
                for depth, count in (document.get("depth_histogram") or {}).items()
            },
            wall_time_seconds=float(document.get("wall_time_seconds", 0.0)),
            **{name: Fraction(str(document[name])) for name in FRACTION_FIELDS},
        )
    except (KeyError, TypeError, ValueError) as error:
        raise FtscError(f"Malformed report document: {error}") from error


def serialize_report(report: Report) -> str:
    return REPORT_HEADER + yaml.safe_dump(report_to_document(report), sort_keys=False)


def parse_report(text: str) -> Report:
    return report_from_document(yaml.safe_load(text))


def write_reports_yaml(reports: Iterable[Report], stream: IO[str]) -> None:
    stream.write(REPORT_HEADER)
    yaml.safe_dump_all(
        (report_to_document(r) for r in reports), stream, sort_keys=False, explicit_start=True
    )


def read_reports_yaml(stream: IO[str]) -> List[Report]:
    return [report_from_document(doc) for doc in yaml.safe_load_all(stream) if doc]


def write_reports_csv(reports: Iterable[Report], stream: IO[str]) -> None:
    writer = csv.DictWriter(stream, fieldnames=CSV_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for report in reports:
        mean_depth = report.mean_depth
        writer.writerow(
            {
                "graph_name": report.graph_name,
                "method": report.method,
                "query_count": report.query_count,
                "answered_true": report.answered_true,
                "answered_false": report.answered_false,
                "pct_answered_by_seed": round_fraction(report.pct_answered_by_seed),
                "mean_edges_per_query": round_fraction(report.mean_edges_per_query),
                "mean_depth": "" if mean_depth is None else round_fraction(mean_depth),
                "mean_ssr_calls": round_fraction(report.mean_ssr_calls),
                "mean_1ftsc_calls": round_fraction(report.mean_1ftsc_calls),
                "wall_time_seconds": round(report.wall_time_seconds, 6),
            }
        )


@dataclass(frozen=True)
class DatasetStats:
    n: int
    m: int
    n_a: int
    d_lower_bound: int
    d: Optional[int] = None
    n_sp: Optional[int] = None

    def to_document(self) -> dict:
        return {
            "n": self.n,
            "m": self.m,
            "n_a": self.n_a,
            "n_sp": self.n_sp,
            "d": self.d,
            "d_lower_bound": self.d_lower_bound,
        }


def dataset_stats(
    graph: Digraph, exact_diameter_flag: bool = False, nsp: bool = False
) -> DatasetStats:
    """Size, strong articulation points and diameter of a strongly connected graph.

    Args:
        graph (Digraph): The extracted SCC.
        exact_diameter_flag (bool): Run all-pairs BFS for the exact diameter.
        nsp (bool): Count the vertices lying in proper separation pairs.
    """
    require_strongly_connected(graph, "dataset_stats")
    stats = DatasetStats(
        n=graph.vertex_count,
        m=graph.edge_count,
        n_a=len(strong_articulation_points(graph)),
        d_lower_bound=longest_bfs_path_lb(graph, 0),
        d=exact_diameter(graph) if exact_diameter_flag else None,
        n_sp=len(proper_separation_pair_vertices(graph)) if nsp else None,
    )
    logger.info(f"Dataset statistics: {stats.to_document()}")
    return stats
