"""The `ftsc-bench` command line.

Results go to stdout (or the files named by --out, --report and --csv); progress
goes to the log on stderr.
"""

import argparse
import logging
import logging.config
import sys
from pathlib import Path
from typing import Optional, Sequence

import yaml
from dagster import get_dagster_logger

from dagster_ftsc.exceptions import FtscError
from dagster_ftsc.generation import load_jobs_from_benchmark_suite
from dagster_ftsc.graph import (
    GRAPH_FORMATS,
    Digraph,
    extract_scc_by_rank,
    read_graph,
    write_snap,
)
from dagster_ftsc.report import dataset_stats, write_reports_csv, write_reports_yaml
from dagster_ftsc.runner import build_engine, run_workload
from dagster_ftsc.scc_tree import build_partial_scc_tree, build_scc_tree, find_min_delta
from dagster_ftsc.structure import (
    DEFAULT_PAIR_BUDGET,
    SELECTOR_ALIASES,
    SELECTOR_KINDS,
    SplitSelector,
)
from dagster_ftsc.workload import WorkloadSpec, gen_bad_queries, gen_random_queries

logger = get_dagster_logger()

LOGGING_CONFIG = Path(__file__).parent / "logging.yaml"

SPLITTER_CHOICES = sorted(set(SELECTOR_KINDS) | set(SELECTOR_ALIASES))


def configure_logging(verbose: bool = False) -> None:
    config = yaml.safe_load(LOGGING_CONFIG.read_text())
    if verbose:
        config["root"]["level"] = "DEBUG"
    logging.config.dictConfig(config)


def positive_int(value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{value} is not an integer")
    if number < 1:
        raise argparse.ArgumentTypeError(f"{value} is not a positive integer")
    return number


def workload_arg(value: str) -> str:
    kind, _, count = value.partition(":")
    if kind not in ("random", "bad") or not count.isdigit() or int(count) < 1:
        raise argparse.ArgumentTypeError(f"{value} is not of the form random:N or bad:N")
    return value


def load_graph(path: str, format: str, rank: int) -> Digraph:
    graph, _ = read_graph(path, format)
    logger.info(f"Read {path}: n={graph.vertex_count}, m={graph.edge_count}")
    return extract_scc_by_rank(graph, rank)


def _dump(document, out: Optional[str]) -> None:
    if out is None:
        return
    with open(out, "w") as stream:
        yaml.safe_dump(document, stream, sort_keys=False)
    logger.info(f"Wrote {out}")


def cmd_stats(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph, args.format, args.rank)
    stats = dataset_stats(graph, exact_diameter_flag=args.exact_diameter, nsp=args.nsp)
    yaml.safe_dump(stats.to_document(), sys.stdout, sort_keys=False)
    return 0


def cmd_extract_scc(args: argparse.Namespace) -> int:
    graph = load_graph(args.input, args.format, args.rank)
    with open(args.output, "w") as stream:
        write_snap(graph, stream)
    logger.info(f"Wrote SCC of rank {args.rank} to {args.output}")
    return 0


def cmd_build_tree(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph, args.format, args.rank)
    tree = build_scc_tree(graph, SplitSelector.from_name(args.splitter, args.rng_seed))
    print(tree.height)
    _dump({"height": tree.height, "nodes": tree.to_document(graph)}, args.out)
    return 0


def cmd_partial_tree(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph, args.format, args.rank)
    tree = build_partial_scc_tree(graph, args.delta, args.pair_budget)
    print(tree.height)
    _dump(
        {
            "delta": tree.delta,
            "height": tree.height,
            "leaves": len(tree.leaves()),
            "max_case5_per_path": tree.max_case5_per_path(),
            "nodes": tree.to_document(graph),
        },
        args.out,
    )
    return 0


def cmd_find_delta(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph, args.format, args.rank)
    print(find_min_delta(graph, args.pair_budget))
    return 0


def cmd_query(args: argparse.Namespace) -> int:
    graph = load_graph(args.graph, args.format, args.rank)
    spec = WorkloadSpec.parse(
        args.workload, rng_seed=args.rng_seed, seed_count=args.seed_count
    )
    seeds = None
    if spec.kind == "bad":
        seeds, queries = gen_bad_queries(graph, spec)
    else:
        queries = gen_random_queries(graph, spec)

    graph_name = Path(args.graph).stem
    reports = []
    for method in args.method:
        engine = build_engine(
            graph, method, seeds, args.rng_seed, args.simulate, args.pair_budget
        )
        reports.append(run_workload(graph, engine, queries, args.cross_check, graph_name))

    if args.report:
        with open(args.report, "w") as stream:
            write_reports_yaml(reports, stream)
        logger.info(f"Wrote {args.report}")
    else:
        write_reports_yaml(reports, sys.stdout)
    if args.csv:
        with open(args.csv, "w", newline="") as stream:
            write_reports_csv(reports, stream)
        logger.info(f"Wrote {args.csv}")
    return 0


def cmd_suite(args: argparse.Namespace) -> int:
    failed = 0
    for job in load_jobs_from_benchmark_suite(args.suite):
        result = job.execute_in_process(raise_on_error=False)
        logger.info(f"Job {job.name}: {'succeeded' if result.success else 'failed'}")
        failed += not result.success
    return 1 if failed else 0


def _graph_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--format", choices=GRAPH_FORMATS, default="snap")
    parser.add_argument(
        "--rank", type=positive_int, default=1, help="SCC to keep, 1 being the largest"
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ftsc-bench",
        description="Fault-tolerant strong connectivity oracles and their benchmarks.",
    )
    parser.add_argument("--verbose", action="store_true", help="log at DEBUG level")
    commands = parser.add_subparsers(dest="command", required=True)

    stats = commands.add_parser("stats", help="dataset statistics of the extracted SCC")
    stats.add_argument("graph")
    _graph_options(stats)
    stats.add_argument("--exact-diameter", action="store_true")
    stats.add_argument("--nsp", action="store_true")
    stats.set_defaults(handler=cmd_stats)

    extract = commands.add_parser("extract-scc", help="write one SCC as a SNAP edge list")
    extract.add_argument("input")
    extract.add_argument("output")
    _graph_options(extract)
    extract.set_defaults(handler=cmd_extract_scc)

    tree = commands.add_parser("build-tree", help="build an SCC-tree and print its height")
    tree.add_argument("graph")
    _graph_options(tree)
    tree.add_argument("--splitter", choices=SPLITTER_CHOICES, default="mcn")
    tree.add_argument("--rng-seed", type=int, default=0)
    tree.add_argument("--out")
    tree.set_defaults(handler=cmd_build_tree)

    partial = commands.add_parser("partial-tree", help="build a partial SCC-tree for Δ")
    partial.add_argument("graph")
    _graph_options(partial)
    partial.add_argument("--delta", type=positive_int, required=True)
    partial.add_argument("--pair-budget", type=positive_int, default=DEFAULT_PAIR_BUDGET)
    partial.add_argument("--out")
    partial.set_defaults(handler=cmd_partial_tree)

    delta = commands.add_parser("find-delta", help="smallest Δ with a shallow partial tree")
    delta.add_argument("graph")
    _graph_options(delta)
    delta.add_argument("--pair-budget", type=positive_int, default=DEFAULT_PAIR_BUDGET)
    delta.set_defaults(handler=cmd_find_delta)

    query = commands.add_parser("query", help="answer a workload and report the metrics")
    query.add_argument("graph")
    _graph_options(query)
    query.add_argument(
        "--method", action="append", required=True, help="engine descriptor, repeatable"
    )
    query.add_argument("--workload", type=workload_arg, required=True)
    query.add_argument("--rng-seed", type=int, default=0)
    query.add_argument("--seed-count", type=int, default=10)
    query.add_argument("--simulate", action="store_true")
    query.add_argument("--cross-check", action="store_true")
    query.add_argument("--pair-budget", type=positive_int, default=DEFAULT_PAIR_BUDGET)
    query.add_argument("--report")
    query.add_argument("--csv")
    query.set_defaults(handler=cmd_query)

    suite = commands.add_parser("suite", help="run every job of a benchmarks.yml in process")
    suite.add_argument("suite")
    suite.set_defaults(handler=cmd_suite)
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    configure_logging(args.verbose)
    try:
        return args.handler(args)
    except FtscError as error:
        logger.error(f"{type(error).__name__}: {error}")
        return 2


if __name__ == "__main__":
    sys.exit(main())
