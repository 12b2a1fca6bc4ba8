from dagster_ftsc.generation import load_jobs_from_benchmark_suite
from dagster_ftsc.graph import Digraph, compute_sccs, extract_scc_by_rank, parse_graph, read_graph
from dagster_ftsc.graph_resource import GraphDataset, graph_dataset_resource
from dagster_ftsc.job import BenchmarkJob
from dagster_ftsc.ops import benchmark_op, dataset_stats_op, export_reports_op, workload_op
from dagster_ftsc.oracles import ChTreeOracle, PartialTreeOracle, SccTreeOracle
from dagster_ftsc.queries import FtQuery, QueryOutcome, ground_truth_2ftsc
from dagster_ftsc.runner import build_engine, run_workload
from dagster_ftsc.scc_tree import build_partial_scc_tree, build_scc_tree, find_min_delta
