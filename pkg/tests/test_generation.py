import importlib.util
import shutil
from pathlib import Path

import pytest
from dagster import JobDefinition

from dagster_ftsc import BenchmarkJob, load_jobs_from_benchmark_suite
from dagster_ftsc.exceptions import BenchmarkSuiteError
from dagster_ftsc.generation import load_benchmark_suite
from dagster_ftsc.report import read_reports_yaml

BENCHMARK_TEST_PATH = Path(__file__).parent / "benchmark_test_project"


@pytest.fixture
def benchmark_project(tmp_path):
    project = tmp_path / "benchmark_test_project"
    shutil.copytree(BENCHMARK_TEST_PATH, project)
    return project


def test_jobs_returned():
    """
    Check if the generator function returns one job per benchmark.
    """
    jobs = load_jobs_from_benchmark_suite(BENCHMARK_TEST_PATH / "benchmarks.yml")

    assert all(isinstance(job, JobDefinition) for job in jobs)
    assert [job.name for job in jobs] == ["smoke_random", "smoke_bad"]


def test_jobs_run(benchmark_project):
    """
    Run the jobs using Dagster and check the reports they leave behind.
    """
    jobs = load_jobs_from_benchmark_suite(benchmark_project / "benchmarks.yml")
    responses = {job.name: job.execute_in_process() for job in jobs}

    assert all(response.success for response in responses.values())
    random_run = responses["smoke_random"]
    truth = random_run.output_for_node("benchmark_ground_truth", "report")
    tree = random_run.output_for_node("benchmark_tree_mcn", "report")
    assert truth["answered_true"] == tree["answered_true"]

    report_dir = benchmark_project / "reports"
    with open(report_dir / "fix_a.yml") as stream:
        methods = [report.method for report in read_reports_yaml(stream)]
    assert methods == ["ground-truth", "bi-bfs", "tree:mcn", "partial-tree:3"]
    assert (report_dir / "two_triangles.csv").exists()
    assert (report_dir / "fix_a.stats.yml").exists()


def test_paths_resolve_against_the_suite(benchmark_project):
    (benchmark,) = [
        b
        for b in load_benchmark_suite(benchmark_project / "benchmarks.yml")
        if b["name"] == "smoke-random"
    ]
    benchmark_job = BenchmarkJob(benchmark, suite_dir=benchmark_project)

    assert benchmark_job.graph_config["path"] == str(benchmark_project / "data" / "fix_a.snap")
    assert benchmark_job.report_dir == str(benchmark_project / "reports")
    assert benchmark_job.run_config["ops"]["benchmark_partial_tree_3"]["config"] == {
        "cross_check": True,
        "simulate": False,
        "rng_seed": 11,
    }


def test_repository(benchmark_project, monkeypatch):
    """
    Load the Dagster repository of the test project the way `dagster dev` would.
    """
    monkeypatch.setenv("FTSC_BENCHMARK_SUITE", str(benchmark_project / "benchmarks.yml"))
    module_path = benchmark_project / "orchestrate" / "dagster" / "repository.py"
    spec = importlib.util.spec_from_file_location("ftsc_test_repository", module_path)
    module = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(module)

    names = {job.name for job in module.ftsc_benchmarks.get_all_jobs()}
    assert {"smoke_random", "smoke_bad"} <= names


@pytest.mark.parametrize(
    "content, message",
    [
        ("[]\n", "no `benchmarks` list"),
        ("benchmarks:\n  - just-a-name\n", "not a mapping"),
        ("benchmarks:\n  - name: a\n    graph: {path: g.snap}\n", "missing methods"),
        ("benchmarks:\n  - name: a\n    graph: g.snap\n    methods: [bi-bfs]\n", "graph.path"),
        ("benchmarks:\n  - name: a\n    graph: {path: g}\n    methods: []\n", "no methods"),
        (
            "benchmarks:\n  - name: a\n    graph: {path: g}\n    methods: [dfs]\n",
            "unknown method",
        ),
        (
            "benchmarks:\n  - name: a\n    graph: {path: g}\n    methods: [bi-bfs, bi-bfs]\n",
            "twice",
        ),
        ("benchmarks: [\n", "Could not read"),
    ],
)
def test_invalid_suites(tmp_path, content, message):
    suite = tmp_path / "benchmarks.yml"
    suite.write_text(content)
    with pytest.raises(BenchmarkSuiteError, match=message):
        load_jobs_from_benchmark_suite(suite)


def test_missing_suite(tmp_path):
    with pytest.raises(BenchmarkSuiteError, match="Could not read"):
        load_benchmark_suite(tmp_path / "absent.yml")
