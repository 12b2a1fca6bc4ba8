from pathlib import Path
from typing import List, Union

import yaml
from dagster import JobDefinition

from dagster_ftsc.exceptions import BenchmarkSuiteError
from dagster_ftsc.job import BenchmarkJob
from dagster_ftsc.runner import METHOD_FAMILIES

REQUIRED_KEYS = ("name", "graph", "methods")


def _validate_benchmark(benchmark: object, position: int) -> dict:
    if not isinstance(benchmark, dict):
        raise BenchmarkSuiteError(f"Benchmark #{position} is not a mapping")
    missing = [key for key in REQUIRED_KEYS if key not in benchmark]
    if missing:
        raise BenchmarkSuiteError(f"Benchmark #{position} is missing {', '.join(missing)}")
    if not isinstance(benchmark["graph"], dict) or "path" not in benchmark["graph"]:
        raise BenchmarkSuiteError(f"Benchmark {benchmark['name']} needs graph.path")
    methods = benchmark["methods"]
    if not isinstance(methods, list) or not methods:
        raise BenchmarkSuiteError(f"Benchmark {benchmark['name']} lists no methods")
    for method in methods:
        if str(method).partition(":")[0] not in METHOD_FAMILIES:
            raise BenchmarkSuiteError(
                f"Benchmark {benchmark['name']}: unknown method {method}"
            )
    if len(set(methods)) != len(methods):
        raise BenchmarkSuiteError(f"Benchmark {benchmark['name']} lists a method twice")
    return benchmark


def load_benchmark_suite(suite_path: Union[str, Path]) -> List[dict]:
    """Read and validate the benchmarks listed in a suite file."""
    suite_path = Path(suite_path)
    try:
        document = yaml.safe_load(suite_path.read_text())
    except (OSError, yaml.YAMLError) as error:
        raise BenchmarkSuiteError(f"Could not read {suite_path}: {error}") from error
    if not isinstance(document, dict) or not isinstance(document.get("benchmarks"), list):
        raise BenchmarkSuiteError(f"{suite_path} has no `benchmarks` list")
    return [
        _validate_benchmark(benchmark, position)
        for position, benchmark in enumerate(document["benchmarks"])
    ]


def load_jobs_from_benchmark_suite(
    suite_path: Union[str, Path],
    retries: int = 0,
) -> List[JobDefinition]:
    """This function generates a Dagster job for every benchmark in the suite file.
    Relative graph and report paths are resolved against the directory of the suite file.

    Args:
        suite_path (Union[str, Path]): The location of the `benchmarks.yml` file.
        retries (int, optional): The number of retries of a failed op. Defaults to 0.

    Returns:
        List[JobDefinition]: One Dagster job per benchmark.
    """
    suite_path = Path(suite_path)
    return [
        BenchmarkJob(benchmark, suite_dir=suite_path.parent, retries=retries).dagster_job
        for benchmark in load_benchmark_suite(suite_path)
    ]
