import os
from pathlib import Path

from dagster import repository

from dagster_ftsc import load_jobs_from_benchmark_suite

BENCHMARK_SUITE = os.getenv(
    "FTSC_BENCHMARK_SUITE", str(Path(__file__).parents[2] / "benchmarks.yml")
)


@repository
def ftsc_benchmarks():
    return load_jobs_from_benchmark_suite(BENCHMARK_SUITE, retries=1)
