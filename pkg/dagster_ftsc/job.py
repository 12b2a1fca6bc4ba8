from pathlib import Path
from typing import List, Optional

from dagster import JobDefinition, RetryPolicy, job

from dagster_ftsc.graph_resource import graph_dataset_resource
from dagster_ftsc.ops import (
    benchmark_op,
    dataset_stats_op,
    export_reports_op,
    workload_op,
)
from dagster_ftsc.utils import generate_dagster_name


class BenchmarkJob:
    """One entry of a benchmark suite: a dataset, a workload and the methods to compare."""

    def __init__(
        self, benchmark: dict, suite_dir: Optional[Path] = None, retries: int = 0
    ) -> None:
        self.name: str = benchmark["name"]
        self.methods: List[str] = list(benchmark["methods"])
        self.graph_config = dict(benchmark["graph"])
        self.workload_config = dict(benchmark.get("workload") or {})
        self.cross_check: bool = bool(benchmark.get("cross_check", False))
        self.simulate: bool = bool(benchmark.get("simulate", False))
        self.exact_diameter: bool = bool(benchmark.get("exact_diameter", False))
        self.nsp: bool = bool(benchmark.get("nsp", False))
        self.report_dir: str = str(benchmark.get("report_dir", "reports"))
        self.retries = retries

        suite_dir = suite_dir or Path.cwd()
        graph_path = Path(self.graph_config["path"])
        if not graph_path.is_absolute():
            self.graph_config["path"] = str(suite_dir / graph_path)
        report_dir = Path(self.report_dir)
        if not report_dir.is_absolute():
            self.report_dir = str(suite_dir / report_dir)

    @property
    def dagster_name(self) -> str:
        return generate_dagster_name(self.name)

    @property
    def run_config(self) -> dict:
        method_config = {
            "cross_check": self.cross_check,
            "simulate": self.simulate,
            "rng_seed": int(self.workload_config.get("rng_seed", 0)),
        }
        return {
            "ops": {
                "dataset_stats": {
                    "config": {"exact_diameter": self.exact_diameter, "nsp": self.nsp}
                },
                "workload": {"config": self.workload_config},
                **{
                    benchmark_op(method).name: {"config": method_config}
                    for method in self.methods
                },
                "export_reports": {"config": {"report_dir": self.report_dir}},
            }
        }

    @property
    def dagster_job(self) -> JobDefinition:
        @job(
            name=self.dagster_name,
            description=f"Runs the `{self.name}` benchmark: {', '.join(self.methods)}.",
            resource_defs={"dataset": graph_dataset_resource.configured(self.graph_config)},
            config=self.run_config,
            op_retry_policy=RetryPolicy(max_retries=self.retries),
        )
        def dagster_job():
            stats = dataset_stats_op()
            workload = workload_op()
            reports = [benchmark_op(method)(workload) for method in self.methods]
            export_reports_op(stats=stats, reports=reports)

        return dagster_job
