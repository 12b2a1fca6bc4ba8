from __future__ import annotations

from functools import lru_cache
from pathlib import Path
from typing import TYPE_CHECKING, List, Optional

import yaml
from dagster import Field, In, OpDefinition, Out, op

from dagster_ftsc.queries import FtQuery
from dagster_ftsc.report import (
    dataset_stats,
    report_from_document,
    report_to_document,
    write_reports_csv,
    write_reports_yaml,
)
from dagster_ftsc.runner import run_workload
from dagster_ftsc.utils import generate_dagster_name
from dagster_ftsc.workload import WorkloadSpec, gen_bad_queries, gen_random_queries

if TYPE_CHECKING:
    from dagster_ftsc.graph_resource import GraphDataset


@op(
    name="dataset_stats",
    description="Compute size, strong articulation points and diameter of the dataset.",
    out={"stats": Out(dict, description="The dataset statistics.")},
    tags={"kind": "ftsc"},
    required_resource_keys={"dataset"},
    config_schema={
        "exact_diameter": Field(
            bool,
            description="Run all-pairs BFS for the exact diameter.",
            default_value=False,
            is_required=False,
        ),
        "nsp": Field(
            bool,
            description="Count the vertices in proper separation pairs.",
            default_value=False,
            is_required=False,
        ),
    },
)
def dataset_stats_op(context) -> dict:
    dataset: GraphDataset = context.resources.dataset
    stats = dataset_stats(
        dataset.graph,
        exact_diameter_flag=context.op_config["exact_diameter"],
        nsp=context.op_config["nsp"],
    )
    document = {"graph_name": dataset.name, **stats.to_document()}
    context.log.info(f"Statistics of {dataset.name}: {document}")
    return document


@op(
    name="workload",
    description="Generate the query workload every benchmark op answers.",
    out={
        "workload": Out(dict, description="The seeds (bad workloads only) and the queries.")
    },
    tags={"kind": "ftsc"},
    required_resource_keys={"dataset"},
    config_schema={
        "kind": Field(
            str, description="random or bad.", default_value="random", is_required=False
        ),
        "count": Field(
            int, description="Number of queries.", default_value=1000, is_required=False
        ),
        "rng_seed": Field(int, default_value=0, is_required=False),
        "seed_count": Field(
            int,
            description="Seeds stranded by a bad workload.",
            default_value=10,
            is_required=False,
        ),
    },
)
def workload_op(context) -> dict:
    dataset: GraphDataset = context.resources.dataset
    spec = WorkloadSpec(**context.op_config)
    seeds: Optional[List[int]] = None
    if spec.kind == "bad":
        seeds, queries = gen_bad_queries(dataset.graph, spec)
    else:
        queries = gen_random_queries(dataset.graph, spec)
    context.log.info(f"Generated {len(queries)} {spec.kind} queries on {dataset.name}")
    return {"seeds": seeds, "queries": [tuple(q) for q in queries]}


@lru_cache
def benchmark_op(
    method: str,
    dagster_name: Optional[str] = None,
) -> OpDefinition:
    """
    Answer the workload with one engine using a Dagster op.

    This factory is cached so the same method maps to the same op definition
    within a repository.

    Args:
        method (str): The engine descriptor, e.g. `tree:mcn` or `partial-tree:3`.
        dagster_name (Optional[str], optional): The Dagster name to use for the op.
            Defaults to None.

    Returns:
        OpDefinition: The Dagster op definition.
    """
    dagster_name = dagster_name or generate_dagster_name(f"benchmark {method}")

    @op(
        name=dagster_name,
        description=f"Answer the workload with `{method}`.",
        ins={"workload": In(dict)},
        out={"report": Out(dict, description="The report document.")},
        tags={"kind": "ftsc"},
        required_resource_keys={"dataset"},
        config_schema={
            "cross_check": Field(
                bool,
                description="Compare every answer with ground truth.",
                default_value=False,
                is_required=False,
            ),
            "simulate": Field(
                bool,
                description="Answer ChTree internal nodes by bidirectional BFS.",
                default_value=False,
                is_required=False,
            ),
            "rng_seed": Field(
                int,
                description="Seed for seed choice and the random splitter.",
                default_value=0,
                is_required=False,
            ),
        },
    )
    def dagster_op(context, workload: dict) -> dict:
        dataset: GraphDataset = context.resources.dataset
        report = run_workload(
            dataset.graph,
            method,
            [FtQuery(*q) for q in workload["queries"]],
            cross_check=context.op_config["cross_check"],
            graph_name=dataset.name,
            seeds=workload["seeds"],
            rng_seed=context.op_config["rng_seed"],
            simulate=context.op_config["simulate"],
            log=context.log,
        )
        return report_to_document(report)

    return dagster_op


@op(
    name="export_reports",
    description="Write the reports as YAML documents and a CSV table.",
    ins={"stats": In(dict), "reports": In(List[dict])},
    out={"paths": Out(list, description="The files written.")},
    tags={"kind": "ftsc"},
    config_schema={
        "report_dir": Field(
            str,
            description="Directory the report files are written to.",
            default_value="reports",
            is_required=False,
        ),
    },
)
def export_reports_op(context, stats: dict, reports: List[dict]) -> list:
    report_dir = Path(context.op_config["report_dir"])
    report_dir.mkdir(parents=True, exist_ok=True)
    parsed = [report_from_document(document) for document in reports]
    name = generate_dagster_name(stats["graph_name"])

    stats_path = report_dir / f"{name}.stats.yml"
    with stats_path.open("w") as stream:
        yaml.safe_dump(stats, stream, sort_keys=False)

    yaml_path = report_dir / f"{name}.yml"
    with yaml_path.open("w") as stream:
        write_reports_yaml(parsed, stream)
    csv_path = report_dir / f"{name}.csv"
    with csv_path.open("w", newline="") as stream:
        write_reports_csv(parsed, stream)

    context.log.info(f"Wrote {len(parsed)} reports to {yaml_path} and {csv_path}")
    return [str(stats_path), str(yaml_path), str(csv_path)]
