import logging
import os
from functools import cached_property
from pathlib import Path
from typing import Union

from dagster import DagsterLogManager, Field, get_dagster_logger, resource

from dagster_ftsc.exceptions import FtscError, GraphFormatError
from dagster_ftsc.graph import GRAPH_FORMATS, Digraph, extract_scc_by_rank, read_graph

logger = get_dagster_logger()


class GraphDataset:
    """A graph file and the SCC extracted from it, loaded once on first use."""

    def __init__(
        self,
        path: str,
        format: str = "snap",
        rank: int = 1,
        log: Union[logging.Logger, DagsterLogManager] = logger,
    ) -> None:
        if format not in GRAPH_FORMATS:
            raise GraphFormatError(
                f"Unknown graph format {format}, expected one of {GRAPH_FORMATS}"
            )
        self.path = path
        self.format = format
        self.rank = rank
        self.log = log

    @property
    def name(self) -> str:
        return Path(self.path).stem

    @cached_property
    def raw(self) -> Digraph:
        if not self.path:
            raise FtscError("No graph path configured; set FTSC_GRAPH_PATH or the path config")
        graph, _ = read_graph(self.path, self.format)
        self.log.info(f"Read {self.name}: n={graph.vertex_count}, m={graph.edge_count}")
        return graph

    @cached_property
    def graph(self) -> Digraph:
        extracted = extract_scc_by_rank(self.raw, self.rank)
        self.log.info(
            f"Extracted SCC of rank {self.rank} from {self.name}: "
            f"n={extracted.vertex_count}, m={extracted.edge_count}"
        )
        return extracted


@resource(
    description="A directed graph dataset reduced to one of its SCCs.",
    config_schema={
        "path": Field(
            str,
            description="The path to the graph file.",
            default_value=os.getenv("FTSC_GRAPH_PATH", ""),
            is_required=False,
        ),
        "format": Field(
            str,
            description="The file format, snap or dimacs.",
            default_value="snap",
            is_required=False,
        ),
        "rank": Field(
            int,
            description="Which SCC to keep, 1 being the largest.",
            default_value=1,
            is_required=False,
        ),
    },
)
def graph_dataset_resource(init_context):
    config = init_context.resource_config
    return GraphDataset(
        path=config["path"],
        format=config["format"],
        rank=config["rank"],
        log=init_context.log,
    )
