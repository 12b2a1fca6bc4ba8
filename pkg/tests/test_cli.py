import io
import shutil
from pathlib import Path

import pytest
import yaml

from dagster_ftsc.cli import main
from dagster_ftsc.graph import read_graph
from dagster_ftsc.report import read_reports_yaml

BENCHMARK_TEST_PATH = Path(__file__).parent / "benchmark_test_project"
FIX_A_PATH = str(BENCHMARK_TEST_PATH / "data" / "fix_a.snap")


@pytest.fixture
def two_scc_graph(tmp_path):
    path = tmp_path / "two_sccs.txt"
    path.write_text("a b\nb a\nb c\nc d\nd e\ne c\n")
    return str(path)


@pytest.fixture
def k4_dimacs(tmp_path):
    arcs = [f"a {u} {v} 1" for u in range(1, 5) for v in range(1, 5) if u != v]
    path = tmp_path / "k4.gr"
    path.write_text("c bidirected K4\np sp 4 12\n" + "\n".join(arcs) + "\n")
    return str(path)


def test_stats(capsys):
    assert main(["stats", FIX_A_PATH, "--exact-diameter", "--nsp"]) == 0
    stats = yaml.safe_load(capsys.readouterr().out)
    assert stats == {"n": 6, "m": 8, "n_a": 6, "n_sp": 6, "d": 5, "d_lower_bound": 5}


def test_extract_scc(tmp_path, two_scc_graph):
    output = tmp_path / "rank2.snap"
    assert main(["extract-scc", two_scc_graph, str(output), "--rank", "2"]) == 0
    graph, id_map = read_graph(str(output))
    assert set(id_map) == {"a", "b"}
    assert graph.edge_count == 2


def test_extract_scc_rank_out_of_range(tmp_path, two_scc_graph):
    assert main(["extract-scc", two_scc_graph, str(tmp_path / "out.snap"), "--rank", "3"]) == 2


def test_build_tree(tmp_path, capsys):
    out = tmp_path / "tree.yml"
    assert main(["build-tree", FIX_A_PATH, "--splitter", "lnt", "--out", str(out)]) == 0
    assert capsys.readouterr().out.strip() == "2"
    document = yaml.safe_load(out.read_text())
    assert document["height"] == 2
    assert len(document["nodes"]) == 6


def test_partial_tree(tmp_path, capsys):
    out = tmp_path / "partial.yml"
    assert main(["partial-tree", FIX_A_PATH, "--delta", "8", "--out", str(out)]) == 0
    assert capsys.readouterr().out.strip() == "0"
    document = yaml.safe_load(out.read_text())
    assert document["leaves"] == 1
    assert document["nodes"][0]["leaf_kind"] == "Small"


def test_partial_tree_delta_out_of_range():
    assert main(["partial-tree", FIX_A_PATH, "--delta", "9"]) == 2


def test_find_delta(capsys, k4_dimacs):
    assert main(["find-delta", k4_dimacs, "--format", "dimacs"]) == 0
    assert capsys.readouterr().out.strip() == "1"


def test_query_writes_reports(tmp_path, capsys):
    report, table = tmp_path / "report.yml", tmp_path / "report.csv"
    argv = [
        "query",
        FIX_A_PATH,
        "--method",
        "bi-bfs",
        "--method",
        "tree:mcn",
        "--workload",
        "random:100",
        "--cross-check",
        "--report",
        str(report),
        "--csv",
        str(table),
    ]
    assert main(argv) == 0
    assert capsys.readouterr().out == ""
    with report.open() as stream:
        reports = read_reports_yaml(stream)
    assert [r.method for r in reports] == ["bi-bfs", "tree:mcn"]
    assert all(r.graph_name == "fix_a" for r in reports)
    assert len(table.read_text().splitlines()) == 3


def test_query_prints_reports(capsys):
    argv = ["query", FIX_A_PATH, "--method", "chtree:1", "--workload", "random:20"]
    assert main(argv) == 0
    (report,) = read_reports_yaml(io.StringIO(capsys.readouterr().out))
    assert report.query_count == 20


def test_query_bad_workload(capsys):
    two_triangles = str(BENCHMARK_TEST_PATH / "data" / "two_triangles.snap")
    argv = [
        "query",
        two_triangles,
        "--method",
        "chtree:2",
        "--workload",
        "bad:30",
        "--seed-count",
        "2",
        "--simulate",
        "--cross-check",
    ]
    assert main(argv) == 0
    (report,) = read_reports_yaml(io.StringIO(capsys.readouterr().out))
    assert report.method == "chtree:2"


def test_errors_exit_with_two(tmp_path):
    assert main(["query", FIX_A_PATH, "--method", "nope", "--workload", "random:5"]) == 2
    assert main(["stats", str(tmp_path / "absent.snap")]) == 2


def test_argument_errors():
    with pytest.raises(SystemExit):
        main(["query", FIX_A_PATH, "--method", "bi-bfs", "--workload", "random"])
    with pytest.raises(SystemExit):
        main(["build-tree", FIX_A_PATH, "--splitter", "degree"])
    with pytest.raises(SystemExit):
        main(["partial-tree", FIX_A_PATH, "--delta", "0"])


def test_suite(tmp_path):
    project = tmp_path / "benchmark_test_project"
    shutil.copytree(BENCHMARK_TEST_PATH, project)
    assert main(["suite", str(project / "benchmarks.yml")]) == 0
    assert (project / "reports" / "fix_a.csv").exists()
