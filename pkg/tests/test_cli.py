import json
import subprocess
import sys

import pytest

from gsmatch.bench import RunRecord
from gsmatch.cli import main
from gsmatch.generate import clique, cycle, erdos_renyi
from gsmatch.graph import load_edge_list, write_edge_list


@pytest.fixture
def files(tmp_path):
    def put(name, graph):
        p = tmp_path / name
        with p.open("w") as fh:
            write_edge_list(graph, fh)
        return str(p)

    return {
        "k4": put("k4.txt", clique(4)),
        "c4": put("c4.txt", cycle(4)),
        "tri": put("tri.txt", clique(3)),
        "er": put("er.txt", erdos_renyi(30, 0.2, seed=1)),
        "k12": put("k12.txt", clique(12)),
        "disc": str(_write(tmp_path / "disc.txt", "0 1\n2 3\n")),
        "tmp": tmp_path,
    }


def _write(path, text):
    path.write_text(text)
    return path


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_match_text(files, capsys):
    code, out, _ = run(["match", "--data", files["k4"], "--query", files["tri"]], capsys)
    assert code == 0
    assert "count:  4" in out


def test_match_enumerate_lists_triangles(files, capsys):
    code, out, _ = run(["match", "--data", files["k4"], "--query", files["tri"], "--enumerate",
                        "--output", "json"], capsys)
    doc = json.loads(out)
    assert code == 0
    assert sorted(map(sorted, doc["matches"])) == [[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]]


def test_json_schema_and_round_trip(files, capsys):
    code, out, _ = run(["match", "--data", files["er"], "--query", files["tri"], "--output", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    for key in ("dataset", "query", "config", "count", "timings_ms", "rows", "wall_ms"):
        assert key in doc
    assert set(doc["timings_ms"]) == {"precompute", "filter", "verify"}
    assert len(doc["timings_ms"]["verify"]) == 3
    assert len(doc["rows"]["pre_compaction"]) == len(doc["rows"]["post_compaction"]) == 3
    t = doc["timings_ms"]
    assert t["precompute"] + t["filter"] + sum(t["verify"]) <= doc["wall_ms"]
    assert RunRecord.from_json(doc).to_json() == doc


def test_lookahead_depths_same_count(files, capsys):
    counts = []
    for depth in ("0", "1", "2"):
        code, out, _ = run(["match", "--data", files["er"], "--query", files["c4"], "--lookahead", depth,
                            "--output", "json"], capsys)
        assert code == 0
        counts.append(json.loads(out)["count"])
    assert len(set(counts)) == 1


def test_usage_error(capsys):
    code = None
    with pytest.raises(SystemExit) as exc:
        main(["match", "--data", "x"])
    code = exc.value.code
    assert code == 1
    with pytest.raises(SystemExit) as exc:
        main(["match", "--data", "x", "--query", "y", "--lookahead", "3"])
    assert exc.value.code == 1


def test_missing_file_exit_2(files, capsys):
    code, out, err = run(["match", "--data", str(files["tmp"] / "nope.txt"), "--query", files["tri"],
                          "--output", "json"], capsys)
    assert code == 2
    assert out == ""
    assert "nope.txt" in err


def test_parse_error_exit_2(files, capsys):
    bad = _write(files["tmp"] / "bad.txt", "0 1\nx y\n")
    code, out, err = run(["match", "--data", str(bad), "--query", files["tri"]], capsys)
    assert code == 2 and "line 2" in err and out == ""


def test_disconnected_query_exit_2(files, capsys):
    code, out, _ = run(["match", "--data", files["k4"], "--query", files["disc"], "--output", "json"], capsys)
    assert code == 2 and out == ""


def test_resource_limit_exit_3(files, capsys):
    k4q = files["k4"]
    code, out, err = run(["match", "--data", files["k12"], "--query", k4q, "--max-rows", "10",
                          "--output", "json"], capsys)
    assert code == 3 and out == ""
    assert "10" in err


def test_gen_labels_deterministic(files, capsys):
    a, b = files["tmp"] / "a.lab", files["tmp"] / "b.lab"
    for out in (a, b):
        assert main(["gen", "labels", "--data", files["er"], "--count", "20", "--seed", "1",
                     "--out", str(out)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 30


def test_gen_query_on_k4_is_triangle(files, capsys):
    out = files["tmp"] / "q.txt"
    assert main(["gen", "query", "--data", files["k4"], "--nodes", "3", "--edges", "3",
                 "--out", str(out)]) == 0
    q = load_edge_list(out.read_text())
    assert (q.num_nodes, q.num_edges) == (3, 3)


def test_gen_query_with_labels(files, capsys):
    lab = files["tmp"] / "er.lab"
    assert main(["gen", "labels", "--data", files["er"], "--count", "3", "--out", str(lab)]) == 0
    q, ql = files["tmp"] / "q.txt", files["tmp"] / "q.lab"
    assert main(["gen", "query", "--data", files["er"], "--labels", str(lab), "--nodes", "4",
                 "--edges", "3", "--seed", "7", "--out", str(q), "--labels-out", str(ql)]) == 0
    capsys.readouterr()
    code, out, _ = run(["oracle", "--data", files["er"], "--labels", str(lab), "--query", str(q),
                        "--query-labels", str(ql), "--compare", "--output", "json"], capsys)
    doc = json.loads(out)
    assert code == 0 and doc["agreement"] is True and doc["count"] >= 1


def test_gen_failure_exit_4(files, capsys):
    code, _, err = run(["gen", "query", "--data", files["c4"], "--nodes", "4", "--edges", "6"], capsys)
    assert code == 4 and err


def test_oracle_compare(files, capsys):
    code, out, _ = run(["oracle", "--data", files["k4"], "--query", files["tri"], "--compare"], capsys)
    assert code == 0
    assert "oracle count: 4" in out and "agreement: true" in out
    code, out, _ = run(["oracle", "--data", files["c4"], "--query", files["tri"], "--compare",
                        "--output", "json"], capsys)
    doc = json.loads(out)
    assert doc["count"] == 0 and doc["agreement"] is True


def test_oracle_budget_exit_5(files, capsys):
    code, out, _ = run(["oracle", "--data", files["k12"], "--query", files["k4"], "--budget", "50",
                        "--output", "json"], capsys)
    assert code == 5 and out == ""


def test_bench_query_size(files, capsys):
    code, out, _ = run(["bench", "--data", files["er"], "--sweep", "query-size", "--values", "3:5",
                        "--queries", "2", "--repeats", "2", "--output", "json"], capsys)
    assert code == 0
    doc = json.loads(out)
    assert [p["query_nodes"] for p in doc["points"]] == [3, 4, 5]
    for p in doc["points"]:
        assert {"mean_ms", "std_ms", "runs", "counts", "failures"} <= set(p)


def test_bench_labels_writes_file(files, capsys):
    dest = files["tmp"] / "sweep.json"
    code, _, _ = run(["bench", "--data", files["er"], "--sweep", "labels", "--values", "2,4",
                      "--queries", "2", "--repeats", "2", "--query-nodes", "3", "--query-edges", "2",
                      "--out", str(dest)], capsys)
    assert code == 0
    doc = json.loads(dest.read_text())
    assert [p["labels"] for p in doc["points"]] == [2, 4]


def test_bench_ablation(files, capsys):
    code, out, _ = run(["bench", "--data", files["er"], "--data", files["k12"], "--sweep", "ablation",
                        "--query", files["tri"], "--repeats", "2", "--output", "json"], capsys)
    assert code == 0
    points = json.loads(out)["points"]
    assert len(points) == 2
    for p in points:
        assert p["with"]["count"] == p["without"]["count"]
        assert p["with"]["rows_pre_compaction"] <= p["without"]["rows_pre_compaction"]
        assert "speedup" in p


def test_bench_ablation_needs_query(files, capsys):
    code, _, err = run(["bench", "--data", files["er"], "--sweep", "ablation"], capsys)
    assert code == 1 and "--query" in err


def test_matrix_market_input(files, capsys):
    mtx = _write(files["tmp"] / "k4.mtx",
                 "%%MatrixMarket matrix coordinate pattern symmetric\n4 4 6\n2 1\n3 1\n4 1\n3 2\n4 2\n4 3\n")
    code, out, _ = run(["match", "--data", str(mtx), "--query", files["tri"]], capsys)
    assert code == 0 and "count:  4" in out


def test_module_entry_point(files):
    proc = subprocess.run([sys.executable, "-m", "gsmatch", "match", "--data", files["k4"],
                           "--query", files["tri"], "--output", "json"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["count"] == 4
