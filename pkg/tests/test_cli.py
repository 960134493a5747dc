import json

import pytest

from deltacolor.cli import main


def read_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def test_decompose_only_complete_clique(tmp_path):
    out = tmp_path / "dec.json"
    code = main([
        "run", "--gen", "complete:21", "--epsilon", "0.1",
        "--seed", "7", "--mode", "decompose-only", "--out", str(out),
    ])
    assert code == 0
    doc = read_json(out)
    assert doc["num_cliques"] == 1
    assert doc["sparse"] == []
    assert len(doc["cliques"][0]["members"]) == 21
    assert doc["metrics"]["weak_diameter"] == [1]
    assert all(v == 0 for v in doc["metrics"]["external_degree"].values())
    assert doc["invariant_failures"] == []


def test_full_run_and_verify_roundtrip(tmp_path):
    graph_file = tmp_path / "g.edges"
    assert main(["generate", "--gen", "gnp:60,0.3", "--seed", "3", "--out", str(graph_file)]) == 0

    report_file = tmp_path / "report.json"
    code = main([
        "run", "--input", str(graph_file), "--mode", "full",
        "--seed", "1", "--out", str(report_file),
    ])
    assert code == 0
    doc = read_json(report_file)
    assert doc["complete"] is True
    assert doc["invariant_failures"] == []
    assert len(doc["coloring"]) == 60
    for key in ("seed", "n", "delta", "epsilon", "K", "main_path", "rounds_used", "steps"):
        assert key in doc

    assert main([
        "run", "--input", str(graph_file), "--mode", "verify",
        "--coloring", str(report_file),
    ]) == 0

    # corrupt one entry: must fail verification with exit 1
    doc["coloring"]["0"] = doc["coloring"]["1"] = 1
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(doc))
    assert main([
        "run", "--input", str(graph_file), "--mode", "verify", "--coloring", str(bad),
    ]) == 1


def test_reports_are_byte_stable(tmp_path):
    out1 = tmp_path / "a.json"
    out2 = tmp_path / "b.json"
    argv = ["run", "--gen", "gnp:80,0.4", "--seed", "5", "--mode", "full"]
    assert main(argv + ["--out", str(out1)]) == 0
    assert main(argv + ["--out", str(out2)]) == 0
    assert out1.read_bytes() == out2.read_bytes()


def test_initial_only_mode(tmp_path):
    out = tmp_path / "init.json"
    code = main([
        "run", "--gen", "gnp:200,0.4", "--seed", "2",
        "--mode", "initial-only", "--out", str(out),
    ])
    assert code == 0
    doc = read_json(out)
    assert doc["steps"][0]["kind"] == "initial"
    assert doc["good_colors"]["min_slack"] >= 0
    assert doc["invariant_failures"] == []


def test_dense_steps_mode_with_step_delta(tmp_path):
    out = tmp_path / "dense.json"
    code = main([
        "run", "--gen", "clique_chain:50x4", "--epsilon", "0.1", "--seed", "3",
        "--mode", "dense-steps", "--steps", "1", "--step-delta", "0.04",
        "--out", str(out),
    ])
    assert code == 0
    doc = read_json(out)
    assert doc["num_cliques"] == 4
    assert len(doc["steps"]) == 1
    assert doc["steps"][0]["colored"] > 0
    assert doc["gammas"][0] == pytest.approx(0.6)


def test_fallback_only_mode(tmp_path):
    out = tmp_path / "fb.json"
    code = main([
        "run", "--gen", "complete:30", "--seed", "1",
        "--mode", "fallback-only", "--out", str(out),
    ])
    assert code == 0
    doc = read_json(out)
    assert doc["invariant_failures"] == []
    assert sum(s["colored"] for s in doc["steps"]) == 30


def test_csv_step_output(tmp_path):
    out = tmp_path / "steps.csv"
    code = main([
        "run", "--gen", "gnp:50,0.3", "--seed", "4", "--mode", "full",
        "--format", "csv", "--out", str(out),
    ])
    assert code == 0
    lines = out.read_text().strip().splitlines()
    assert lines[0].startswith("kind,colored,de_colored")
    assert len(lines) >= 2


def test_repetitions_aggregate(tmp_path):
    out = tmp_path / "agg.json"
    code = main([
        "run", "--gen", "clique_chain:100x3", "--epsilon", "0.04", "--K", "0.4",
        "--force-main-path", "--seed", "10", "--repetitions", "8",
        "--mode", "full", "--out", str(out),
    ])
    assert code == 0
    doc = read_json(out)
    assert doc["repetitions"] == 8
    assert doc["runs_with_failures"] == 0
    assert "dense" in doc["per_kind"]
    assert "1" in doc["dense_de_coloring_frequency"]


def test_config_file_supplies_defaults(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"gen": "complete:21", "mode": "decompose-only", "epsilon": 0.1}))
    out = tmp_path / "out.json"
    code = main(["run", "--config", str(cfg), "--out", str(out)])
    assert code == 0
    assert read_json(out)["num_cliques"] == 1


def test_config_file_accepts_generator_spec_object(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({
        "gen": {"kind": "gnp", "n": 80, "p": 0.4, "seed": 5},
        "mode": "full",
        "seed": 2,
    }))
    out = tmp_path / "out.json"
    assert main(["run", "--config", str(cfg), "--out", str(out)]) == 0
    doc = read_json(out)
    assert doc["n"] == 80 and doc["complete"] is True


def test_config_file_flags_win(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"gen": "complete:21", "mode": "decompose-only", "epsilon": 0.1}))
    out = tmp_path / "out.json"
    code = main(["run", "--config", str(cfg), "--gen", "complete:25", "--out", str(out)])
    assert code == 0
    assert len(read_json(out)["cliques"][0]["members"]) == 25


def test_unknown_config_key_is_an_error(tmp_path):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"gen": "complete:21", "bogus": 1}))
    assert main(["run", "--config", str(cfg)]) == 2


def test_usage_errors_exit_two(tmp_path):
    assert main(["run"]) == 2  # neither --input nor --gen
    assert main(["run", "--gen", "nonsense:1"]) == 2
    assert main(["run", "--input", str(tmp_path / "missing.edges")]) == 2
    assert main(["run", "--gen", "complete:10", "--mode", "verify"]) == 2  # no --coloring
    assert main(["run", "--gen", "complete:10", "--epsilon", "0.3"]) == 2


def test_epsilon_from_k_alias(tmp_path):
    out = tmp_path / "r.json"
    code = main([
        "run", "--gen", "complete:21", "--epsilon-from-K", "16",
        "--seed", "7", "--mode", "full", "--out", str(out),
    ])
    assert code == 0
    doc = read_json(out)
    assert doc["K"] == 16.0
    assert doc["main_path"] is False


def test_output_dir_env(tmp_path, monkeypatch):
    monkeypatch.setenv("DELTACOLOR_OUT_DIR", str(tmp_path))
    code = main(["run", "--gen", "complete:10", "--mode", "full", "--out", "report.json"])
    assert code == 0
    assert (tmp_path / "report.json").exists()


def test_stdout_report(capsys):
    code = main(["run", "--gen", "complete:5", "--mode", "full", "--seed", "0"])
    assert code == 0
    doc = json.loads(capsys.readouterr().out)
    assert doc["complete"] is True
