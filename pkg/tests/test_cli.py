import csv
import json
import shutil

import pytest

from conftest import DATA
from jigsaw.cli import main

GHZ4 = DATA / "ghz4"
CPMS = ["cpm_1-0.json", "cpm_2-1.json", "cpm_3-0.json", "cpm_3-2.json"]


def test_reconstruct_matches_golden_file(tmp_path):
    out = tmp_path / "out.json"
    code = main(["reconstruct", str(GHZ4 / "global.json"), *[str(GHZ4 / c) for c in CPMS],
                 "--out", str(out)])
    assert code == 0
    assert out.read_bytes() == (GHZ4 / "expected_reconstructed.json").read_bytes()


def test_reconstruct_log_and_weighting_flags(tmp_path):
    args = ["reconstruct", str(GHZ4 / "global.json"), *[str(GHZ4 / c) for c in CPMS]]
    assert main(args + ["--out", str(tmp_path / "p.json"), "--plain-probability-weight",
                        "--log", str(tmp_path / "log.csv")]) == 0
    assert main(args + ["--out", str(tmp_path / "o.json"), "--odds-weight"]) == 0
    rows = list(csv.reader(open(tmp_path / "log.csv")))
    assert rows[0] == ["layer", "round", "hellinger"] and len(rows) > 2
    p = json.loads((tmp_path / "p.json").read_text())["probabilities"]
    o = json.loads((tmp_path / "o.json").read_text())["probabilities"]
    assert p != o


def test_reconstruct_bad_marginal_exits_2(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"width": 4, "qubits": [1, 0], "counts": {"011": 3}}))
    code = main(["reconstruct", str(GHZ4 / "global.json"), str(bad), "--out", str(tmp_path / "o.json")])
    assert code == 2
    assert str(bad) in capsys.readouterr().err


def test_reconstruct_degenerate_exits_3(tmp_path):
    glob = tmp_path / "g.json"
    glob.write_text(json.dumps({"width": 2, "counts": {"00": 5}}))
    m = tmp_path / "m.json"
    m.write_text(json.dumps({"width": 2, "qubits": [0], "counts": {"1": 5}}))
    assert main(["reconstruct", str(glob), str(m), "--out", str(tmp_path / "o.json")]) == 3


def test_metrics_command(tmp_path, capsys):
    out = tmp_path / "r.json"
    assert main(["metrics", str(GHZ4 / "expected_reconstructed.json"), "--ideal",
                 str(GHZ4 / "ideal.json"), "--json", str(out), "--verbose"]) == 0
    report = json.loads(out.read_text())
    assert report["tvd_raw"] == pytest.approx(2 * report["tvd"])
    assert report["fidelity"] == pytest.approx(1 - report["tvd"])
    assert "pst" in capsys.readouterr().out


def test_metrics_with_graph(tmp_path):
    g = tmp_path / "g.txt"
    g.write_text("3 3 2\n0 1\n1 2\n0 2\n")
    pmf = tmp_path / "p.json"
    pmf.write_text(json.dumps({"width": 3, "probabilities": {"011": 1.0}}))
    out = tmp_path / "r.json"
    assert main(["metrics", str(pmf), "--ideal", str(pmf), "--correct", "011",
                 "--graph", str(g), "--json", str(out)]) == 0
    assert json.loads(out.read_text())["arg"] == 0.0


def test_estimate_trials(capsys):
    assert main(["estimate-trials", "2"]) == 0
    assert capsys.readouterr().out.strip() == "148"


def test_simulate_then_reconstruct(tmp_path):
    run = tmp_path / "run"
    assert main(["simulate", "--workload", "bv", "--width", "5", "--secret", "10110",
                 "--trials", "4000", "--out", str(run)]) == 0
    cpms = sorted(str(p) for p in run.glob("cpm_*.json"))
    assert len(cpms) == 5
    assert main(["reconstruct", str(run / "global.json"), *cpms, "--out", str(run / "r.json")]) == 0
    assert main(["metrics", str(run / "r.json"), "--ideal", str(run / "ideal.json")]) == 0


def test_multilayer_simulate_and_reconstruct(tmp_path):
    run = tmp_path / "run"
    assert main(["simulate", "--width", "5", "--layers", "2:3", "--trials", "6000",
                 "--out", str(run)]) == 0
    cpms = sorted(str(p) for p in run.glob("cpm_*.json"))
    assert main(["reconstruct", str(run / "global.json"), *cpms, "--out", str(run / "r.json")]) == 0
    conv = json.loads((run / "r.json").read_text())["convergence"]
    assert [c["size"] for c in conv] == [3, 2]


def test_pipeline_outputs_and_config(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"workload": "ghz", "width": 5, "trials": 5000}))
    out = tmp_path / "p"
    assert main(["pipeline", "--config", str(cfg), "--seed", "2", "--out", str(out)]) == 0
    for name in ("comparison.csv", "report.json", "reconstructed.json", "pst.png",
                 "convergence.png", "counts/global.json", "counts/baseline.json"):
        assert (out / name).exists(), name
    rows = list(csv.DictReader(open(out / "comparison.csv")))
    assert [r["method"] for r in rows] == ["baseline", "global-only", "jigsaw"]
    used = json.loads((out / "config.json").read_text())
    assert used["width"] == 5 and used["seed"] == 2 and used["trials"] == 5000


def test_pipeline_config_rejects_unknown_keys(tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"widht": 5}))
    assert main(["pipeline", "--config", str(cfg), "--out", str(tmp_path / "p")]) == 2


def test_invalid_secret_exits_2(tmp_path):
    assert main(["simulate", "--workload", "bv", "--width", "4", "--secret", "101",
                 "--out", str(tmp_path)]) == 2


def test_scaling_command(tmp_path):
    out = tmp_path / "s.csv"
    assert main(["scaling", "--entries", "128,256", "--cpms", "2", "--width", "10",
                 "--repeats", "1", "--out", str(out)]) == 0
    assert len(out.read_text().splitlines()) == 3
