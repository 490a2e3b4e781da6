import json

import pytest
import yaml

from argrel.cli import main
from argrel.synthetic import write_demo

from .conftest import write_records


@pytest.fixture
def demo(tmp_path):
    paths = write_demo(tmp_path / "demo", n=120)
    config = {
        "corpus": str(paths["corpus"]),
        "lexicon": str(paths["lexicon"]),
        "vectors": {"toy": {"path": str(paths["vectors"]), "dim": 8}},
        "model": {"gru_hidden": 16, "seq_len": 12, "dense_sizes": [32], "epochs": 40, "ae_hidden": 16},
    }
    cfg = tmp_path / "run.yaml"
    cfg.write_text(yaml.safe_dump(config))
    return paths, cfg


def test_stats(tmp_path, capsys):
    path = write_records(tmp_path / "c.jsonl", [
        {"id": "1", "dataset": "web", "child": "a", "parent": "b", "label": "attack"},
        {"id": "2", "dataset": "web", "child": "a", "parent": "b", "label": "support"},
        {"id": "3", "dataset": "micro", "child": "a", "parent": "b", "label": "support"},
    ])
    assert main(["stats", "--corpus", str(path)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[1].split() == ["micro", "0", "1"]
    assert lines[2].split() == ["web", "1", "1"]


def test_stats_empty_corpus(tmp_path, capsys):
    path = tmp_path / "empty.jsonl"
    path.write_text("")
    assert main(["stats", "--corpus", str(path)]) == 0
    assert len(capsys.readouterr().out.splitlines()) == 1


def test_stats_missing_file(tmp_path, capsys):
    assert main(["stats", "--corpus", str(tmp_path / "nope.jsonl")]) != 0
    assert "not found" in capsys.readouterr().err


def test_bad_config_key(tmp_path, capsys):
    cfg = tmp_path / "bad.yaml"
    cfg.write_text("corpus: x\nflavour: 3\n")
    assert main(["stats", "--config", str(cfg)]) == 2
    assert "flavour" in capsys.readouterr().err


def test_train_then_eval(demo, tmp_path, capsys):
    paths, cfg = demo
    out = tmp_path / "run"
    assert main(["train", "--config", str(cfg), "--architecture", "concat", "--out", str(out)]) == 0
    log_lines = (out / "train.log").read_text().splitlines()
    assert len(log_lines) == 40 and log_lines[0].startswith("epoch 1 loss ")
    assert main(["eval", "--config", str(cfg), "--checkpoint", str(out / "model.npz"),
                 "--out", str(out / "eval")]) == 0
    record = json.loads((out / "eval" / "results.json").read_text())[0]
    for ds, value in record["f1_attack"].items():
        assert ds == "cdcp" and value is None or value >= 0.99
    assert all(v >= 0.99 for v in record["f1_support"].values())


def test_train_baseline_and_eval(demo, tmp_path):
    _, cfg = demo
    out = tmp_path / "rf"
    assert main(["train", "--config", str(cfg), "--architecture", "rf", "--out", str(out)]) == 0
    assert main(["eval", "--config", str(cfg), "--checkpoint", str(out / "model.npz"),
                 "--out", str(out), "--exclude", "essay"]) == 0
    record = json.loads((out / "results.json").read_text())[0]
    assert "essay" not in record["f1_attack"]


def test_eval_dimension_mismatch(demo, tmp_path, capsys):
    paths, cfg = demo
    out = tmp_path / "m"
    assert main(["train", "--config", str(cfg), "--architecture", "mix", "--epochs", "1", "--out", str(out)]) == 0
    other = tmp_path / "v4.txt"
    other.write_text("agree 1 0 0 0\n")
    code = main(["eval", "--config", str(cfg), "--vectors", str(other), "--dim", "4",
                 "--checkpoint", str(out / "model.npz")])
    assert code == 2 and "models:" in capsys.readouterr().err


def test_benchmark_two_dataset_training(demo, tmp_path):
    _, cfg = demo
    raw = yaml.safe_load(cfg.read_text())
    raw["benchmark"] = {"architectures": ["rf"], "train_sets": [["web", "essay"]]}
    cfg.write_text(yaml.safe_dump(raw))
    out = tmp_path / "bench"
    assert main(["benchmark", "--config", str(cfg), "--out", str(out)]) == 0
    lines = (out / "results.csv").read_text().splitlines()
    header = lines[0].split(",")
    assert len(lines) == 3  # one report: F1 A and F1 S lines
    for line in lines[1:]:
        cells = line.split(",")
        assert cells[header.index("web")] == "" and cells[header.index("essay")] == ""
        assert cells[header.index("micro")] not in ("", "null")
    assert lines[1].split(",")[header.index("cdcp")] == "null"


def test_benchmark_rejects_ukp(demo, tmp_path, capsys):
    _, cfg = demo
    raw = yaml.safe_load(cfg.read_text())
    raw["benchmark"] = {"architectures": ["rf"], "train_sets": [["ukp"]]}
    cfg.write_text(yaml.safe_dump(raw))
    assert main(["benchmark", "--config", str(cfg), "--out", str(tmp_path / "b")]) == 2
    assert "ukp" in capsys.readouterr().err


def test_gradcheck_exit_zero(capsys):
    assert main(["gradcheck", "--architecture", "concat", "attention", "--seeds", "1"]) == 0
    out = capsys.readouterr().out
    assert "FAIL" not in out and out.count("pass") >= 2
