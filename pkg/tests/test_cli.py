import csv
import json
import os
import subprocess
import sys

import pytest

from protozs.cli import main


def run(*argv):
    return main([str(a) for a in argv])


def test_split_writes_files(tmp_path):
    data = tmp_path / "data"
    assert run("synth", "--relations", 24, "--instances-per", 10, "--out", data) == 0
    out = tmp_path / "split"
    assert run("split", "--corpus", data / "corpus.jsonl", "--catalog", data / "catalog.json",
               "--m", 15, "--seed", 7, "--out", out) == 0
    rec = json.loads((out / "split.json").read_text())
    assert len(rec["unseen"]) == 15
    assert (out / "train.jsonl").stat().st_size > 0 and (out / "test.jsonl").stat().st_size > 0


def test_unsatisfiable_split_is_data_error(bench_paths, tmp_path):
    code = run("split", "--corpus", bench_paths["corpus"], "--catalog", bench_paths["catalog"],
               "--m", 9, "--out", tmp_path)
    assert code == 2


def test_missing_vectors_exit_1(bench_paths, tmp_path):
    missing = tmp_path / "no_such_vectors.txt"
    proc = subprocess.run(
        [sys.executable, "-m", "protozs.cli", "virtual-labels", "--graph", bench_paths["graph"],
         "--catalog", bench_paths["catalog"], "--vectors", str(missing), "--out", str(tmp_path / "v.json")],
        capture_output=True, text=True)
    assert proc.returncode == 1
    assert str(missing) in proc.stderr


def test_bad_config_exit_1(tmp_path, bench_paths):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"tau": 3.0}))
    assert run("split", "--config", cfg, "--corpus", bench_paths["corpus"],
               "--catalog", bench_paths["catalog"], "--out", tmp_path / "s") == 1
    cfg.write_text(json.dumps({"bogus": 1}))
    assert run("split", "--config", cfg, "--out", tmp_path / "s") == 1


def test_config_file_and_env(tmp_path, bench_paths, monkeypatch):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"corpus": bench_paths["corpus"], "catalog": bench_paths["catalog"],
                               "m": 2, "seed": 3}))
    monkeypatch.setenv("PROTOZS_CONFIG", str(cfg))
    assert run("split", "--out", tmp_path / "a") == 0
    assert len(json.loads((tmp_path / "a" / "split.json").read_text())["unseen"]) == 2
    assert run("split", "--m", 4, "--out", tmp_path / "b") == 0
    assert len(json.loads((tmp_path / "b" / "split.json").read_text())["unseen"]) == 4


def test_synth_cli_deterministic(tmp_path):
    for d in ("a", "b"):
        assert run("synth", "--relations", 5, "--instances-per", 4, "--out", tmp_path / d) == 0
    for name in os.listdir(tmp_path / "a"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_end_to_end_chain(bench_paths, tmp_path):
    p = bench_paths
    sp = tmp_path / "split"
    assert run("split", "--corpus", p["corpus"], "--catalog", p["catalog"], "--m", 3, "--seed", 7,
               "--out", sp) == 0
    common = ["--catalog", p["catalog"], "--vectors", p["vectors"]]
    assert run("augment", "--corpus", sp / "train.jsonl", *common, "--unseen", sp / "split.json",
               "--out", tmp_path / "aug.jsonl") == 0
    assert run("virtual-labels", "--graph", p["graph"], *common, "--out", tmp_path / "vl.json") == 0
    assert run("train", "--corpus", sp / "train.jsonl", *common, "--augmented", tmp_path / "aug.jsonl",
               "--labels", tmp_path / "vl.json", "--checkpoint-out", tmp_path / "ck.json") == 0
    assert run("predict", "--corpus", sp / "test.jsonl", "--vectors", p["vectors"],
               "--checkpoint", tmp_path / "ck.json", "--out", tmp_path / "pred.jsonl") == 0
    first = json.loads((tmp_path / "pred.jsonl").read_text().splitlines()[0])
    assert set(first) == {"id", "gold", "pred", "probs"}
    assert sum(first["probs"].values()) == pytest.approx(1.0, abs=1e-6)
    assert run("eval", "--predictions", tmp_path / "pred.jsonl", "--unseen", sp / "split.json",
               "--out", tmp_path / "metrics.csv") == 0
    rows = {r["relation"]: r for r in csv.DictReader((tmp_path / "metrics.csv").open())}
    assert float(rows["__unseen_macro__"]["f1"]) >= 0.90


def test_sweep_cli(tmp_path):
    data = tmp_path / "d"
    assert run("synth", "--relations", 5, "--instances-per", 8, "--out", data) == 0
    args = ["--corpus", data / "corpus.jsonl", "--catalog", data / "catalog.json",
            "--vectors", data / "vectors.txt", "--graph", data / "graph.csv"]
    assert run("sweep", *args, "--taus", "0.5,0.6", "--ms", 1, "--hidden", 8, "--epochs", 1,
               "--out", tmp_path / "s.csv") == 0
    rows = list(csv.DictReader((tmp_path / "s.csv").open()))
    assert len(rows) == 2 and sum(int(r["best"]) for r in rows) == 1
