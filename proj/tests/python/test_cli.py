"""Drives the saen CLI binary end to end (exit codes, files, report shapes)."""

import json
import os
import subprocess

import pytest

CLI = os.environ.get("SAEN_CLI")

pytestmark = pytest.mark.skipif(not CLI, reason="SAEN_CLI not set")


def run(*args, cwd):
    return subprocess.run([CLI, *args], cwd=cwd, capture_output=True, text=True)


@pytest.fixture()
def workspace(tmp_path):
    data = tmp_path / "data" / "toy"
    data.mkdir(parents=True)
    a, ind, labels = [], [], []
    offset = 0
    for i in range(20):
        if i % 2 == 0:
            edges = [(1, 2), (2, 3), (1, 3)]
            n = 3
            labels.append(0)
        else:
            n = 3 + (i // 2) % 4
            edges = [(k, k + 1) for k in range(1, n)]
            labels.append(1)
        a += [f"{u + offset}, {v + offset}" for u, v in edges]
        ind += [str(i + 1)] * n
        offset += n
    (data / "toy_A.txt").write_text("\n".join(a) + "\n")
    (data / "toy_graph_indicator.txt").write_text("\n".join(ind) + "\n")
    (data / "toy_graph_labels.txt").write_text("\n".join(map(str, labels)) + "\n")
    config = {
        "dataset": {"dir": "data/toy", "name": "toy"},
        "radii": [0, 1],
        "layers": {"s0": [2], "s1": [4, 2], "s2": [4, 2]},
        "epochs": 50,
        "lr": 0.02,
        "folds": 5,
        "repeats": 1,
        "seed": 11,
        "attributes": "degree",
    }
    (tmp_path / "toy.json").write_text(json.dumps(config))
    return tmp_path


def test_decompose_compress_train_cv(workspace):
    r = run("decompose", "--dataset", "data/toy", "--name", "toy", "--radii", "0,1",
            "--attributes", "degree", "--out", "toy.hdec", cwd=workspace)
    assert r.returncode == 0, r.stderr
    assert (workspace / "toy.hdec").exists()

    r = run("compress", "--in", "toy.hdec", "--out", "toy.hdecc", "--report", "ratio.json",
            cwd=workspace)
    assert r.returncode == 0, r.stderr
    ratio = json.loads((workspace / "ratio.json").read_text())
    assert ratio["compression"]["entry_ratio"] < 1.0

    r = run("train", "--config", "toy.json", "--out", "train.json", "--model-out", "model.saen",
            cwd=workspace)
    assert r.returncode == 0, r.stderr
    train_report = json.loads((workspace / "train.json").read_text())
    assert train_report["train_accuracy"] == 1.0
    assert (workspace / "model.saen").exists()

    r = run("cv", "--config", "toy.json", "--out", "cv.json", cwd=workspace)
    assert r.returncode == 0, r.stderr
    cv = json.loads((workspace / "cv.json").read_text())
    assert cv["accuracy"]["mean"] == 1.0
    assert len(cv["scores"]) == 5
    assert "toy" in r.stdout  # human-readable table on stdout


def test_train_overrides_and_cv_compress_agreement(workspace):
    r = run("train", "--config", "toy.json", "--seed", "99", "--no-compress",
            "--out", "train99.json", cwd=workspace)
    assert r.returncode == 0, r.stderr
    t = json.loads((workspace / "train99.json").read_text())
    assert t["config"]["seed"] == 99
    assert t["config"]["compress"] is False
    assert "compression" not in t

    config = json.loads((workspace / "toy.json").read_text())
    config["compress"] = False
    (workspace / "toy_plain.json").write_text(json.dumps(config))
    r1 = run("cv", "--config", "toy.json", "--out", "a.json", cwd=workspace)
    r2 = run("cv", "--config", "toy_plain.json", "--out", "b.json", cwd=workspace)
    assert r1.returncode == 0 and r2.returncode == 0
    a = json.loads((workspace / "a.json").read_text())
    b = json.loads((workspace / "b.json").read_text())
    assert "compression" in a and "compression" not in b
    for sa, sb in zip(a["scores"], b["scores"]):
        assert abs(sa["accuracy"] - sb["accuracy"]) < 1e-6


def test_bench_ok_and_sentinel_exit_codes(workspace):
    r = run("bench", "--config", "toy.json", "--timeout", "60", "--epochs", "20",
            "--out", "bench.json", cwd=workspace)
    assert r.returncode == 0, r.stderr
    bench = json.loads((workspace / "bench.json").read_text())
    assert bench["uncompressed"]["status"] == "ok"
    assert "speedup" in bench

    r = run("bench", "--config", "toy.json", "--timeout", "0", "--out", "to.json", cwd=workspace)
    assert r.returncode == 3
    sentinel = json.loads((workspace / "to.json").read_text())
    assert sentinel["uncompressed"]["status"] == "timeout"
    assert "seconds" not in sentinel["uncompressed"]


def test_validation_failures_exit_2(workspace):
    r = run("cv", "--config", "missing.json", "--out", "x.json", cwd=workspace)
    assert r.returncode == 2
    assert "missing.json" in r.stderr

    bad = {"dataset": {"dir": "data/toy", "name": "toy"}, "radii": [0],
           "layers": {"s0": [2], "s1": [2], "s2": [2]}, "folds": 1}
    (workspace / "bad.json").write_text(json.dumps(bad))
    r = run("cv", "--config", "bad.json", "--out", "x.json", cwd=workspace)
    assert r.returncode == 2
    assert "folds" in r.stderr

    r = run("decompose", "--dataset", "data/toy", "--name", "toy", cwd=workspace)
    assert r.returncode == 2  # missing required --radii/--out

    r = run("decompose", "--dataset", "nowhere", "--name", "toy", "--radii", "0",
            "--out", "x.hdec", cwd=workspace)
    assert r.returncode == 2
