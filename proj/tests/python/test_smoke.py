"""Smoke tests for the _saen extension through the saen package."""

import numpy as np
import pytest

import saen


@pytest.fixture()
def toy_dir(tmp_path):
    """Six tiny graphs: triangles (label 0) and 3-paths (label 1)."""
    a, ind, labels = [], [], []
    offset = 0
    for i in range(6):
        if i % 2 == 0:
            edges = [(1, 2), (2, 3), (1, 3)]
            n = 3
            labels.append(1)
        else:
            edges = [(1, 2), (2, 3)]
            n = 3
            labels.append(2)
        a += [f"{u + offset}, {v + offset}" for u, v in edges]
        ind += [str(i + 1)] * n
        offset += n
    (tmp_path / "toy_A.txt").write_text("\n".join(a) + "\n")
    (tmp_path / "toy_graph_indicator.txt").write_text("\n".join(ind) + "\n")
    (tmp_path / "toy_graph_labels.txt").write_text("\n".join(map(str, labels)) + "\n")
    return tmp_path


def test_version():
    assert saen.__version__


def test_parse_and_attributes(toy_dir):
    ds = saen.parse_tu_dataset(str(toy_dir), "toy")
    assert len(ds) == 6
    assert ds.class_count == 2
    assert ds.labels == [0, 1, 0, 1, 0, 1]
    x = saen.degree_attributes(ds)
    assert x.shape == (18, 3)
    assert (x.sum(axis=1) == 1).all()


def test_ego_graph():
    vertices, edges = saen.ego_graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)], root=2, radius=1)
    assert vertices == [1, 2, 3]
    assert edges == [(1, 2), (2, 3)]


def test_compute_cd_worked_example():
    m = np.array([[0, 0, 0], [1, 0, 1], [1, 1, 0], [0, 0, 0], [1, 1, 0]])
    m_comp, c_quads, d = saen.compute_cd(m)
    assert (m_comp == np.array([[0, 0, 0], [1, 0, 1], [1, 1, 0]])).all()
    assert (d == np.array([[1, 0, 0], [0, 1, 0], [0, 0, 1], [1, 0, 0], [0, 0, 1]])).all()
    # C rows: 1/2 over {0,3}, 1 at {1}, 1/2 over {2,4}
    expected = {(0, 0, 1, 2), (0, 3, 1, 2), (1, 1, 1, 1), (2, 2, 1, 2), (2, 4, 1, 2)}
    assert {tuple(int(v) for v in row) for row in c_quads} == expected
    # D @ M^comp reconstructs M
    assert (d @ m_comp == m).all()


def test_compute_cd_rejects_non_integer_rows():
    with pytest.raises(ValueError, match="rows: 1"):
        saen.compute_cd(np.array([[1.0, 0.0], [0.5, 0.25]]))


def test_decompose_compress_forward_equivalence(toy_dir):
    ds = saen.parse_tu_dataset(str(toy_dir), "toy")
    h = saen.egnn_decompose(ds, [0, 1], attributes="degree")
    assert h.level_sizes == [18, 36, 6]
    assert h.validate() == []

    c = saen.domain_compress(h)
    assert c.level_sizes[0] < h.level_sizes[0]
    assert saen.verify_compression(h, c) == []

    report = saen.compression_report(h, c)
    assert report["entry_ratio"] < 1.0
    assert report["levels"][0]["original_size"] == 18

    widths = [[2], [3, 2], [3, 2]]
    plain = saen.forward_logits(h, widths, class_count=2, seed=5)
    comp = saen.forward_logits(c, widths, class_count=2, seed=5)
    assert plain.shape == (6, 2)
    np.testing.assert_allclose(plain, comp, rtol=1e-6)


def test_serialization_round_trip(toy_dir, tmp_path):
    ds = saen.parse_tu_dataset(str(toy_dir), "toy")
    h = saen.egnn_decompose(ds, [0, 1], attributes="degree")
    h.save(str(tmp_path / "toy.hdec"))
    back = saen.Decomposition.load(str(tmp_path / "toy.hdec"))
    assert back.level_sizes == h.level_sizes

    c = saen.domain_compress(h)
    c.save(str(tmp_path / "toy.hdecc"))
    cback = saen.Compressed.load(str(tmp_path / "toy.hdecc"))
    assert cback.level_sizes == c.level_sizes


def test_train_and_cross_validate(toy_dir):
    config = {
        "dataset": {"dir": str(toy_dir), "name": "toy"},
        "radii": [0, 1],
        "layers": {"s0": [2], "s1": [3, 2], "s2": [3, 2]},
        "epochs": 50,
        "lr": 0.05,
        "folds": 3,
        "repeats": 1,
        "seed": 4,
        "attributes": "degree",
    }
    single = saen.train_single(config)
    assert single["train_accuracy"] == 1.0
    assert len(single["loss_curve"]) == 50

    report = saen.cross_validate(config)
    assert report["accuracy"]["mean"] == 1.0
    assert len(report["scores"]) == 3
    again = saen.cross_validate(config)
    again.pop("timings_s")
    report.pop("timings_s")
    assert again == report


def test_bench_sentinel(toy_dir):
    config = {
        "dataset": {"dir": str(toy_dir), "name": "toy"},
        "radii": [0],
        "layers": {"s0": [2], "s1": [2], "s2": [2]},
        "folds": 2,
        "attributes": "degree",
    }
    report = saen.bench(config, timeout_s=0.0)
    assert report["uncompressed"]["status"] == "timeout"
    assert "seconds" not in report["uncompressed"]


def test_validation_error_surfaces():
    with pytest.raises(ValueError, match="folds"):
        saen.cross_validate(
            {
                "dataset": {"dir": "nowhere", "name": "x"},
                "radii": [0],
                "layers": {"s0": [2], "s1": [2], "s2": [2]},
                "folds": 1,
            }
        )
