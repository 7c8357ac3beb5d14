import json
import subprocess
import sys

import numpy as np
import pytest

from relcoord.cli import run
from relcoord.image_io import DeformSpec, deform, load_pgm, save_idx, save_idx_labels, save_pgm
from relcoord.mapping import MappingMatrix
from relcoord.dynamics import TemporalSignal


@pytest.fixture
def pairs_dir(tmp_path, two):
    assert run(["augment", "--in", str(_pgm(tmp_path / "two.pgm", two)), "--out-dir", str(tmp_path / "pairs"),
                "--n", "4", "--noise", "0.02", "--deform-angle", "90", "--seed", "3"]) == 0
    return tmp_path / "pairs"


def _pgm(path, img):
    save_pgm(img, path)
    return path


def test_augment_writes_loadable_pairs(pairs_dir):
    manifest = json.loads((pairs_dir / "pairs.json").read_text())
    assert len(manifest["pairs"]) == 4
    for entry in manifest["pairs"]:
        src = load_pgm(pairs_dir / entry["source"])
        tgt = load_pgm(pairs_dir / entry["target"])
        # 8-bit quantisation aside, the target is the rotated source
        assert np.abs(np.rot90(src) - tgt).max() <= 1 / 255 + 1e-12


def test_augment_plain_copies_deterministic(tmp_path, two):
    src = _pgm(tmp_path / "two.pgm", two)
    for name in ("a", "b"):
        assert run(["augment", "--in", str(src), "--out-dir", str(tmp_path / name), "--n", "3", "--noise", "0.05", "--seed", "9"]) == 0
    for i in range(3):
        f = f"aug_{i:03d}.pgm"
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_learn_then_apply(tmp_path, pairs_dir, five):
    out = tmp_path / "map.json"
    assert run(["learn", "--pairs", str(pairs_dir / "pairs.json"), "--patch-size", "4", "--stride", "4", "--out", str(out)]) == 0
    doc = json.loads(out.read_text())
    m = MappingMatrix.from_json(doc)
    assert m.shape == (49, 49)
    assert doc["patch_config"] == {"patch_size": 4, "stride": 4}

    test = _pgm(tmp_path / "five.pgm", five)
    pred = tmp_path / "pred.pgm"
    assert run(["apply", "--map", str(out), "--in", str(test), "--out", str(pred)]) == 0
    got = load_pgm(pred)
    expected = deform(load_pgm(test), DeformSpec.rotation(90))
    fg = (got > 0.1) | (expected > 0.1)
    assert ((got > 0.1) == (expected > 0.1))[fg].mean() >= 0.9


def test_raven(tmp_path, two, five):
    rot = lambda x: np.rot90(x)  # noqa: E731
    names = {"a": two, "b": rot(two), "c": five, "c0": five.T, "c1": rot(five), "c2": np.rot90(five, 2)}
    for k, v in names.items():
        _pgm(tmp_path / f"{k}.pgm", v)
    task = {"a": "a.pgm", "b": "b.pgm", "c": "c.pgm", "candidates": ["c0.pgm", "c1.pgm", "c2.pgm"]}
    (tmp_path / "task.json").write_text(json.dumps(task))
    out = tmp_path / "answer.json"
    assert run(["raven", "--task", str(tmp_path / "task.json"), "--out", str(out)]) == 0
    result = json.loads(out.read_text())
    assert result["index"] == 1 and len(result["scores"]) == 3


def test_count(tmp_path, capsys):
    img = np.zeros((12, 12))
    img[1:4, 1:4] = 1
    img[7:10, 6:11] = 0.8
    path = _pgm(tmp_path / "scene.pgm", img)
    assert run(["count", "--in", str(path), "--threshold", "0.1"]) == 0
    result = json.loads(capsys.readouterr().out)
    assert result["count"] == 2 and len(result["eigenvalues_near_zero"]) == 2


@pytest.mark.parametrize("suffix", [".csv", ".json"])
def test_simulate_export(tmp_path, capsys, rng, suffix):
    path = _pgm(tmp_path / "img.pgm", rng.random((8, 8)))
    out = tmp_path / f"signal{suffix}"
    assert run(["simulate", "--in", str(path), "--crop", "2,2,4", "--order", "first", "--t-end", "0.5", "--out", str(out)]) == 0
    summary = json.loads(capsys.readouterr().out)
    text = out.read_text()
    sig = TemporalSignal.from_csv(text) if suffix == ".csv" else TemporalSignal.from_json(json.loads(text))
    assert len(sig) == summary["samples"] == 501
    assert sig.samples[0] == pytest.approx(16.0)


def test_simulate_analytic_matches_integration(tmp_path, capsys, rng):
    path = _pgm(tmp_path / "img.pgm", rng.random((4, 4)))
    results = []
    for extra in ([], ["--analytic"]):
        assert run(["simulate", "--in", str(path), *extra]) == 0
        results.append(json.loads(capsys.readouterr().out))
    assert results[0]["h_end"] == pytest.approx(results[1]["h_end"], rel=1e-3)


def test_simulate_frequencies(tmp_path, capsys):
    path = _pgm(tmp_path / "img.pgm", np.array([[0.0, 1.0], [1.0, 1.0]]))
    assert run(["simulate", "--in", str(path), "--frequencies", "2", "--dt", "0.01", "--t-end", "20"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert "frequencies" in summary and isinstance(summary["complete"], bool)


def test_mnist_extract(tmp_path, rng):
    images = (rng.random((6, 5, 5)) * 255).astype(np.uint8)
    labels = np.array([1, 2, 1, 3, 1, 2], dtype=np.uint8)
    save_idx(images, tmp_path / "img.idx")
    save_idx_labels(labels, tmp_path / "lab.idx")
    out = tmp_path / "ones"
    assert run(["mnist-extract", "--images", str(tmp_path / "img.idx"), "--labels", str(tmp_path / "lab.idx"),
                "--digit", "1", "--count", "2", "--out-dir", str(out)]) == 0
    files = sorted(p.name for p in out.iterdir())
    assert files == ["img_00000.pgm", "img_00002.pgm"]
    np.testing.assert_allclose(load_pgm(out / files[1]), images[2] / 255.0, atol=1 / 255)


class TestExitCodes:
    def test_unknown_flag(self, capsys):
        assert run(["count", "--bogus"]) == 2
        assert "usage" in capsys.readouterr().err

    def test_missing_subcommand(self):
        assert run([]) == 2

    def test_validation_error(self, tmp_path):
        path = _pgm(tmp_path / "img.pgm", np.zeros((4, 4)))
        assert run(["count", "--in", str(path), "--threshold", "1.5"]) == 2
        assert run(["simulate", "--in", str(path), "--crop", "3,3,4"]) == 2

    def test_malformed_files(self, tmp_path):
        bad = tmp_path / "bad.pgm"
        bad.write_bytes(b"P7 junk")
        assert run(["count", "--in", str(bad)]) == 2
        notmap = tmp_path / "map.json"
        notmap.write_text('{"hello": 1}')
        img = _pgm(tmp_path / "img.pgm", np.zeros((8, 8)))
        assert run(["apply", "--map", str(notmap), "--in", str(img), "--out", str(tmp_path / "o.pgm")]) == 2
        notmap.write_text("{not json")
        assert run(["apply", "--map", str(notmap), "--in", str(img), "--out", str(tmp_path / "o.pgm")]) == 2
        assert not (tmp_path / "o.pgm").exists()

    def test_runtime_error(self, tmp_path):
        assert run(["count", "--in", str(tmp_path / "missing.pgm")]) == 1

    def test_digit_without_labels(self, tmp_path):
        save_idx(np.zeros((2, 3, 3), dtype=np.uint8), tmp_path / "img.idx")
        assert run(["mnist-extract", "--images", str(tmp_path / "img.idx"), "--digit", "1", "--out-dir", str(tmp_path / "o")]) == 2


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "relcoord", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "learn" in proc.stdout and "mnist-extract" in proc.stdout
