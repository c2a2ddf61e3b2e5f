import json
from pathlib import Path

import pytest

from kgfuse.cli import main


def run(argv):
    return main(argv)


@pytest.fixture(scope="module")
def dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("data") / "kg"
    assert run(["make-synthetic", "--out", str(out), "--entities", "36",
                "--relations", "2", "--seed", "3"]) == 0
    return out


@pytest.fixture(scope="module")
def clustered(tmp_path_factory):
    out = tmp_path_factory.mktemp("data") / "kgc"
    assert run(["make-synthetic", "--out", str(out), "--mode", "clustered",
                "--entities", "40", "--clusters", "4", "--seed", "3",
                "--train-fraction", "0.2"]) == 0
    return out


def test_stats_output(dataset, capsys):
    assert run(["stats", "--train", str(dataset / "train.txt"),
                "--valid", str(dataset / "valid.txt"),
                "--test", str(dataset / "test.txt")]) == 0
    out = capsys.readouterr().out.strip().splitlines()[-1]
    stats = json.loads(out)
    assert set(stats) == {"entities", "relations", "train", "valid", "test"}
    assert stats["entities"] == 36


def test_stats_empty_train_errors(tmp_path):
    empty = tmp_path / "empty.txt"
    empty.write_text("")
    assert run(["stats", "--train", str(empty), "--valid", str(empty),
                "--test", str(empty)]) == 2


def test_make_synthetic_writes_manifest_and_offsets(dataset):
    assert (dataset / "planted_offsets.json").exists()
    manifest = json.loads((dataset / "dataset.manifest.json").read_text())
    assert manifest["command"] == "make-synthetic"
    assert manifest["params"]["seed"] == 3


def test_train_eval_deterministic_reports(dataset, tmp_path):
    ckpt = tmp_path / "s.ckpt"
    args = ["train-structural", "--train", str(dataset / "train.txt"),
            "--valid", str(dataset / "valid.txt"),
            "--test", str(dataset / "test.txt"),
            "--epochs", "5", "--dim", "8", "--seed", "1",
            "--checkpoint-out", str(ckpt)]
    assert run(args) == 0
    assert json.loads(Path(str(ckpt) + ".manifest.json").read_text())[
        "params"]["learning_rate"] == 0.0005

    reports = []
    for name in ("r1.json", "r2.json"):
        rp = tmp_path / name
        assert run(["eval", "--checkpoint", str(ckpt),
                    "--train", str(dataset / "train.txt"),
                    "--valid", str(dataset / "valid.txt"),
                    "--test", str(dataset / "test.txt"),
                    "--report", str(rp)]) == 0
        reports.append(rp.read_bytes())
    assert reports[0] == reports[1]


def test_train_joint_requires_literals(dataset, tmp_path):
    code = run(["train-joint", "--train", str(dataset / "train.txt"),
                "--epochs", "1", "--checkpoint-out", str(tmp_path / "j.ckpt")])
    assert code == 1


def test_train_joint_with_literal_file(clustered, tmp_path):
    ckpt = tmp_path / "j.ckpt"
    assert run(["train-joint", "--train", str(clustered / "train.txt"),
                "--valid", str(clustered / "valid.txt"),
                "--test", str(clustered / "test.txt"),
                "--literals", str(clustered / "literals.leb"),
                "--epochs", "3", "--dim", "8", "--seed", "2",
                "--checkpoint-out", str(ckpt)]) == 0
    report = tmp_path / "rep.json"
    assert run(["eval", "--checkpoint", str(ckpt),
                "--train", str(clustered / "train.txt"),
                "--valid", str(clustered / "valid.txt"),
                "--test", str(clustered / "test.txt"),
                "--report", str(report)]) == 0
    data = json.loads(report.read_text())
    assert data["all"]["mr_filtered"] <= data["all"]["mr_raw"]


def test_train_all_chains(clustered, tmp_path):
    assert run(["train-all", "--train", str(clustered / "train.txt"),
                "--valid", str(clustered / "valid.txt"),
                "--test", str(clustered / "test.txt"),
                "--literals", str(clustered / "literals.leb"),
                "--epochs", "2", "--dim", "6", "--seed", "4",
                "--structural-out", str(tmp_path / "s.ckpt"),
                "--joint-out", str(tmp_path / "j.ckpt")]) == 0
    assert (tmp_path / "s.ckpt").exists()
    assert (tmp_path / "j.ckpt").exists()


def test_gradcheck_command(capsys):
    assert run(["gradcheck", "--joint", "--dim", "4"]) == 0
    out = capsys.readouterr().out
    assert "max relative error" in out


def test_usage_error_exit_code():
    assert run(["train-structural"]) == 1


def test_unknown_name_data_error(dataset, tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("nope\tr000\talso_nope\n")
    ckpt = tmp_path / "s.ckpt"
    assert run(["train-structural", "--train", str(dataset / "train.txt"),
                "--epochs", "1", "--checkpoint-out", str(ckpt)]) == 0
    assert run(["eval", "--checkpoint", str(ckpt),
                "--train", str(dataset / "train.txt"),
                "--test", str(bad),
                "--report", str(tmp_path / "r.json")]) == 2
