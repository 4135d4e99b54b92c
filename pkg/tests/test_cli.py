import json

import numpy as np
import pytest

from viewadapt.cli import main, parse_config_file, read_labels_json, write_labels_json


@pytest.fixture(scope="module")
def workspace(tmp_path_factory):
    """A generated dataset plus a trained head, shared by the CLI tests."""
    root = tmp_path_factory.mktemp("cliws")
    data = root / "data"
    assert main([
        "gen-synthetic", "--output-dir", str(data), "--seed", "9",
        "--classes", "5", "--dim", "8", "--labels-per-sample", "2",
        "--angle", "0.5", "--sigma", "0.1", "--samples", "80",
    ]) == 0
    assert main([
        "train-source", "--source", str(data / "source.eefc"),
        "--class-count", "5", "--internal-dim", "8",
        "--epochs", "100", "--source-lr", "0.2", "--seed", "0",
        "--output-dir", str(data),
    ]) == 0
    return data


def adapt_args(data, out, extra=()):
    return [
        "adapt",
        "--head", str(data / "head.eefc"),
        "--target", str(data / "target.eefc"),
        "--labels", str(data / "eval_labels.json"),
        "--table", str(data / "class_features.eefc"),
        "--k", "2", "--batch-size", "16", "--top-k", "3",
        "--output-dir", str(out),
        *extra,
    ]


def test_gen_synthetic_writes_expected_files(workspace):
    for name in ("source.eefc", "target.eefc", "eval_labels.json", "class_features.eefc", "head.eefc"):
        assert (workspace / name).exists(), name
    labels = read_labels_json(workspace / "eval_labels.json")
    assert len(labels) == 80
    assert all(len(v) == 2 for v in labels.values())


def test_adapt_writes_reports_and_is_deterministic(workspace, tmp_path, capsys):
    out1, out2 = tmp_path / "r1", tmp_path / "r2"
    assert main(adapt_args(workspace, out1)) == 0
    stdout = capsys.readouterr().out
    assert "class_mean_recall=" in stdout
    for name in ("report.txt", "report.csv", "banks.jsonl", "table.eefc"):
        assert (out1 / name).exists(), name
    assert main(adapt_args(workspace, out2)) == 0
    assert (out1 / "report.txt").read_bytes() == (out2 / "report.txt").read_bytes()
    assert (out1 / "report.csv").read_bytes() == (out2 / "report.csv").read_bytes()
    assert (out1 / "banks.jsonl").read_bytes() == (out2 / "banks.jsonl").read_bytes()
    assert (out1 / "table.eefc").read_bytes() == (out2 / "table.eefc").read_bytes()


def test_no_adaptation_flag_runs_clean(workspace, tmp_path, capsys):
    out = tmp_path / "baseline"
    assert main(adapt_args(workspace, out, extra=["--no-adaptation", "--setting", "baseline"])) == 0
    report = (out / "report.txt").read_text()
    assert report.startswith("setting=baseline")
    assert (out / "banks.jsonl").read_text() == ""
    capsys.readouterr()


def test_flags_override_config_file_which_overrides_defaults(workspace, tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# run settings\ntop_k = 2\nbatch_size = 16\n")
    out_a = tmp_path / "a"
    args = [
        "adapt", "--head", str(workspace / "head.eefc"), "--target", str(workspace / "target.eefc"),
        "--labels", str(workspace / "eval_labels.json"), "--table", str(workspace / "class_features.eefc"),
        "--config", str(cfg), "--output-dir", str(out_a),
    ]
    assert main(args) == 0
    assert "top_k=2" in (out_a / "report.txt").read_text()  # file beats default (5)
    out_b = tmp_path / "b"
    assert main(args[:-1] + [str(out_b), "--top-k", "3"]) == 0
    assert "top_k=3" in (out_b / "report.txt").read_text()  # flag beats file
    capsys.readouterr()


def test_env_var_overrides_output_dir(workspace, tmp_path, monkeypatch, capsys):
    env_dir = tmp_path / "from-env"
    monkeypatch.setenv("VIEWADAPT_OUTPUT_DIR", str(env_dir))
    assert main(adapt_args(workspace, tmp_path / "ignored")) == 0
    assert (env_dir / "report.txt").exists()
    assert not (tmp_path / "ignored").exists()
    capsys.readouterr()


def test_unknown_config_key_exits_2(workspace, tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("bogus_key = 7\n")
    assert main(adapt_args(workspace, tmp_path / "out", extra=["--config", str(cfg)])) == 2
    assert "configuration error" in capsys.readouterr().err


def test_missing_class_count_exits_2(workspace, tmp_path, capsys):
    code = main([
        "train-source", "--source", str(workspace / "source.eefc"),
        "--output-dir", str(tmp_path),
    ])
    assert code == 2
    capsys.readouterr()


def test_corrupt_container_exits_3(workspace, tmp_path, capsys):
    bad = tmp_path / "bad.eefc"
    bad.write_bytes(b"NOPE" + bytes(20))
    args = adapt_args(workspace, tmp_path / "out")
    args[args.index("--target") + 1] = str(bad)
    assert main(args) == 3
    assert "format error" in capsys.readouterr().err


def test_unlabeled_stream_without_labels_exits_4(workspace, tmp_path, capsys):
    args = adapt_args(workspace, tmp_path / "out")
    i = args.index("--labels")
    del args[i : i + 2]
    assert main(args) == 4
    assert "empty evaluation" in capsys.readouterr().err


def test_missing_input_exits_2(workspace, tmp_path, capsys):
    args = adapt_args(workspace, tmp_path / "out")
    args[args.index("--head") + 1] = str(tmp_path / "nope.eefc")
    assert main(args) == 2
    capsys.readouterr()


def test_sweep_cli_collates_runs(workspace, tmp_path, capsys):
    out = tmp_path / "sweep"
    args = adapt_args(workspace, out, extra=["--axis", "k", "--values", "1,2"])
    args[0] = "sweep"
    assert main(args) == 0
    stdout = capsys.readouterr().out
    csv = (out / "sweep.csv").read_text()
    assert csv.splitlines()[0] == "axis,value,setting,top_k,recall"
    assert len(csv.strip().splitlines()) == 3
    assert stdout == csv
    assert (out / "report_k_1.txt").exists()
    assert (out / "report_k_2.txt").exists()


def test_sweep_rejects_bad_values(workspace, tmp_path, capsys):
    args = adapt_args(workspace, tmp_path / "out", extra=["--axis", "k", "--values", "1,x"])
    args[0] = "sweep"
    assert main(args) == 2
    capsys.readouterr()


def test_inspect_banks_summarizes_snapshot(workspace, tmp_path, capsys):
    out = tmp_path / "run"
    assert main(adapt_args(workspace, out)) == 0
    capsys.readouterr()
    assert main(["inspect-banks", "--snapshot", str(out / "banks.jsonl")]) == 0
    printed = capsys.readouterr().out
    assert "total_entries=" in printed
    assert printed.startswith("class=0 ")


def test_config_file_parsing(tmp_path):
    cfg = tmp_path / "c.cfg"
    cfg.write_text("# comment\n\nk_labels = 3\nalpha=0.25\n")
    assert parse_config_file(str(cfg)) == {"k_labels": "3", "alpha": "0.25"}


def test_labels_json_roundtrip(tmp_path):
    path = tmp_path / "labels.json"
    labels = {"b": (1, 2), "a": (0,)}
    write_labels_json(path, labels)
    assert read_labels_json(path) == labels
