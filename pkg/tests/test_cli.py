"""Command-line interface: subcommand wiring and the exit-code contract."""

import json
from dataclasses import replace

import numpy as np
import pytest

from vqcontrast import RunConfig, read_metrics, save_tensor_file
from vqcontrast.cli import main
from vqcontrast.data import EEG_FILE, MANIFEST_FILE

TINY = RunConfig(
    n_qubits=2,
    n_layers=1,
    lr=0.02,
    epochs=2,
    batch_size=4,
    electrodes=3,
    time_samples=16,
    spatial_maps=2,
    temporal_maps=2,
    temporal_kernel=4,
    embed_dim=4,
    image_dim=6,
    n_train_classes=2,
    n_test_classes=2,
    samples_per_class=4,
    noise_sigma=0.2,
    latent_dim=2,
    seed=0,
    n_runs=1,
)


@pytest.fixture()
def config_path(tmp_path):
    path = tmp_path / "config.json"
    TINY.save(path)
    return path


def gen_data(tmp_path, config_path):
    data_dir = tmp_path / "data"
    assert main(["gen-data", "--config", str(config_path), "--out-dir", str(data_dir)]) == 0
    return data_dir / MANIFEST_FILE


def test_gen_data_prints_manifest_path(tmp_path, config_path, capsys):
    manifest = gen_data(tmp_path, config_path)
    assert manifest.exists()
    assert str(manifest) in capsys.readouterr().out


def test_train_eval_round_trip(tmp_path, config_path, capsys):
    manifest = gen_data(tmp_path, config_path)
    metrics = tmp_path / "metrics.jsonl"
    params = tmp_path / "model.params"

    code = main([
        "train", "--config", str(config_path), "--data", str(manifest),
        "--out", str(metrics), "--params", str(params),
    ])
    assert code == 0
    assert "final loss" in capsys.readouterr().out
    records = read_metrics(metrics)
    assert len(records) == TINY.epochs
    assert params.exists() and params.with_name("model.params.qtns").exists()

    eval_out = tmp_path / "eval.jsonl"
    code = main([
        "eval", "--config", str(config_path), "--data", str(manifest),
        "--params", str(params), "--out", str(eval_out),
    ])
    assert code == 0
    assert "top1" in capsys.readouterr().out
    (record,) = read_metrics(eval_out)
    assert record.top1 is not None and record.epoch is None


def test_train_without_params_flag_saves_nothing(tmp_path, config_path):
    manifest = gen_data(tmp_path, config_path)
    metrics = tmp_path / "metrics.jsonl"
    assert main([
        "train", "--config", str(config_path), "--data", str(manifest),
        "--out", str(metrics),
    ]) == 0
    assert not list(tmp_path.glob("*.params*"))


def test_gradcheck_reports_and_exits_zero(config_path, capsys):
    assert main(["gradcheck", "--config", str(config_path)]) == 0
    out = capsys.readouterr().out
    assert "gradient checks passed" in out
    assert "linear" in out


def test_protocol_generates_dataset_when_none_given(tmp_path, capsys):
    config_path = tmp_path / "config.json"
    replace(TINY, epochs=1).save(config_path)
    report_path = tmp_path / "report.json"
    assert main(["protocol", "--config", str(config_path), "--out", str(report_path)]) == 0
    assert "±" in capsys.readouterr().out
    report = json.loads(report_path.read_text())
    assert report["n_runs"] == 1
    assert 0.0 <= report["top1"]["mean"] <= 1.0
    assert (tmp_path / "report.json.data" / MANIFEST_FILE).exists()


def test_protocol_prefers_manifest_from_config(tmp_path):
    base = tmp_path / "base.json"
    TINY.save(base)
    manifest = gen_data(tmp_path, base)

    config_path = tmp_path / "config.json"
    replace(TINY, epochs=1, data_manifest=str(manifest)).save(config_path)
    report_path = tmp_path / "report.json"
    assert main(["protocol", "--config", str(config_path), "--out", str(report_path)]) == 0
    assert not (tmp_path / "report.json.data").exists()


def test_explicit_data_flag_overrides_config(tmp_path):
    base = tmp_path / "base.json"
    TINY.save(base)
    manifest = gen_data(tmp_path, base)

    config_path = tmp_path / "config.json"
    replace(TINY, epochs=1, data_manifest="does/not/exist.json").save(config_path)
    report_path = tmp_path / "report.json"
    assert main([
        "protocol", "--config", str(config_path),
        "--out", str(report_path), "--data", str(manifest),
    ]) == 0


# ---------------------------------------------------------------------------
# Exit codes


def test_usage_errors_exit_one(capsys):
    assert main([]) == 1
    assert main(["no-such-command"]) == 1
    assert main(["train"]) == 1  # missing required flags
    capsys.readouterr()


def test_help_exits_zero(capsys):
    assert main(["--help"]) == 0
    assert "gen-data" in capsys.readouterr().out


def test_missing_config_file_exits_one(tmp_path, capsys):
    assert main(["gradcheck", "--config", str(tmp_path / "nope.json")]) == 1
    assert "error" in capsys.readouterr().err


def test_unknown_config_key_exits_one(tmp_path, capsys):
    config_path = tmp_path / "config.json"
    doc = TINY.to_dict()
    doc["misspelled"] = 1
    config_path.write_text(json.dumps(doc))
    assert main(["gradcheck", "--config", str(config_path)]) == 1
    assert "unknown" in capsys.readouterr().err


def test_corrupt_dataset_exits_one(tmp_path, config_path, capsys):
    manifest = gen_data(tmp_path, config_path)
    eeg_path = manifest.parent / EEG_FILE
    eeg_path.write_bytes(eeg_path.read_bytes()[:10])
    code = main([
        "train", "--config", str(config_path), "--data", str(manifest),
        "--out", str(tmp_path / "metrics.jsonl"),
    ])
    assert code == 1
    assert "error" in capsys.readouterr().err


def test_non_finite_dataset_is_a_numeric_failure(tmp_path, config_path, capsys):
    manifest = gen_data(tmp_path, config_path)
    save_tensor_file(
        manifest.parent / EEG_FILE,
        np.full((16, 1, 3, 16), np.inf, dtype=np.float32),
    )
    code = main([
        "train", "--config", str(config_path), "--data", str(manifest),
        "--out", str(tmp_path / "metrics.jsonl"),
    ])
    assert code == 2
    assert "numeric failure" in capsys.readouterr().err
