import logging

import pytest

from navseed.cli import EXIT_USAGE, UsageError, main, parse_cli, setup_logging
from navseed.config import ConfigError, RunConfig, read_config_file
from navseed.eval import read_eval_csv
from navseed.expert import read_dataset
from navseed.nn import load_model


def test_pretrain_defaults_resolve():
    args, cfg = parse_cli(["pretrain", "--data", "d", "--out", "m"])
    assert cfg.hyper.lr == 3e-6 and cfg.hyper.batch_size == 256
    assert args.algo == "td3" and args.steps == 20000
    assert cfg.source["lr"] == "default"


def test_flag_overrides_config_file(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("# comment\nlr = 1e-4\nbatch_size = 64\n")
    _, cfg = parse_cli(["pretrain", "--data", "d", "--out", "m", "--config", str(path), "--lr", "3e-4"])
    assert cfg.hyper.lr == 3e-4 and cfg.source["lr"] == "flag"
    assert cfg.hyper.batch_size == 64 and cfg.source["batch_size"].startswith("file:")


def test_repro_preset_below_file_and_flags(tmp_path):
    _, cfg = parse_cli(["repro", "--out-dir", str(tmp_path)])
    assert cfg.hyper.lr == 3e-4 and cfg.source["lr"] == "preset"
    _, cfg = parse_cli(["repro", "--out-dir", str(tmp_path), "--lr", "1e-5"])
    assert cfg.hyper.lr == 1e-5


@pytest.mark.parametrize("argv", [
    ["pretrain", "--data", "d", "--out", "m", "--batch", "-5"],
    ["pretrain", "--data", "d", "--out", "m", "--no-such-flag"],
    ["pretrain", "--data", "d", "--out", "m", "--lr", "abc"],
    ["pretrain", "--data", "d"],
    ["eval", "--model", "m", "--out", "o", "--episodes", "0"],
    ["bogus"],
])
def test_usage_errors_exit_2(argv, capsys):
    assert main(argv) == EXIT_USAGE
    assert "error" in capsys.readouterr().err


def test_unknown_config_key(tmp_path):
    path = tmp_path / "run.cfg"
    path.write_text("learning_rate = 1\n")
    with pytest.raises(UsageError):
        parse_cli(["pretrain", "--data", "d", "--out", "m", "--config", str(path)])
    path.write_text("just words\n")
    with pytest.raises(ConfigError):
        read_config_file(path)


def test_help_shows_defaults_and_provenance(capsys):
    assert main(["pretrain", "--help"]) == 0
    out = capsys.readouterr().out
    assert "3e-06 (paper)" in out
    assert "(decided)" in out
    assert "--batch" in out


def test_sidecar_round_trips(tmp_path):
    cfg = RunConfig()
    cfg.overlay({"lr": 1e-4, "seed": 7}, "flag")
    path = cfg.write_sidecar(tmp_path / "m.navm", ["navseed test"])
    back = RunConfig()
    back.overlay(read_config_file(path), "file")
    assert back.values == cfg.values


def test_missing_input_file_exits_1(tmp_path, capsys):
    assert main(["pretrain", "--data", str(tmp_path / "none.navd"), "--out", str(tmp_path / "m")]) == 1
    assert "error" in capsys.readouterr().err


def test_pipeline_small_runs(tmp_path, capsys):
    data = tmp_path / "d.navd"
    assert main(["gen-data", "--episodes", "3", "--out", str(data)]) == 0
    assert len(read_dataset(data)) > 0 and (tmp_path / "d.navd.config").exists()

    model = tmp_path / "m.navm"
    assert main(["pretrain", "--data", str(data), "--steps", "5", "--batch", "16", "--out", str(model),
                 "--log", str(tmp_path / "pre.csv")]) == 0
    assert load_model(model).algo == "td3"
    sidecar = (tmp_path / "m.navm.config").read_text()
    assert "batch_size = 16" in sidecar and sidecar.startswith("# navseed pretrain")

    online = tmp_path / "o.navm"
    assert main(["train", "--mode", "pretrain_per", "--init", str(model), "--expert-data", str(data),
                 "--env-steps", "40", "--batch", "16", "--out", str(online)]) == 0
    assert load_model(online).algo == "td3"

    out = tmp_path / "eval.csv"
    assert main(["eval", "--model", str(online), "--episodes", "2", "--out", str(out)]) == 0
    assert read_eval_csv(out).episodes == 2
    assert "success" in capsys.readouterr().out


def test_train_mode_preconditions(tmp_path):
    assert main(["train", "--mode", "pretrain_per", "--out", str(tmp_path / "x")]) == EXIT_USAGE
    assert main(["train", "--mode", "per", "--out", str(tmp_path / "x")]) == EXIT_USAGE


def test_log_level_from_environment(monkeypatch):
    root = logging.getLogger()
    saved = root.handlers[:], root.level
    try:
        root.handlers.clear()
        monkeypatch.setenv("NAVSEED_LOG", "debug")
        setup_logging()
        assert root.level == logging.DEBUG
    finally:
        root.handlers[:], _ = saved
        root.setLevel(saved[1])
