from __future__ import annotations

from pathlib import Path

import pytest
import yaml
from conftest import tiny_raw

from deeppoint.cli import main
from deeppoint.config import RunConfig, load_config, validate_config, with_overrides, write_resolved_config
from deeppoint.errors import InvalidConfig, IoError
from deeppoint.synth.dataset import DatasetManifest

REPO_ROOT = Path(__file__).resolve().parents[1]


def _write_config(tmp_path: Path, **sections: object) -> Path:
    target = tmp_path / "config.yaml"
    target.write_text(yaml.safe_dump(tiny_raw(tmp_path, **sections)), encoding="utf-8")
    return target


@pytest.fixture(autouse=True)
def _isolated_env(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("DEEPPOINT_LOGS_DIR", raising=False)
    monkeypatch.delenv("DEEPPOINT_CONFIG", raising=False)


def test_config_rejects_unknown_keys(tmp_path: Path) -> None:
    cfg = tmp_path / "bad.yaml"
    cfg.write_text(
        """
dataset:
  models: 2
  per_model: 2
unknown_block:
  should_fail: true
""",
        encoding="utf-8",
    )
    with pytest.raises(InvalidConfig):
        load_config(cfg)

    nested = tiny_raw(tmp_path, training={"learning_rate": 1e-3})
    with pytest.raises(InvalidConfig, match="learning_rate"):
        validate_config(nested)


def test_missing_config_file_is_invalid_config(tmp_path: Path) -> None:
    with pytest.raises(InvalidConfig, match="not found"):
        load_config(tmp_path / "missing.yaml")


def test_shipped_configs_load() -> None:
    full = load_config(REPO_ROOT / "config" / "config.yaml")
    assert full.dataset.total == 1600
    assert (full.dataset.train_size, full.dataset.test_size) == (1520, 80)
    assert full.model.generator.num_blocks == 5
    assert full.training.epochs == 200
    assert full.training.loss_weights.cf == 100.0

    tiny = load_config(REPO_ROOT / "config" / "tiny.yaml")
    assert tiny.model.generator.points == tiny.dataset.points == 128
    assert tiny.model.generator.num_blocks == 1


def test_defaults_match_full_scale() -> None:
    config = RunConfig()
    assert config.model.generator.points == 1024
    assert config.training.adam.beta1 == 0.5
    assert config.evaluation.tau_cm == 1.0


def test_overrides_are_validated(tmp_path: Path) -> None:
    config = validate_config(tiny_raw(tmp_path))
    reseeded = with_overrides(config, {"training.seed": 7})
    assert reseeded.training.seed == 7
    assert config.training.seed == 0
    with pytest.raises(InvalidConfig, match="unknown config key"):
        with_overrides(config, {"training.momentum": 0.9})
    with pytest.raises(InvalidConfig, match="unknown config section"):
        with_overrides(config, {"optimizer.lr": 0.1})
    with pytest.raises(InvalidConfig, match="dataset.points"):
        with_overrides(config, {"dataset.points": 64})


def test_split_larger_than_dataset_is_rejected(tmp_path: Path) -> None:
    with pytest.raises(InvalidConfig, match="exceeds"):
        validate_config(tiny_raw(tmp_path, dataset={"train_size": 4, "test_size": 1}))


def test_generator_skips_are_validated(tmp_path: Path) -> None:
    raw = tiny_raw(
        tmp_path,
        model={
            "generator": {"blocks": [{"widths": [8]}, {"widths": [8]}], "cross_block_skips": [[2, 1]], "points": 32},
            "discriminator": {"mlp_widths": [8], "fc_widths": [8, 1]},
        },
    )
    with pytest.raises(InvalidConfig, match="skip"):
        validate_config(raw)


def test_cli_synth_reports_counts_and_refuses_overwrite(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    cfg = _write_config(tmp_path)
    assert main(["--config", str(cfg), "synth"]) == 0
    out = capsys.readouterr().out
    assert "=== DeepPoint synth complete ===" in out
    assert "4 samples (2 models × 2), split 3/1" in out
    assert "per model: 0=2, 1=2" in out

    assert main(["--config", str(cfg), "synth"]) == 3
    assert "error [io_error]" in capsys.readouterr().err

    assert main(["--config", str(cfg), "synth", "--force"]) == 0


def test_cli_invalid_config_exits_two(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    cfg = _write_config(tmp_path, training={"batch_size": 0})
    assert main(["--config", str(cfg), "synth"]) == 2
    assert "error [invalid_config]" in capsys.readouterr().err


def test_cli_train_eval_infer(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    cfg = _write_config(tmp_path)
    assert main(["--config", str(cfg), "synth"]) == 0
    assert main(["--config", str(cfg), "train"]) == 0
    out = capsys.readouterr().out
    assert "=== DeepPoint training complete ===" in out
    final = tmp_path / "run" / "checkpoints" / "final.dpck"
    assert final.exists()

    assert main(["--config", str(cfg), "eval"]) == 0
    table = capsys.readouterr().out
    assert "DeepPoint" in table and "coarse input" in table
    assert "published reference" in table
    assert (tmp_path / "run" / "eval.csv").exists()

    manifest = DatasetManifest.read(tmp_path / "data")
    entry = manifest.split("test")[0]
    out_dir = tmp_path / "infer"
    code = main(
        [
            "--config",
            str(cfg),
            "--out",
            str(out_dir),
            "infer",
            "--checkpoint",
            str(final),
            "--input",
            str(manifest.root / entry.p_r),
            "--truth",
            str(manifest.root / entry.p_true),
        ]
    )
    assert code == 0
    printed = capsys.readouterr().out
    assert "cd_cm:" in printed and "fscore@1cm:" in printed
    assert (out_dir / "pred.ply").exists()


def test_cli_infer_rejects_mixed_inputs(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    cfg = _write_config(tmp_path)
    code = main(
        ["--config", str(cfg), "infer", "--checkpoint", str(tmp_path / "x.dpck"), "--input", "a.ply", "b.dimg"]
    )
    assert code == 2
    assert "error [invalid_input]" in capsys.readouterr().err


def test_cli_train_without_dataset_is_io_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    cfg = _write_config(tmp_path)
    assert main(["--config", str(cfg), "train"]) == 3
    assert "cannot read manifest" in capsys.readouterr().err


@pytest.mark.slow
def test_cli_ablate_blocks(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    cfg = _write_config(tmp_path)
    assert main(["--config", str(cfg), "synth"]) == 0
    capsys.readouterr()
    assert main(["--config", str(cfg), "ablate", "--preset", "blocks"]) == 0
    out = capsys.readouterr().out
    for label in ("1-Block", "2-Block", "5-Block", "7-Block"):
        assert label in out
    assert (tmp_path / "run" / "ablation_blocks.txt").exists()


def test_seed_must_fit_in_64_bits(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    config = validate_config(tiny_raw(tmp_path))
    assert with_overrides(config, {"training.seed": 2**64 - 1}).training.seed == 2**64 - 1
    with pytest.raises(InvalidConfig, match="seed"):
        with_overrides(config, {"dataset.seed": 2**64})

    cfg = _write_config(tmp_path)
    assert main(["--config", str(cfg), "--seed", str(2**64), "synth"]) == 2
    assert "error [invalid_config]" in capsys.readouterr().err


def test_unwritable_output_is_io_error(tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
    blocker = tmp_path / "blocker"
    blocker.write_text("not a directory", encoding="utf-8")
    config = validate_config(tiny_raw(tmp_path))
    with pytest.raises(IoError):
        write_resolved_config(config, blocker / "out")

    cfg = _write_config(tmp_path)
    assert main(["--config", str(cfg), "synth"]) == 0
    capsys.readouterr()
    assert main(["--config", str(cfg), "--out", str(blocker / "out"), "ablate"]) == 3
    err = capsys.readouterr().err
    assert err.startswith("error [io_error]: cannot write resolved config")
    assert "Traceback" not in err
