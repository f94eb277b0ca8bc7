from __future__ import annotations

import json
from pathlib import Path

import numpy as np
import pytest
from conftest import tiny_raw

from deeppoint.autodiff import read_checkpoint
from deeppoint.config import RunConfig, TrainConfig, validate_config
from deeppoint.errors import ConfigMismatch, InvalidConfig, InvalidInput, NumericalError
from deeppoint.geometry import PointCloud, Rng
from deeppoint.logger import EventLogger
from deeppoint.synth.dataset import DatasetManifest, build_dataset
from deeppoint.training import (
    Prediction,
    ablation_sweep,
    checkpoint_dir,
    discriminator_update,
    evaluate,
    evaluate_predictions,
    generator_from_checkpoint,
    generator_update,
    init_networks,
    load_pair,
    lr_at,
    train,
    train_step,
    variants_for,
)
from deeppoint.training import trainer as trainer_module
from deeppoint.training.trainer import FINAL_CHECKPOINT, STATE_FILE


def _dataset(config: RunConfig) -> DatasetManifest:
    return build_dataset(config.dataset, config.corruption)


def _batch(config: RunConfig, manifest: DatasetManifest, size: int = 2) -> list:
    return [load_pair(manifest, e) for e in manifest.split("train")[:size]]


def test_lr_schedule_anchors() -> None:
    cfg = TrainConfig()
    assert lr_at(0, cfg) == 2e-4
    assert lr_at(99, cfg) == 2e-4
    assert lr_at(100, cfg) == pytest.approx(2e-4, rel=1e-12)
    assert lr_at(150, cfg) == pytest.approx(1e-4, rel=1e-12)
    assert lr_at(199, cfg) == pytest.approx(2e-6, rel=1e-12)
    rates = [lr_at(e, cfg) for e in range(cfg.epochs)]
    assert all(a >= b for a, b in zip(rates, rates[1:]))
    with pytest.raises(InvalidInput):
        lr_at(200, cfg)
    with pytest.raises(InvalidInput):
        lr_at(-1, cfg)


def test_training_pair_is_in_coarse_frame(tiny_config: RunConfig) -> None:
    manifest = _dataset(tiny_config)
    pair = load_pair(manifest, manifest.entries[0])
    assert np.all(np.abs(pair.coarse.points) <= 1.0 + 1e-12)
    assert pair.scale > 0.0
    assert pair.truth.n == pair.coarse.n


def test_zero_learning_rate_keeps_parameters(tiny_config: RunConfig) -> None:
    manifest = _dataset(tiny_config)
    nets = init_networks(tiny_config)
    before = [s.fingerprint() for s in nets.stores]
    losses = train_step(_batch(tiny_config, manifest), nets, tiny_config, 0.0)
    assert [s.fingerprint() for s in nets.stores] == before
    assert all(np.isfinite(v) for v in losses.as_dict().values())


def test_updates_respect_freeze_contract(tiny_config: RunConfig) -> None:
    manifest = _dataset(tiny_config)
    batch = _batch(tiny_config, manifest)
    nets = init_networks(tiny_config)
    generator_bytes = nets.generator.fingerprint()
    discriminator_update(batch, nets, tiny_config, 1e-3)
    assert nets.generator.fingerprint() == generator_bytes
    assert nets.discriminator.fingerprint() != init_networks(tiny_config).discriminator.fingerprint()

    discriminator_bytes = nets.discriminator.fingerprint()
    generator_update(batch, nets, tiny_config, 1e-3)
    assert nets.discriminator.fingerprint() == discriminator_bytes
    assert nets.generator.fingerprint() != generator_bytes


def test_empty_batch_is_rejected(tiny_config: RunConfig) -> None:
    with pytest.raises(InvalidConfig):
        train_step([], init_networks(tiny_config), tiny_config, 1e-3)


def _four_sample_config(tmp_path: Path, **training: object) -> RunConfig:
    return validate_config(
        tiny_raw(
            tmp_path,
            dataset={"per_model": 3, "train_size": 4, "test_size": 2},
            training={"batch_size": 4, **training},
        )
    )


def test_one_epoch_of_four_samples_is_one_step(tmp_path: Path) -> None:
    config = _four_sample_config(tmp_path)
    manifest = _dataset(config)
    logger = EventLogger(logs_dir=tmp_path / "logs", run_id="train_test")
    result = train(config, manifest, logger=logger)
    assert result.steps == 1
    assert result.checkpoint.name == FINAL_CHECKPOINT
    assert result.report is not None and len(result.report.samples) == 2
    types = [e["event_type"] for e in logger.read_events()]
    assert types[0] == "training_started"
    assert types.count("train_step") == 1
    assert "epoch_summary" in types and "checkpoint_written" in types
    assert types[-2:] == ["evaluation", "training_finished"]
    assert (Path(config.out_dir) / "metrics.csv").exists()
    assert (Path(config.out_dir) / "resolved_config.yaml").exists()


def test_training_is_reproducible(tmp_path: Path) -> None:
    config = _four_sample_config(tmp_path, epochs=2, batch_size=2)
    manifest = _dataset(config)
    first = train(config, manifest)
    again = config.model_copy(update={"out_dir": str(tmp_path / "again")})
    second = train(again, manifest)
    assert first.checkpoint.read_bytes() == second.checkpoint.read_bytes()


def test_resume_continues_from_saved_epoch(tmp_path: Path) -> None:
    config = _four_sample_config(tmp_path, epochs=2, batch_size=2, checkpoint_every=1)
    manifest = _dataset(config)
    full = train(config, manifest)

    resumed = config.model_copy(update={"out_dir": str(tmp_path / "resumed")})
    train(resumed, manifest)
    ckpt_dir = checkpoint_dir(resumed.out_dir)
    (ckpt_dir / FINAL_CHECKPOINT).unlink()
    (ckpt_dir / STATE_FILE).write_text(
        json.dumps({"epoch": 1, "global_step": 2, "checkpoint": "epoch_0001.dpck"}), encoding="utf-8"
    )
    result = train(resumed, manifest, resume=True)
    assert result.steps == full.steps == 4
    assert result.checkpoint.read_bytes() == full.checkpoint.read_bytes()


def test_numerical_errors_roll_back_then_abort(tmp_path: Path, monkeypatch: pytest.MonkeyPatch) -> None:
    config = _four_sample_config(tmp_path, batch_size=1, max_consecutive_errors=2)
    manifest = _dataset(config)

    def failing_step(*args: object, **kwargs: object) -> None:
        raise NumericalError("non-finite output from square", op_id=7)

    monkeypatch.setattr(trainer_module, "train_step", failing_step)
    logger = EventLogger(logs_dir=tmp_path / "logs", run_id="nan_test")
    with pytest.raises(NumericalError):
        train(config, manifest, logger=logger)
    errors = logger.read_events("numerical_error")
    assert len(errors) == 2
    assert errors[0]["op_id"] == 7
    assert len(errors[0]["sample_ids"]) == 1


def test_evaluate_oracle_substitution() -> None:
    truth_points = Rng(0).uniform(-50.0, 50.0, size=(16, 3))
    truth = PointCloud(truth_points)
    report = evaluate_predictions(
        [Prediction("a", 0, truth, truth), Prediction("b", 1, truth, truth)],
        tau_cm=1.0,
        emd_cfg=validate_config({}).emd,
    )
    assert report.cd.avg == 0.0
    assert report.emd.avg == 0.0
    assert report.fscore.avg == 1.0


def test_evaluate_is_deterministic_and_self_consistent(tmp_path: Path) -> None:
    config = _four_sample_config(tmp_path)
    manifest = _dataset(config)
    result = train(config, manifest)
    first = evaluate(result.checkpoint, manifest, config)
    second = evaluate(result.checkpoint, manifest, config)
    assert first.to_csv() == second.to_csv()
    assert first.cd.avg == pytest.approx(np.mean([s.cd_cm for s in first.samples]))


def test_checkpoint_config_mismatch(tmp_path: Path) -> None:
    config = _four_sample_config(tmp_path)
    result = train(config, _dataset(config))
    wider = config.model.generator.model_copy(update={"head_widths": [6, 3]})
    with pytest.raises(ConfigMismatch):
        generator_from_checkpoint(read_checkpoint(result.checkpoint), wider)


def test_ablation_variants() -> None:
    base = validate_config({})
    assert len(variants_for("blocks", base)) == 4
    table1 = variants_for("table1", base)
    assert [v.label for v in table1][0] == "1-Block w/o sc"
    assert not table1[0].generator.xyz_skip
    assert table1[-1].generator.cross_block_skips == [(1, 7), (2, 6), (3, 5)]
    pooling = variants_for("pooling", base)
    assert [v.discriminator.pooling for v in pooling] == ["mix", "max", "avg"]
    with pytest.raises(InvalidConfig):
        variants_for("widths", base)


def test_ablation_sweep_emits_one_row_per_variant(tmp_path: Path) -> None:
    config = _four_sample_config(tmp_path, batch_size=2)
    manifest = _dataset(config)
    variants = variants_for("pooling", config)
    table = ablation_sweep(config, variants, manifest, preset="pooling")
    assert [r.label for r in table.rows] == ["Mix Pooling", "Max Pooling", "Average Pooling"]
    text = (Path(config.out_dir) / "ablation_pooling.txt").read_text(encoding="utf-8")
    assert "Average Pooling" in text and "published reference" in text


def _toy_config(tmp_path: Path, seed: int = 0, **training: object) -> RunConfig:
    """Eight cars at n=256 with the default 5-block generator and default optimizer."""
    return validate_config(
        tiny_raw(
            tmp_path,
            dataset={
                "models": 8,
                "per_model": 1,
                "train_size": 6,
                "test_size": 2,
                "points": 256,
                "render_points": 4096,
                "seed": seed,
                "camera": {"views": 3, "height": 32, "width": 32, "focal_px": 24.0},
            },
            model={"generator": {"points": 256}, "discriminator": {}},
            training={
                "epochs": 50,
                "batch_size": 2,
                "decay_start_epoch": 25,
                "checkpoint_every": 50,
                "eval_slice": 0,
                "seed": seed,
                **training,
            },
        )
    )


@pytest.mark.slow
@pytest.mark.parametrize("seed", range(5))
def test_single_sample_overfit_reduces_chamfer(tmp_path: Path, seed: int) -> None:
    config = _toy_config(tmp_path, seed)
    assert config.training.base_lr == TrainConfig().base_lr
    assert config.model.generator.num_blocks == 5
    manifest = _dataset(config)
    batch = _batch(config, manifest, size=1)
    nets = init_networks(config)
    history = [train_step(batch, nets, config, config.training.base_lr).cd for _ in range(200)]
    assert history[-1] <= 0.2 * history[0]


@pytest.mark.slow
def test_toy_training_halves_untrained_chamfer(tmp_path: Path) -> None:
    config = _toy_config(tmp_path)
    manifest = _dataset(config)
    untrained = evaluate(init_networks(config).generator, manifest, config)
    result = train(config, manifest)
    assert result.report is not None
    assert result.report.cd.avg <= 0.5 * untrained.cd.avg


@pytest.mark.slow
def test_five_blocks_reach_chamfer_of_one_block(tmp_path: Path) -> None:
    config = _toy_config(tmp_path)
    manifest = _dataset(config)
    variants = [v for v in variants_for("blocks", config) if v.label in {"1-Block", "5-Block"}]
    table = ablation_sweep(config, variants, manifest, preset="blocks")
    one_block, five_block = table.rows
    assert (one_block.label, five_block.label) == ("1-Block", "5-Block")
    assert five_block.cd.avg <= one_block.cd.avg
