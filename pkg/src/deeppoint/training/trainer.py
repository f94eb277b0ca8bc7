"""Alternating least-squares GAN training of the generator and discriminator."""

from __future__ import annotations

import json
import math
import time
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Any, cast

import numpy as np

from ..autodiff import (
    ParamStore,
    Tape,
    Tensor,
    adam_step,
    add,
    backward,
    external_loss,
    read_checkpoint,
    scale,
    write_checkpoint,
)
from ..config import RunConfig, write_resolved_config
from ..errors import ApproxFailure, InvalidConfig, IoError, NumericalError
from ..geometry import Rng
from ..logger import EpochSnapshot, EventLogger, utc_now
from ..metrics import MetricsReport, chamfer, chamfer_grad, emd, emd_grad, gan_losses, generator_total_loss
from ..model import discriminator_tensor, generator_tensor, init_model
from ..parallel import gather_ordered
from ..synth.dataset import DatasetManifest
from .evaluate import TrainingPair, evaluate, load_pair
from .schedule import lr_at

CHECKPOINT_DIR = "checkpoints"
FINAL_CHECKPOINT = "final.dpck"
STATE_FILE = "state.json"


@dataclass
class Networks:
    generator: ParamStore
    discriminator: ParamStore

    @property
    def stores(self) -> tuple[ParamStore, ParamStore]:
        return self.generator, self.discriminator


@dataclass
class StepLosses:
    loss_d: float
    loss_g_adv: float
    cd: float
    emd: float
    loss_g: float
    clip_norms: dict[str, float] = field(default_factory=dict)

    def as_dict(self) -> dict[str, float]:
        return {"loss_d": self.loss_d, "loss_g_adv": self.loss_g_adv, "cd": self.cd, "emd": self.emd, "loss_g": self.loss_g}


@dataclass
class TrainResult:
    checkpoint: Path
    steps: int
    epochs: int
    report: MetricsReport | None
    log_path: Path | None


def init_networks(config: RunConfig) -> Networks:
    rng = Rng(config.training.seed).child("init")
    return Networks(init_model(config.model.generator, rng), init_model(config.model.discriminator, rng))


def _mean(losses: Sequence[Tensor]) -> Tensor:
    total = losses[0]
    for loss in losses[1:]:
        total = add(total, loss)
    return scale(total, 1.0 / len(losses))


def _update(store: ParamStore, loss: Tensor, lr: float, config: RunConfig) -> float:
    """Backward, clip and Adam-step one network; returns the gradient norm before clipping."""
    store.accumulate(backward(loss))
    norm = store.clip_grad_norm(config.training.grad_clip_norm)
    adam = config.training.adam
    adam_step(store, lr, adam.beta1, adam.beta2, adam.eps)
    return norm


def _matching_cost(pred: np.ndarray, truth: np.ndarray, config: RunConfig) -> tuple[float, np.ndarray]:
    try:
        matching = emd(
            pred, truth, exact_max_points=config.emd.exact_max_points, max_iterations=config.emd.auction_max_iterations
        )
    except ApproxFailure as exc:
        matching = exc.matching
    return matching.cost, emd_grad(pred, truth, matching)


def discriminator_update(batch: Sequence[TrainingPair], nets: Networks, config: RunConfig, lr: float) -> tuple[float, float]:
    """Least-squares update of the discriminator with the generator frozen; returns (loss, grad norm)."""
    gcfg, dcfg = config.model.generator, config.model.discriminator
    tape = Tape()
    g_frozen = nets.generator.bind(tape, trainable=False)
    d_params = nets.discriminator.bind(tape)
    losses = []
    for pair in batch:
        cond = tape.constant(pair.coarse.points)
        fake = tape.constant(generator_tensor(cond, gcfg, g_frozen).values)
        real_score = discriminator_tensor(cond, tape.constant(pair.truth.points), dcfg, d_params)
        fake_score = discriminator_tensor(cond, fake, dcfg, d_params)
        losses.append(gan_losses(real_score, fake_score)[0])
    loss = _mean(losses)
    value = loss.item()
    return value, _update(nets.discriminator, loss, lr, config)


def generator_update(batch: Sequence[TrainingPair], nets: Networks, config: RunConfig, lr: float) -> StepLosses:
    """Generator update on adversarial + weighted Chamfer and EMD terms with the discriminator frozen."""
    gcfg, dcfg = config.model.generator, config.model.discriminator
    tape = Tape()
    g_params = nets.generator.bind(tape)
    d_frozen = nets.discriminator.bind(tape, trainable=False)
    losses: list[Tensor] = []
    adv_terms, cd_terms, emd_terms = [], [], []
    for pair in batch:
        cond = tape.constant(pair.coarse.points)
        pred = generator_tensor(cond, gcfg, g_params)
        _, loss_adv = gan_losses(1.0, discriminator_tensor(cond, pred, dcfg, d_frozen))
        truth = pair.truth.points
        cd_value = chamfer(pred.values, truth)
        cd_loss = external_loss(pred, cd_value, chamfer_grad(pred.values, truth))
        emd_value, emd_gradient = _matching_cost(pred.values, truth, config)
        emd_loss = external_loss(pred, emd_value, emd_gradient)
        total = cast(Tensor, generator_total_loss(loss_adv, cd_loss, emd_loss, config.training.loss_weights))
        losses.append(total)
        adv_terms.append(loss_adv.item())
        cd_terms.append(cd_value)
        emd_terms.append(emd_value)
    loss = _mean(losses)
    value = loss.item()
    norm = _update(nets.generator, loss, lr, config)
    return StepLosses(
        loss_d=math.nan,
        loss_g_adv=float(np.mean(adv_terms)),
        cd=float(np.mean(cd_terms)),
        emd=float(np.mean(emd_terms)),
        loss_g=value,
        clip_norms={"generator": norm},
    )


def train_step(batch: Sequence[TrainingPair], nets: Networks, config: RunConfig, lr: float) -> StepLosses:
    """One discriminator update followed by one generator update on ``batch``.

    The discriminator sees (coarse, truth) with target 1 and (coarse, fake)
    with target 0. Losses are batch means in the normalized frame.
    """
    if not batch:
        raise InvalidConfig("empty training batch")
    loss_d, d_norm = discriminator_update(batch, nets, config, lr)
    losses = generator_update(batch, nets, config, lr)
    losses.loss_d = loss_d
    losses.clip_norms = {"discriminator": d_norm, **losses.clip_norms}
    return losses


def checkpoint_dir(out_dir: str | Path) -> Path:
    return Path(out_dir) / CHECKPOINT_DIR


def _write_state(directory: Path, state: dict[str, Any]) -> None:
    try:
        (directory / STATE_FILE).write_text(json.dumps(state, indent=2, sort_keys=True), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write training state: {exc}") from exc


def read_state(out_dir: str | Path) -> dict[str, Any] | None:
    path = checkpoint_dir(out_dir) / STATE_FILE
    if not path.exists():
        return None
    try:
        return dict(json.loads(path.read_text(encoding="utf-8")))
    except (OSError, json.JSONDecodeError) as exc:
        raise IoError(f"cannot read training state {path}: {exc}") from exc


def train(
    config: RunConfig,
    manifest: DatasetManifest,
    *,
    logger: EventLogger | None = None,
    resume: bool = False,
) -> TrainResult:
    """Train for ``config.training.epochs`` epochs and evaluate on the test split."""
    tcfg = config.training
    out_dir = Path(config.out_dir)
    ckpt_dir = checkpoint_dir(out_dir)
    try:
        ckpt_dir.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create output directory {out_dir}: {exc}") from exc
    write_resolved_config(config, out_dir)

    entries = manifest.split("train")
    if not entries:
        raise InvalidConfig("train split is empty")
    pairs = gather_ordered(lambda e: load_pair(manifest, e), entries, config.dataset.workers)
    eval_slice = manifest.split("test")[: tcfg.eval_slice]

    nets = init_networks(config)
    start_epoch, global_step = 0, 0
    if resume:
        state = read_state(out_dir)
        if state is not None:
            saved = read_checkpoint(ckpt_dir / state["checkpoint"])
            for store in nets.stores:
                saved.restore(store, with_moments=True)
            start_epoch, global_step = int(state["epoch"]), int(state["global_step"])

    def log(event_type: str, data: dict[str, Any]) -> None:
        if logger is not None:
            logger.log(event_type, data)

    steps_per_epoch = math.ceil(len(pairs) / tcfg.batch_size)
    log(
        "training_started",
        {
            "train_samples": len(pairs),
            "epochs": tcfg.epochs,
            "start_epoch": start_epoch,
            "steps_per_epoch": steps_per_epoch,
            "seed": tcfg.seed,
            "parameters": {s.name: s.parameter_count() for s in nets.stores},
        },
    )

    last_checkpoint: Path | None = None
    consecutive_errors = 0
    for epoch in range(start_epoch, tcfg.epochs):
        lr = lr_at(epoch, tcfg)
        order = Rng(tcfg.seed).child("shuffle", epoch).permutation(len(pairs))
        epoch_losses: list[StepLosses] = []
        for start in range(0, len(order), tcfg.batch_size):
            batch = [pairs[i] for i in order[start : start + tcfg.batch_size]]
            snapshots = [s.snapshot() for s in nets.stores]
            began = time.perf_counter()
            try:
                losses = train_step(batch, nets, config, lr)
            except NumericalError as exc:
                for store, snap in zip(nets.stores, snapshots):
                    store.restore(snap)
                consecutive_errors += 1
                log(
                    "numerical_error",
                    {"epoch": epoch, "step": global_step, "sample_ids": [p.sample_id for p in batch], "op_id": exc.op_id, "message": str(exc)},
                )
                if consecutive_errors >= tcfg.max_consecutive_errors:
                    raise
                continue
            consecutive_errors = 0
            global_step += 1
            epoch_losses.append(losses)
            log(
                "train_step",
                {"epoch": epoch, "step": global_step, "lr": lr, **losses.as_dict(), "wall_ms": 1000.0 * (time.perf_counter() - began)},
            )
            for network, norm in losses.clip_norms.items():
                if norm > tcfg.grad_clip_norm:
                    log("grad_clipped", {"epoch": epoch, "step": global_step, "network": network, "norm": norm})

        def epoch_mean(key: str) -> float:
            return float(np.mean([s.as_dict()[key] for s in epoch_losses])) if epoch_losses else math.nan

        snapshot = EpochSnapshot(
            timestamp=utc_now(),
            epoch=epoch,
            steps=global_step,
            lr=lr,
            loss_d=epoch_mean("loss_d"),
            loss_g_adv=epoch_mean("loss_g_adv"),
            cd=epoch_mean("cd"),
            emd=epoch_mean("emd"),
        )
        if eval_slice:
            held_out = evaluate(nets.generator, manifest, config, limit=len(eval_slice), label=f"epoch {epoch}")
            snapshot.eval_cd_cm = held_out.cd.avg
            snapshot.eval_emd_cm = held_out.emd.avg
            snapshot.eval_fscore = held_out.fscore.avg
        log("epoch_summary", {k: v for k, v in asdict(snapshot).items() if k != "timestamp"})
        if logger is not None:
            logger.log_summary(snapshot)

        if (epoch + 1) % tcfg.checkpoint_every == 0 or epoch + 1 == tcfg.epochs:
            name = f"epoch_{epoch + 1:04d}.dpck"
            last_checkpoint = write_checkpoint(ckpt_dir / name, nets.stores)
            _write_state(ckpt_dir, {"epoch": epoch + 1, "global_step": global_step, "checkpoint": name})
            log("checkpoint_written", {"epoch": epoch + 1, "step": global_step, "path": str(last_checkpoint)})

    final = write_checkpoint(ckpt_dir / FINAL_CHECKPOINT, nets.stores)
    report = None
    if manifest.split("test"):
        report = evaluate(nets.generator, manifest, config)
        report.write(out_dir)
        log("evaluation", report.summary())
    log("training_finished", {"steps": global_step, "epochs": tcfg.epochs, "checkpoint": str(final)})
    return TrainResult(final, global_step, tcfg.epochs, report, logger.output_path if logger is not None else None)
