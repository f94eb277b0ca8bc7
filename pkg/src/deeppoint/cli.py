"""DeepPoint command-line entrypoint."""

from __future__ import annotations

import argparse
import os
import sys
from collections.abc import Callable
from pathlib import Path
from typing import Any

from dotenv import load_dotenv

from .config import RunConfig, load_config, with_overrides, write_resolved_config
from .errors import DeepPointError, InvalidInput
from .geometry import Rng, resample
from .io import read_dimg, read_ply, write_ply
from .logger import EventLogger, new_run_id
from .metrics import chamfer, emd, format_table, fscore
from .synth.dataset import DatasetManifest, build_dataset
from .training import (
    PRESETS,
    ablation_sweep,
    checkpoint_dir,
    coarse_baseline,
    coarse_from_depth,
    evaluate,
    generator_from_checkpoint,
    reconstruct,
    train,
    variants_for,
)
from .training.ablation import BLOCK_REFERENCE
from .training.trainer import FINAL_CHECKPOINT

DEFAULT_CONFIG = "config/config.yaml"


def _parse_args(argv: list[str] | None) -> argparse.Namespace:
    parser = argparse.ArgumentParser(description="DeepPoint point cloud reconstruction")
    parser.add_argument(
        "--config",
        default=os.environ.get("DEEPPOINT_CONFIG", DEFAULT_CONFIG),
        help="Path to config YAML (default: $DEEPPOINT_CONFIG or config/config.yaml)",
    )
    parser.add_argument("--seed", type=int, default=None, help="Override the dataset or training seed")
    parser.add_argument("--out", default=None, help="Override the output directory")
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="Generate the synthetic dataset")
    synth.add_argument("--force", action="store_true", help="Rebuild over an existing dataset")

    train_cmd = sub.add_parser("train", help="Train generator and discriminator")
    train_cmd.add_argument("--resume", action="store_true", help="Continue from the latest checkpoint in --out")

    eval_cmd = sub.add_parser("eval", help="Evaluate a checkpoint on the test split")
    eval_cmd.add_argument("--checkpoint", default=None, help="Checkpoint path (default: <out>/checkpoints/final.dpck)")
    eval_cmd.add_argument("--tau", type=float, default=None, help="F-score threshold in cm")

    infer = sub.add_parser("infer", help="Reconstruct one cloud")
    infer.add_argument("--checkpoint", required=True, help="Checkpoint path")
    infer.add_argument("--input", nargs="+", required=True, help="One coarse .ply, or several .dimg depth images")
    infer.add_argument("--truth", default=None, help="Ground-truth .ply; metrics are printed when given")
    infer.add_argument("--tau", type=float, default=None, help="F-score threshold in cm")

    ablate = sub.add_parser("ablate", help="Train and compare architecture variants")
    ablate.add_argument("--preset", choices=PRESETS, default="blocks", help="Variant set")
    ablate.add_argument("--tau", type=float, default=None, help="F-score threshold in cm")
    return parser.parse_args(argv)


def _load_runtime_config(args: argparse.Namespace) -> RunConfig:
    config = load_config(args.config)
    overrides: dict[str, Any] = {}
    if args.seed is not None:
        overrides["dataset.seed" if args.command == "synth" else "training.seed"] = args.seed
    if args.out is not None:
        overrides["dataset.root" if args.command == "synth" else "out_dir"] = args.out
    if getattr(args, "tau", None) is not None:
        overrides["evaluation.tau_cm"] = args.tau
    return with_overrides(config, overrides) if overrides else config


def _logger(config: RunConfig, prefix: str) -> EventLogger:
    return EventLogger(
        logs_dir=os.environ.get("DEEPPOINT_LOGS_DIR", config.logging.logs_dir),
        run_id=new_run_id(prefix),
        event_file_name=config.logging.event_file_name,
        summary_file_name=config.logging.summary_file_name,
    )


def cmd_synth(config: RunConfig, args: argparse.Namespace) -> int:
    logger = _logger(config, "synth")
    manifest = build_dataset(
        config.dataset,
        config.corruption,
        force=args.force,
        logger=logger,
        outlier_tau_cm=config.evaluation.outlier_tau_cm,
    )
    write_resolved_config(config, manifest.root)
    ds = config.dataset
    print("=== DeepPoint synth complete ===")
    print(
        f"{len(manifest.entries)} samples ({ds.models} models × {ds.per_model}), "
        f"split {len(manifest.split('train'))}/{len(manifest.split('test'))}"
    )
    print("per model: " + ", ".join(f"{m}={c}" for m, c in manifest.counts_per_model().items()))
    built = logger.read_events("dataset_built")
    if built:
        print(f"mean outlier fraction (>{config.evaluation.outlier_tau_cm:g} cm): {built[-1]['mean_outlier_fraction']:.4f}")
    print(f"root: {manifest.root}")
    print(f"log_path: {logger.output_path}")
    return 0


def cmd_train(config: RunConfig, args: argparse.Namespace) -> int:
    manifest = DatasetManifest.read(config.dataset.root)
    logger = _logger(config, "train")
    result = train(config, manifest, logger=logger, resume=args.resume)
    print("=== DeepPoint training complete ===")
    print(f"steps: {result.steps}")
    print(f"checkpoint: {result.checkpoint}")
    if result.report is not None:
        print(format_table([result.report], tau_cm=result.report.tau_cm), end="")
    print(f"log_path: {logger.output_path}")
    return 0


def cmd_eval(config: RunConfig, args: argparse.Namespace) -> int:
    manifest = DatasetManifest.read(config.dataset.root)
    checkpoint = Path(args.checkpoint) if args.checkpoint else checkpoint_dir(config.out_dir) / FINAL_CHECKPOINT
    logger = _logger(config, "eval")
    report = evaluate(checkpoint, manifest, config)
    baseline = coarse_baseline(manifest, config)
    out_dir = Path(config.out_dir)
    report.write(out_dir, stem="eval")
    write_resolved_config(config, out_dir)
    logger.log("evaluation", {"checkpoint": str(checkpoint), **report.summary()})
    logger.log("evaluation", {"checkpoint": None, **baseline.summary()})
    print(
        format_table([report, baseline], tau_cm=report.tau_cm, reference=BLOCK_REFERENCE, per_model=True),
        end="",
    )
    return 0


def cmd_infer(config: RunConfig, args: argparse.Namespace) -> int:
    n = config.model.generator.points
    rng = Rng(config.dataset.seed).child("infer")
    inputs = [Path(p) for p in args.input]
    if len(inputs) == 1 and inputs[0].suffix.lower() == ".ply":
        coarse = resample(read_ply(inputs[0]), n, rng)
    elif all(p.suffix.lower() == ".dimg" for p in inputs):
        coarse = coarse_from_depth([read_dimg(p) for p in inputs], n, rng)
    else:
        raise InvalidInput("--input takes one .ply file or one or more .dimg files")

    store = generator_from_checkpoint(args.checkpoint, config.model.generator)
    pred = reconstruct(coarse, config.model.generator, store)
    out_dir = Path(config.out_dir)
    target = write_ply(out_dir / "pred.ply", pred, comment="deeppoint reconstruction")
    write_resolved_config(config, out_dir)
    print(f"wrote {target} ({pred.n} points)")

    if args.truth:
        truth = read_ply(args.truth)
        tau = config.evaluation.tau_cm
        print(f"cd_cm: {chamfer(pred, truth):.4f}")
        if truth.n == pred.n:
            matching = emd(
                pred,
                truth,
                exact_max_points=config.emd.exact_max_points,
                max_iterations=config.emd.auction_max_iterations,
            )
            print(f"emd_cm: {matching.cost:.4f}")
        else:
            print(f"emd_cm: - (truth has {truth.n} points, prediction {pred.n})")
        print(f"fscore@{tau:g}cm: {fscore(pred, truth, tau):.4f}")
    return 0


def cmd_ablate(config: RunConfig, args: argparse.Namespace) -> int:
    manifest = DatasetManifest.read(config.dataset.root)
    logger = _logger(config, f"ablate_{args.preset}")
    write_resolved_config(config, config.out_dir)
    table = ablation_sweep(config, variants_for(args.preset, config), manifest, preset=args.preset, logger=logger)
    print(table.format(), end="")
    return 0


COMMANDS: dict[str, Callable[[RunConfig, argparse.Namespace], int]] = {
    "synth": cmd_synth,
    "train": cmd_train,
    "eval": cmd_eval,
    "infer": cmd_infer,
    "ablate": cmd_ablate,
}


def main(argv: list[str] | None = None) -> int:
    load_dotenv()
    args = _parse_args(argv)
    try:
        config = _load_runtime_config(args)
        return COMMANDS[args.command](config, args)
    except DeepPointError as exc:
        message = " ".join(str(exc).split())
        print(f"error [{exc.error_code}]: {message}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    raise SystemExit(main())
