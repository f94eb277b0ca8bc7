"""Test-split evaluation and single-cloud inference."""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

from ..autodiff import Checkpoint, ParamStore, read_checkpoint
from ..config import EMDConfig, GeneratorConfig, RunConfig
from ..errors import ApproxFailure, EmptyView, InvalidInput
from ..geometry import PointCloud, Rng, apply_frame, denormalize, normalize
from ..metrics import MetricsReport, SampleMetrics, chamfer, emd, fscore
from ..model import generator_forward, init_model
from ..parallel import gather_ordered
from ..synth import DepthImage, backproject, fuse_views
from ..synth.dataset import DatasetManifest, ManifestEntry


@dataclass(frozen=True)
class Prediction:
    sample_id: str
    model_id: int
    pred: PointCloud
    truth: PointCloud


@dataclass(frozen=True)
class TrainingPair:
    """A coarse/truth pair in the coarse cloud's normalized frame."""

    sample_id: str
    model_id: int
    coarse: PointCloud
    truth: PointCloud
    center: tuple[float, float, float]
    scale: float


def load_pair(manifest: DatasetManifest, entry: ManifestEntry) -> TrainingPair:
    coarse, truth = manifest.load_pair(entry)
    normalized, center, scale = normalize(coarse)
    return TrainingPair(
        entry.sample_id,
        entry.model_id,
        normalized,
        apply_frame(truth, center, scale),
        (float(center[0]), float(center[1]), float(center[2])),
        scale,
    )


def generator_from_checkpoint(checkpoint: Checkpoint | str | Path, cfg: GeneratorConfig) -> ParamStore:
    """Build a generator for ``cfg`` and load its weights; names and shapes must match."""
    loaded = checkpoint if isinstance(checkpoint, Checkpoint) else read_checkpoint(checkpoint)
    store = init_model(cfg, Rng(0))
    loaded.restore(store)
    return store


def reconstruct(coarse: PointCloud, cfg: GeneratorConfig, store: ParamStore) -> PointCloud:
    """Normalize, run the generator and map the result back to cm."""
    normalized, center, scale = normalize(coarse)
    return denormalize(generator_forward(normalized, cfg, store), center, scale)


def coarse_from_depth(images: Sequence[DepthImage], n: int, rng: Rng) -> PointCloud:
    """Back-project every view with returns and fuse them into ``n`` points."""
    clouds = []
    for image in images:
        try:
            clouds.append(backproject(image))
        except EmptyView:
            continue
    if not clouds:
        raise EmptyView("none of the depth images has returns")
    return fuse_views(clouds, n, rng)


def sample_metrics(prediction: Prediction, tau_cm: float, emd_cfg: EMDConfig) -> SampleMetrics:
    try:
        matching = emd(
            prediction.pred,
            prediction.truth,
            exact_max_points=emd_cfg.exact_max_points,
            max_iterations=emd_cfg.auction_max_iterations,
        )
    except ApproxFailure as exc:
        matching = exc.matching
    return SampleMetrics(
        prediction.sample_id,
        prediction.model_id,
        chamfer(prediction.pred, prediction.truth),
        matching.cost,
        fscore(prediction.pred, prediction.truth, tau_cm),
    )


def evaluate_predictions(
    predictions: Sequence[Prediction],
    *,
    tau_cm: float,
    emd_cfg: EMDConfig,
    label: str = "DeepPoint",
    workers: int = 1,
) -> MetricsReport:
    if not predictions:
        raise InvalidInput("nothing to evaluate")
    rows = gather_ordered(lambda p: sample_metrics(p, tau_cm, emd_cfg), list(predictions), workers)
    return MetricsReport(label, tau_cm, rows)


def _entries(manifest: DatasetManifest, split: str, limit: int | None) -> list[ManifestEntry]:
    entries = manifest.split(split)
    if limit is not None:
        entries = entries[:limit]
    if not entries:
        raise InvalidInput(f"split {split!r} has no samples")
    return entries


def evaluate(
    checkpoint: Checkpoint | str | Path | ParamStore,
    manifest: DatasetManifest,
    config: RunConfig,
    *,
    tau_cm: float | None = None,
    split: str = "test",
    limit: int | None = None,
    label: str = "DeepPoint",
) -> MetricsReport:
    """Per-sample CD / EMD / F-score of the generator's reconstructions, in cm."""
    gcfg = config.model.generator
    store = checkpoint if isinstance(checkpoint, ParamStore) else generator_from_checkpoint(checkpoint, gcfg)
    entries = _entries(manifest, split, limit)

    def predict(entry: ManifestEntry) -> Prediction:
        coarse, truth = manifest.load_pair(entry)
        return Prediction(entry.sample_id, entry.model_id, reconstruct(coarse, gcfg, store), truth)

    workers = config.evaluation.workers
    predictions = gather_ordered(predict, entries, workers)
    tau = config.evaluation.tau_cm if tau_cm is None else tau_cm
    return evaluate_predictions(predictions, tau_cm=tau, emd_cfg=config.emd, label=label, workers=workers)


def coarse_baseline(
    manifest: DatasetManifest, config: RunConfig, *, tau_cm: float | None = None, split: str = "test"
) -> MetricsReport:
    """Metrics of the fused coarse input itself, without reconstruction."""
    entries = _entries(manifest, split, None)
    predictions = []
    for entry in entries:
        coarse, truth = manifest.load_pair(entry)
        predictions.append(Prediction(entry.sample_id, entry.model_id, coarse, truth))
    tau = config.evaluation.tau_cm if tau_cm is None else tau_cm
    return evaluate_predictions(
        predictions, tau_cm=tau, emd_cfg=config.emd, label="coarse input", workers=config.evaluation.workers
    )
