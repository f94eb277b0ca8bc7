"""Synthetic dataset generation and the on-disk manifest.

Each sample directory holds ``p_r.ply`` (fused coarse input), ``p_true.ply``
(ground truth) and ``view_{i}.dimg`` (corrupted per-view depth). The manifest
is a line-oriented text file listing every sample with its split and paths.
"""

from __future__ import annotations

import shutil
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path

from ..config import CorruptionSpec, DatasetConfig
from ..errors import EmptyView, InvalidConfig, IoError, ParseError
from ..geometry import PointCloud, Rng
from ..io import decode_dimg, encode_dimg, read_ply, write_ply
from ..logger import EventLogger
from ..metrics.chamfer import outlier_fraction
from ..parallel import gather_ordered
from .camera import backproject, orbit_viewpoints, render_depth
from .corruption import corrupt_depth
from .fusion import fuse_views
from .scene import make_scene, sample_surface

MANIFEST_NAME = "manifest.txt"
MANIFEST_HEADER = "# deeppoint manifest v1"
MANIFEST_COLUMNS = "# sample_id model_id seed split p_r p_true views"
SPLITS = ("train", "test", "unused")


@dataclass(frozen=True)
class ManifestEntry:
    sample_id: str
    model_id: int
    seed: int
    split: str
    p_r: str
    p_true: str
    views: tuple[str, ...]

    def to_line(self) -> str:
        return " ".join(
            [self.sample_id, str(self.model_id), str(self.seed), self.split, self.p_r, self.p_true, ",".join(self.views)]
        )


@dataclass
class DatasetManifest:
    root: Path
    entries: list[ManifestEntry] = field(default_factory=list)

    def split(self, name: str) -> list[ManifestEntry]:
        return [e for e in self.entries if e.split == name]

    def counts_per_model(self) -> dict[int, int]:
        return dict(sorted(Counter(e.model_id for e in self.entries).items()))

    def to_text(self) -> str:
        return "\n".join([MANIFEST_HEADER, MANIFEST_COLUMNS, *(e.to_line() for e in self.entries)]) + "\n"

    def write(self) -> Path:
        target = self.root / MANIFEST_NAME
        try:
            target.write_text(self.to_text(), encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot write manifest {target}: {exc}") from exc
        return target

    @classmethod
    def read(cls, root: str | Path) -> "DatasetManifest":
        base = Path(root)
        path = base / MANIFEST_NAME if base.is_dir() else base
        try:
            lines = path.read_text(encoding="utf-8").splitlines()
        except OSError as exc:
            raise IoError(f"cannot read manifest {path}: {exc}") from exc
        entries: list[ManifestEntry] = []
        seen: set[str] = set()
        for lineno, raw in enumerate(lines, start=1):
            if not raw.strip() or raw.startswith("#"):
                continue
            tokens = raw.split()
            if len(tokens) != 7:
                raise ParseError(f"expected 7 fields, found {len(tokens)}", line=lineno, path=str(path))
            sample_id, model_id, seed, split, p_r, p_true, views = tokens
            if split not in SPLITS:
                raise ParseError(f"unknown split {split!r}", line=lineno, path=str(path))
            if sample_id in seen:
                raise ParseError(f"duplicate sample id {sample_id}", line=lineno, path=str(path))
            seen.add(sample_id)
            try:
                entries.append(
                    ManifestEntry(sample_id, int(model_id), int(seed), split, p_r, p_true, tuple(views.split(",")))
                )
            except ValueError as exc:
                raise ParseError(str(exc), line=lineno, path=str(path)) from exc
        return cls(path.parent, entries)

    def load_pair(self, entry: ManifestEntry) -> tuple[PointCloud, PointCloud]:
        return read_ply(self.root / entry.p_r), read_ply(self.root / entry.p_true)


def plan_entries(config: DatasetConfig, views: int) -> list[ManifestEntry]:
    """Assign ids, seeds and splits; the test split is stratified across models."""
    if config.train_size + config.test_size > config.total:
        raise InvalidConfig(f"split {config.train_size}/{config.test_size} exceeds {config.total} samples")
    base, extra = divmod(config.test_size, config.models)
    test_quota = [base + (1 if m < extra else 0) for m in range(config.models)]
    if max(test_quota) > config.per_model:
        raise InvalidConfig(f"test_size {config.test_size} needs more than {config.per_model} samples of one model")

    master = Rng(config.seed)
    splits: dict[tuple[int, int], str] = {}
    for model in range(config.models):
        for j in range(config.per_model - test_quota[model], config.per_model):
            splits[(model, j)] = "test"
    train_left = config.train_size
    entries = []
    for model in range(config.models):
        for j in range(config.per_model):
            split = splits.get((model, j))
            if split is None:
                split = "train" if train_left > 0 else "unused"
                train_left -= split == "train"
            sample_id = f"m{model}_{j:04d}"
            index = model * config.per_model + j
            entries.append(
                ManifestEntry(
                    sample_id=sample_id,
                    model_id=model,
                    seed=master.child("sample", index).derive_seed(),
                    split=split,
                    p_r=f"{sample_id}/p_r.ply",
                    p_true=f"{sample_id}/p_true.ply",
                    views=tuple(f"{sample_id}/view_{i}.dimg" for i in range(views)),
                )
            )
    return entries


def generate_sample(
    entry: ManifestEntry, root: Path, config: DatasetConfig, corruption: CorruptionSpec
) -> tuple[PointCloud, PointCloud]:
    """Render, corrupt and fuse one sample and write its files under ``root``."""
    rng = Rng(entry.seed)
    camera = config.camera
    scene = make_scene(entry.model_id, rng.child("scene"))
    truth = sample_surface(scene, config.points, rng.child("truth"))
    dense = sample_surface(scene, config.render_points, rng.child("dense"))
    viewpoints = orbit_viewpoints(
        camera.views,
        distance=camera.distance_cm,
        elevation_deg=camera.elevation_deg,
        target=(0.0, 0.0, camera.target_height_cm),
        focal=camera.focal_px,
        height=camera.height,
        width=camera.width,
    )
    clouds: list[PointCloud] = []
    for i, (view, rel) in enumerate(zip(viewpoints, entry.views)):
        image = corrupt_depth(render_depth(dense, view, camera.max_range_cm), corruption, rng.child("corrupt", i))
        payload = encode_dimg(image)
        path = root / rel
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_bytes(payload)
        except OSError as exc:
            raise IoError(f"cannot write {path}: {exc}") from exc
        try:
            clouds.append(backproject(decode_dimg(payload, where=str(path))))
        except EmptyView:
            continue
    if not clouds:
        raise EmptyView(f"sample {entry.sample_id}: every view is empty after corruption")
    coarse = fuse_views(clouds, config.points, rng.child("fuse"))
    write_ply(root / entry.p_r, coarse, comment=f"sample {entry.sample_id} coarse")
    write_ply(root / entry.p_true, truth, comment=f"sample {entry.sample_id} truth")
    return coarse, truth


def build_dataset(
    config: DatasetConfig,
    corruption: CorruptionSpec,
    *,
    force: bool = False,
    logger: EventLogger | None = None,
    outlier_tau_cm: float = 10.0,
) -> DatasetManifest:
    root = Path(config.root)
    entries = plan_entries(config, config.camera.views)
    if (root / MANIFEST_NAME).exists() and not force:
        raise IoError(f"dataset already exists at {root}; pass --force to rebuild")
    try:
        if (root / MANIFEST_NAME).exists():
            shutil.rmtree(root)
        root.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise IoError(f"cannot create dataset directory {root}: {exc}") from exc

    def run(entry: ManifestEntry) -> float:
        coarse, truth = generate_sample(entry, root, config, corruption)
        return outlier_fraction(coarse, truth, outlier_tau_cm)

    fractions = gather_ordered(run, entries, config.workers)
    manifest = DatasetManifest(root, entries)
    manifest.write()
    if logger is not None:
        for entry, fraction in zip(entries, fractions):
            logger.log(
                "dataset_sample_written",
                {"sample_id": entry.sample_id, "model_id": entry.model_id, "split": entry.split, "outlier_fraction": fraction},
            )
        logger.log(
            "dataset_built",
            {
                "root": str(root),
                "samples": len(entries),
                "train": len(manifest.split("train")),
                "test": len(manifest.split("test")),
                "mean_outlier_fraction": sum(fractions) / len(fractions) if fractions else 0.0,
            },
        )
    return manifest
