"""Architecture sweeps: block counts, skip connections and discriminator pooling."""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

from ..config import THREE_SKIPS, DiscriminatorConfig, GeneratorConfig, RunConfig
from ..errors import InvalidConfig, IoError
from ..logger import EventLogger
from ..metrics import MetricsReport, ReferenceRow, format_table
from ..synth.dataset import DatasetManifest
from .trainer import train

PRESETS = ("blocks", "table1", "pooling")

# CD avg/std, EMD avg/std (cm), F-score avg/std (1e-2)
BLOCK_REFERENCE: tuple[ReferenceRow, ...] = (
    ReferenceRow("3DRIMR", (7.89, 4.11, None, None, 8.41, 3.22)),
    ReferenceRow("1-Block w/o sc", (10.10, 4.49, 5.01, 4.24, 8.40, 3.40)),
    ReferenceRow("1-Block", (9.75, 4.00, 4.56, 3.96, 8.47, 3.44)),
    ReferenceRow("2-Block", (9.40, 4.70, 4.83, 4.84, 9.40, 4.22)),
    ReferenceRow("5-Block", (7.79, 4.37, 4.40, 4.49, 13.10, 5.97)),
    ReferenceRow("7-Block", (7.68, 4.15, 4.53, 4.19, 13.23, 6.34)),
    ReferenceRow("7-Block + 3sc", (9.13, 4.55, 4.66, 3.88, 10.70, 4.90)),
)

POOLING_REFERENCE: tuple[ReferenceRow, ...] = (
    ReferenceRow("Mix Pooling", (9.75, 4.00, 4.56, 3.96, 8.47, 3.44)),
    ReferenceRow("Max Pooling", (10.52, 4.80, 4.79, 4.33, 7.29, 2.71)),
    ReferenceRow("Average Pooling", (10.28, 4.11, 4.60, 4.11, 7.71, 3.18)),
)


@dataclass(frozen=True)
class Variant:
    label: str
    generator: GeneratorConfig
    discriminator: DiscriminatorConfig

    @property
    def slug(self) -> str:
        return re.sub(r"[^a-z0-9]+", "_", self.label.lower()).strip("_")

    def apply(self, base: RunConfig, out_dir: Path) -> RunConfig:
        model = base.model.model_copy(update={"generator": self.generator, "discriminator": self.discriminator})
        return base.model_copy(update={"model": model, "out_dir": str(out_dir / self.slug)})


@dataclass
class AblationTable:
    preset: str
    tau_cm: float
    rows: list[MetricsReport] = field(default_factory=list)
    reference: tuple[ReferenceRow, ...] = ()

    def format(self) -> str:
        return format_table(self.rows, tau_cm=self.tau_cm, reference=self.reference)


def _generator(base: RunConfig, blocks: int, **overrides: object) -> GeneratorConfig:
    current = base.model.generator
    return GeneratorConfig.preset(blocks, head_widths=current.head_widths, points=current.points, **overrides)


def variants_for(preset: str, base: RunConfig) -> list[Variant]:
    disc = base.model.discriminator
    if preset == "blocks":
        return [Variant(f"{k}-Block", _generator(base, k), disc) for k in (1, 2, 5, 7)]
    if preset == "table1":
        return [
            Variant("1-Block w/o sc", _generator(base, 1, xyz_skip=False), disc),
            Variant("1-Block", _generator(base, 1), disc),
            Variant("2-Block", _generator(base, 2), disc),
            Variant("5-Block", _generator(base, 5), disc),
            Variant("7-Block", _generator(base, 7), disc),
            Variant("7-Block + 3sc", _generator(base, 7, cross_block_skips=list(THREE_SKIPS)), disc),
        ]
    if preset == "pooling":
        # pooling was compared on the single-block generator
        generator = _generator(base, 1)
        return [
            Variant(label, generator, disc.model_copy(update={"pooling": mode}))
            for label, mode in (("Mix Pooling", "mix"), ("Max Pooling", "max"), ("Average Pooling", "avg"))
        ]
    raise InvalidConfig(f"unknown ablation preset {preset!r}; choose from {', '.join(PRESETS)}")


def reference_for(preset: str) -> tuple[ReferenceRow, ...]:
    if preset == "pooling":
        return POOLING_REFERENCE
    if preset == "blocks":
        return tuple(r for r in BLOCK_REFERENCE if r.label in {"1-Block", "2-Block", "5-Block", "7-Block"})
    return BLOCK_REFERENCE


def ablation_sweep(
    base: RunConfig,
    variants: list[Variant],
    manifest: DatasetManifest,
    *,
    preset: str = "custom",
    logger: EventLogger | None = None,
) -> AblationTable:
    """Train and evaluate every variant with the base seed; one table row per variant."""
    out_dir = Path(base.out_dir)
    table = AblationTable(preset, base.evaluation.tau_cm, reference=reference_for(preset) if preset in PRESETS else ())
    for variant in variants:
        config = variant.apply(base, out_dir)
        if logger is not None:
            logger.log("ablation_variant_started", {"label": variant.label, "out_dir": config.out_dir})
        result = train(config, manifest, logger=logger)
        if result.report is None:
            raise InvalidConfig("ablation needs a non-empty test split")
        result.report.label = variant.label
        table.rows.append(result.report)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / f"ablation_{preset}.txt").write_text(table.format(), encoding="utf-8")
    except OSError as exc:
        raise IoError(f"cannot write ablation table: {exc}") from exc
    return table
