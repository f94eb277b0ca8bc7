"""Per-sample metric records, aggregates and table/CSV rendering."""

from __future__ import annotations

import csv
import io
from collections.abc import Sequence
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import IoError
from .fscore import DEFINITION

CSV_HEADER = ("sample_id", "model_id", "cd_cm", "emd_cm", "fscore")


@dataclass(frozen=True)
class SampleMetrics:
    sample_id: str
    model_id: int
    cd_cm: float
    emd_cm: float
    fscore: float


@dataclass(frozen=True)
class Aggregate:
    avg: float
    std: float

    @classmethod
    def of(cls, values: Sequence[float]) -> "Aggregate":
        if not values:
            return cls(float("nan"), float("nan"))
        array = np.asarray(values, dtype=np.float64)
        return cls(float(array.mean()), float(array.std(ddof=0)))


@dataclass(frozen=True)
class ReferenceRow:
    """Published numbers shown for context: CD and EMD in cm, F-score in 1e-2 units."""

    label: str
    values: tuple[float | None, ...]


@dataclass
class MetricsReport:
    label: str
    tau_cm: float
    samples: list[SampleMetrics] = field(default_factory=list)

    @property
    def cd(self) -> Aggregate:
        return Aggregate.of([s.cd_cm for s in self.samples])

    @property
    def emd(self) -> Aggregate:
        return Aggregate.of([s.emd_cm for s in self.samples])

    @property
    def fscore(self) -> Aggregate:
        return Aggregate.of([s.fscore for s in self.samples])

    def per_model(self) -> dict[int, "MetricsReport"]:
        groups: dict[int, list[SampleMetrics]] = {}
        for sample in self.samples:
            groups.setdefault(sample.model_id, []).append(sample)
        return {
            model: MetricsReport(f"{self.label} / model {model}", self.tau_cm, rows)
            for model, rows in sorted(groups.items())
        }

    def summary(self) -> dict[str, object]:
        return {
            "label": self.label,
            "samples": len(self.samples),
            "tau_cm": self.tau_cm,
            "cd_cm": {"avg": self.cd.avg, "std": self.cd.std},
            "emd_cm": {"avg": self.emd.avg, "std": self.emd.std},
            "fscore": {"avg": self.fscore.avg, "std": self.fscore.std},
        }

    def row_values(self) -> tuple[float, ...]:
        """avg/std of CD and EMD (cm) and of F-score (1e-2 units)."""
        return (self.cd.avg, self.cd.std, self.emd.avg, self.emd.std, 100.0 * self.fscore.avg, 100.0 * self.fscore.std)

    def to_csv(self) -> str:
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for s in self.samples:
            writer.writerow([s.sample_id, s.model_id, repr(s.cd_cm), repr(s.emd_cm), repr(s.fscore)])
        return buffer.getvalue()

    def write(self, directory: str | Path, stem: str = "metrics") -> tuple[Path, Path]:
        target = Path(directory)
        csv_path = target / f"{stem}.csv"
        table_path = target / f"{stem}.txt"
        try:
            target.mkdir(parents=True, exist_ok=True)
            csv_path.write_text(self.to_csv(), encoding="utf-8")
            table_path.write_text(format_table([self], tau_cm=self.tau_cm, per_model=True), encoding="utf-8")
        except OSError as exc:
            raise IoError(f"cannot write metrics to {target}: {exc}") from exc
        return csv_path, table_path


def _cell(value: float | None) -> str:
    return "-" if value is None or np.isnan(value) else f"{value:.2f}"


def format_table(
    reports: Sequence[MetricsReport],
    *,
    tau_cm: float,
    reference: Sequence[ReferenceRow] = (),
    per_model: bool = False,
) -> str:
    """Text table with CD / EMD / F-score avg and std columns."""
    labels = [r.label for r in reports] + [r.label for r in reference]
    if per_model:
        labels += [m.label for r in reports for m in r.per_model().values()]
    label_width = max([len(label) for label in labels] + [len("Method")])
    head = f"{'Method':<{label_width}}  {'CD avg':>8} {'CD std':>8}  {'EMD avg':>8} {'EMD std':>8}  {'F avg':>8} {'F std':>8}"
    lines = [
        f"# {DEFINITION}; tau = {tau_cm:g} cm",
        "# CD and EMD in cm on denormalized clouds; F-score in units of 1e-2; std is the population std",
        head,
        "-" * len(head),
    ]

    def render(label: str, values: Sequence[float | None]) -> str:
        c = [_cell(v) for v in values]
        return f"{label:<{label_width}}  {c[0]:>8} {c[1]:>8}  {c[2]:>8} {c[3]:>8}  {c[4]:>8} {c[5]:>8}"

    for report in reports:
        lines.append(render(report.label, report.row_values()))
    if per_model:
        for report in reports:
            for model_report in report.per_model().values():
                lines.append(render(model_report.label, model_report.row_values()))
    if reference:
        lines.append("# published reference (not reproduced here)")
        for row in reference:
            lines.append(render(row.label, row.values))
    return "\n".join(lines) + "\n"
