"""Reconstruction metrics and training losses."""

from .chamfer import (
    chamfer,
    chamfer_grad,
    nearest_neighbors,
    nearest_neighbors_brute,
    one_sided_chamfer,
    outlier_fraction,
)
from .emd import Matching, cost_matrix, emd, emd_approx, emd_exact, emd_grad
from .fscore import fscore, precision_recall
from .gan import gan_losses, generator_total_loss
from .report import Aggregate, MetricsReport, ReferenceRow, SampleMetrics, format_table

__all__ = [
    "Aggregate",
    "Matching",
    "MetricsReport",
    "ReferenceRow",
    "SampleMetrics",
    "chamfer",
    "chamfer_grad",
    "cost_matrix",
    "emd",
    "emd_approx",
    "emd_exact",
    "emd_grad",
    "format_table",
    "fscore",
    "gan_losses",
    "generator_total_loss",
    "nearest_neighbors",
    "nearest_neighbors_brute",
    "one_sided_chamfer",
    "outlier_fraction",
    "precision_recall",
]
