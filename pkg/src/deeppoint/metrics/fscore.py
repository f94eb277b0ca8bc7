"""Threshold F-score between a predicted and a reference cloud."""

from __future__ import annotations

from ..errors import InvalidInput
from .chamfer import CloudLike, nearest_neighbors

DEFINITION = (
    "F-score: precision = share of predicted points within tau of the reference, "
    "recall = share of reference points within tau of the prediction, F = 2PR/(P+R)"
)


def precision_recall(pred: CloudLike, ref: CloudLike, tau: float) -> tuple[float, float]:
    if tau <= 0.0:
        raise InvalidInput("tau must be > 0")
    d_pred, _ = nearest_neighbors(pred, ref)
    d_ref, _ = nearest_neighbors(ref, pred)
    return float((d_pred <= tau).mean()), float((d_ref <= tau).mean())


def fscore(pred: CloudLike, ref: CloudLike, tau: float = 1.0) -> float:
    precision, recall = precision_recall(pred, ref, tau)
    if precision + recall == 0.0:
        return 0.0
    return 2.0 * precision * recall / (precision + recall)
