"""Chamfer distance (unsquared Euclidean) and nearest-neighbor helpers.

The kd-tree path and the brute-force path compute the final distances with
the same expression, so both give bit-identical results.
"""

from __future__ import annotations

import numpy as np
from scipy.spatial import cKDTree

from ..errors import InvalidInput
from ..geometry import PointCloud

KD_CANDIDATES = 4

CloudLike = PointCloud | np.ndarray


def as_points(cloud: CloudLike) -> np.ndarray:
    points = cloud.points if isinstance(cloud, PointCloud) else np.asarray(cloud, dtype=np.float64)
    if points.ndim != 2 or points.shape[1] != 3:
        raise InvalidInput(f"expected an n x 3 point array, got shape {points.shape}")
    if points.shape[0] == 0:
        raise InvalidInput("point cloud is empty")
    return points


def squared_distances(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Elementwise squared distance over the last axis, summed in a fixed x, y, z order."""
    d = a - b
    return d[..., 0] * d[..., 0] + d[..., 1] * d[..., 1] + d[..., 2] * d[..., 2]


def nearest_neighbors(query: CloudLike, ref: CloudLike) -> tuple[np.ndarray, np.ndarray]:
    """Distance and index of each query point's nearest ``ref`` point; ties go to the lowest index."""
    q, r = as_points(query), as_points(ref)
    k = min(KD_CANDIDATES, r.shape[0])
    _, candidates = cKDTree(r).query(q, k=k)
    candidates = np.asarray(candidates, dtype=np.int64).reshape(q.shape[0], k)
    sq = squared_distances(q[:, None, :], r[candidates])
    best = np.lexsort((candidates, sq), axis=-1)[:, 0]
    rows = np.arange(q.shape[0])
    return np.sqrt(sq[rows, best]), candidates[rows, best]


def nearest_neighbors_brute(query: CloudLike, ref: CloudLike) -> tuple[np.ndarray, np.ndarray]:
    q, r = as_points(query), as_points(ref)
    sq = squared_distances(q[:, None, :], r[None, :, :])
    idx = np.argmin(sq, axis=1)
    return np.sqrt(sq[np.arange(q.shape[0]), idx]), idx


def chamfer(s1: CloudLike, s2: CloudLike, *, brute_force: bool = False) -> float:
    """Mean nearest distance from ``s1`` to ``s2`` plus the mean from ``s2`` to ``s1``."""
    search = nearest_neighbors_brute if brute_force else nearest_neighbors
    d12, _ = search(s1, s2)
    d21, _ = search(s2, s1)
    return float(d12.mean() + d21.mean())


def _unit_rows(delta: np.ndarray, dist: np.ndarray) -> np.ndarray:
    out = np.zeros_like(delta)
    moving = dist > 0.0
    out[moving] = delta[moving] / dist[moving, None]
    return out


def chamfer_grad(pred: CloudLike, ref: CloudLike) -> np.ndarray:
    """Gradient of ``chamfer(pred, ref)`` wrt ``pred`` with neighbor assignments held fixed.

    Coincident pairs contribute zero.
    """
    p, r = as_points(pred), as_points(ref)
    d_pr, nn_pr = nearest_neighbors(p, r)
    d_rp, nn_rp = nearest_neighbors(r, p)
    grad = _unit_rows(p - r[nn_pr], d_pr) / p.shape[0]
    np.add.at(grad, nn_rp, _unit_rows(p[nn_rp] - r, d_rp) / r.shape[0])
    return grad


def one_sided_chamfer(s1: CloudLike, s2: CloudLike) -> float:
    """Mean nearest distance from ``s1`` to ``s2``; a lower bound on the matching cost."""
    d, _ = nearest_neighbors(s1, s2)
    return float(d.mean())


def outlier_fraction(coarse: CloudLike, truth: CloudLike, tau: float = 10.0) -> float:
    """Share of ``coarse`` points farther than ``tau`` from every ``truth`` point."""
    if tau <= 0.0:
        raise InvalidInput("outlier threshold must be > 0")
    d, _ = nearest_neighbors(coarse, truth)
    return float(np.mean(d > tau))
