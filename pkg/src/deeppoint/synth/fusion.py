"""Union of per-view coarse clouds into the fixed-size generator input."""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ..errors import EmptyView
from ..geometry import PointCloud, Rng, resample


def fuse_views(clouds: Sequence[PointCloud], n: int, rng: Rng) -> PointCloud:
    """Concatenate the view clouds and resample to exactly ``n`` points.

    Farthest-point sampling starts at the point farthest from the union's
    centroid, so the fused set does not depend on the order of ``clouds``.
    """
    if not clouds:
        raise EmptyView("no view clouds to fuse")
    union = PointCloud(np.vstack([c.points for c in clouds]))
    delta = union.points - union.points.mean(axis=0)
    start = int(np.argmax(np.einsum("ij,ij->i", delta, delta)))
    return resample(union, n, rng, start=start)
