"""Density-based clustering (DBSCAN) of enrichment candidates.

Clusters are maximal density-connected sets under the Euclidean metric;
epsilon-neighborhoods include the point itself. Points are visited in
ascending input index (instead of randomly) so runs are reproducible;
the partition of core points is order-invariant either way, only border
points can be claimed by whichever cluster reaches them first.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

NOISE = -1
_UNLABELED = -2


@dataclass
class ClusterLabels:
    labels: np.ndarray  # cluster id per point, NOISE (-1) for noise
    n_clusters: int
    core_mask: np.ndarray

    def cluster_indices(self, cid: int) -> np.ndarray:
        return np.flatnonzero(self.labels == cid)


def dbscan(points: np.ndarray, eps: float, n_min: int) -> ClusterLabels:
    """Label points with cluster ids, expanding clusters in ascending order."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n = points.shape[0] if points.size else 0
    if n == 0:
        return ClusterLabels(np.empty(0, dtype=int), 0, np.empty(0, dtype=bool))
    if eps <= 0.0:
        raise ValueError("eps must be positive")
    if n_min < 1:
        raise ValueError("n_min must be >= 1")

    d2 = np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1)
    adj = d2 <= eps * eps  # includes self
    degree = adj.sum(axis=1)
    core = degree >= n_min

    labels = np.full(n, _UNLABELED, dtype=int)
    cid = 0
    for i in range(n):
        if labels[i] != _UNLABELED:
            continue
        if not core[i]:
            labels[i] = NOISE
            continue
        labels[i] = cid
        queue = deque(np.flatnonzero(adj[i]))
        while queue:
            s = queue.popleft()
            if labels[s] == NOISE:
                labels[s] = cid  # noise absorbed as border point
                continue
            if labels[s] != _UNLABELED:
                continue
            labels[s] = cid
            if core[s]:
                queue.extend(np.flatnonzero(adj[s]))
        cid += 1
    return ClusterLabels(labels, cid, core)


def default_params(points: np.ndarray) -> tuple[float, int]:
    """(eps, n_min) defaults: n_min = dim + 1 (capped at n), eps at the knee
    of the sorted n_min-nearest-neighbor distance curve, floored at 1e-6."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    n, dim = points.shape
    if n < 2:
        return 1e-6, 1
    n_min = min(dim + 1, n)
    d = np.sqrt(np.sum((points[:, None, :] - points[None, :, :]) ** 2, axis=-1))
    d.sort(axis=1)
    kdist = d[:, n_min - 1]  # self-distance occupies column 0
    curve = np.sort(kdist)
    if curve.shape[0] >= 3:
        second_diff = curve[2:] - 2.0 * curve[1:-1] + curve[:-2]
        knee = int(np.argmax(second_diff)) + 1
        eps = float(curve[knee])
    else:
        eps = float(curve[-1])
    return max(eps, 1e-6), n_min
