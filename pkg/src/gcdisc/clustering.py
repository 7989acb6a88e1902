"""Clustering of the final embeddings: Lloyd k-means and cosine-threshold components.

K-means works in Euclidean distance on the raw embeddings with k-means++
seeding and multiple restarts; the best run is picked by (inertia, restart
index), so results are fully determined by the seed. The threshold method
links every pair whose cosine similarity reaches ``delta`` and reports
connected components, numbered in first-seen order.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import Assignment, ensure_features
from .simgeom import similarity_matrix


@dataclass
class KMeansResult:
    assignment: Assignment
    centroids: np.ndarray        # (k, dim)
    inertia: float               # sum of squared distances to assigned centroids
    iterations: int              # assignment steps performed in the winning restart
    inertia_history: list[float]  # inertia after each assignment step, non-increasing


def _sq_distances(x: np.ndarray, centroids: np.ndarray) -> np.ndarray:
    # (n, k) squared Euclidean distances; clip guards tiny negative rounding
    d2 = (
        np.sum(x * x, axis=1)[:, None]
        - 2.0 * (x @ centroids.T)
        + np.sum(centroids * centroids, axis=1)[None, :]
    )
    return np.maximum(d2, 0.0)


def _kmeanspp_seed(x: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    n = x.shape[0]
    centroids = np.empty((k, x.shape[1]))
    first = int(rng.integers(n))
    centroids[0] = x[first]
    closest = _sq_distances(x, centroids[:1])[:, 0]
    for j in range(1, k):
        total = closest.sum()
        if total <= 0.0:
            # all remaining points coincide with chosen centroids
            idx = int(rng.integers(n))
        else:
            idx = int(rng.choice(n, p=closest / total))
        centroids[j] = x[idx]
        closest = np.minimum(closest, _sq_distances(x, centroids[j : j + 1])[:, 0])
    return centroids


def _lloyd(x: np.ndarray, k: int, rng: np.random.Generator, max_iter: int):
    centroids = _kmeanspp_seed(x, k, rng)
    prev = None
    history: list[float] = []
    labels = np.zeros(x.shape[0], dtype=np.int64)
    for it in range(max_iter):
        d2 = _sq_distances(x, centroids)
        labels = d2.argmin(axis=1)
        history.append(float(d2[np.arange(x.shape[0]), labels].sum()))
        if prev is not None and np.array_equal(labels, prev):
            break
        prev = labels
        if it == max_iter - 1:
            break
        new_centroids = np.empty_like(centroids)
        empties = []
        for j in range(k):
            members = labels == j
            if members.any():
                new_centroids[j] = x[members].mean(axis=0)
            else:
                empties.append(j)
        if empties:
            # re-seed each empty centroid at the point currently farthest
            # from its assigned centroid; successive empties take the next
            # farthest points
            dist_to_own = d2[np.arange(x.shape[0]), labels].copy()
            for j in empties:
                far = int(dist_to_own.argmax())
                new_centroids[j] = x[far]
                dist_to_own[far] = -1.0
        centroids = new_centroids
    return labels, centroids, history


def kmeans(
    z, k: int, seed: int = 0, max_iter: int = 300, n_restarts: int = 10
) -> KMeansResult:
    """Best-of-``n_restarts`` Lloyd k-means with k-means++ seeding."""
    x = ensure_features(z)
    n = x.shape[0]
    if not 1 <= k <= n:
        raise ValueError(f"k must lie in [1, {n}], got {k}")
    if max_iter < 1 or n_restarts < 1:
        raise ValueError("max_iter and n_restarts must be >= 1")

    best = None
    for r in range(n_restarts):
        rng = np.random.default_rng([seed, r])
        labels, centroids, history = _lloyd(x, k, rng, max_iter)
        if best is None or history[-1] < best[2][-1]:
            best = (labels, centroids, history)
    labels, centroids, history = best
    return KMeansResult(
        assignment=Assignment(cluster_of=labels, n_clusters=k),
        centroids=centroids,
        inertia=history[-1],
        iterations=len(history),
        inertia_history=history,
    )


def threshold_cluster(z, delta: float) -> Assignment:
    """Group samples whose pairwise cosine similarity reaches ``delta``.

    Clusters are the connected components of the similarity graph
    (single-linkage transitive closure), so delta <= -1 yields one cluster
    and delta > 1 yields all singletons.
    """
    s = similarity_matrix(z)
    n = s.shape[0]
    adjacency = s >= delta
    np.fill_diagonal(adjacency, False)

    cluster_of = np.full(n, -1, dtype=np.int64)
    next_id = 0
    for start in range(n):
        if cluster_of[start] != -1:
            continue
        stack = [start]
        cluster_of[start] = next_id
        while stack:
            i = stack.pop()
            for j in np.flatnonzero(adjacency[i]):
                if cluster_of[j] == -1:
                    cluster_of[j] = next_id
                    stack.append(int(j))
        next_id += 1
    return Assignment(cluster_of=cluster_of, n_clusters=next_id)
