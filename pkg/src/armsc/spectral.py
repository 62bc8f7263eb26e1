"""Normalized-cut spectral clustering: Laplacian eigenmaps followed by k-means."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SpectralConfig", "KMeansResult", "spectral_embed", "kmeans", "ncuts"]


@dataclass(frozen=True)
class SpectralConfig:
    k: int
    seed: int = 0
    restarts: int = 20
    kmeans_max_iters: int = 300

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")
        if self.kmeans_max_iters < 1:
            raise ValueError("kmeans_max_iters must be >= 1")


@dataclass
class KMeansResult:
    labels: np.ndarray
    inertia: float
    degenerate: bool


def normalized_laplacian(W):
    """``I - D^{-1/2} W D^{-1/2}``; zero-degree vertices get ``D^{-1/2} = 0``.

    Returns the Laplacian and a mask of isolated vertices.
    """
    W = np.asarray(W, dtype=np.float64)
    deg = W.sum(axis=1)
    isolated = deg <= 0
    dinv = np.zeros_like(deg)
    dinv[~isolated] = 1.0 / np.sqrt(deg[~isolated])
    M = dinv[:, None] * W * dinv[None, :]
    M = 0.5 * (M + M.T)
    return np.eye(W.shape[0]) - M, isolated


def spectral_embed(W, k, return_eigenvalues=False):
    """Eigenvectors of the normalized Laplacian for its ``k`` smallest eigenvalues.

    Rows of the ``n x k`` embedding are scaled to unit length; zero rows
    stay zero.
    """
    W = np.asarray(W, dtype=np.float64)
    n = W.shape[0]
    if W.ndim != 2 or W.shape[1] != n:
        raise ValueError("W must be square")
    if k < 1 or k > n:
        raise ValueError(f"k={k} must lie in [1, n={n}]")
    L, _ = normalized_laplacian(W)
    evals, evecs = np.linalg.eigh(L)
    V = evecs[:, :k]
    norms = np.linalg.norm(V, axis=1)
    nz = norms > 0
    V = V.copy()
    V[nz] /= norms[nz, None]
    if return_eigenvalues:
        return V, evals[:k]
    return V


def _kmeanspp(points, k, rng):
    n = points.shape[0]
    centers = np.empty((k, points.shape[1]))
    centers[0] = points[rng.integers(n)]
    d2 = np.sum((points - centers[0]) ** 2, axis=1)
    for j in range(1, k):
        total = d2.sum()
        if total > 0:
            idx = rng.choice(n, p=d2 / total)
        else:
            idx = rng.integers(n)
        centers[j] = points[idx]
        d2 = np.minimum(d2, np.sum((points - centers[j]) ** 2, axis=1))
    return centers


def _sq_dists(points, centers):
    return (np.sum(points ** 2, axis=1)[:, None] - 2.0 * points @ centers.T
            + np.sum(centers ** 2, axis=1)[None, :])


def _lloyd(points, centers, max_iters):
    labels = None
    for _ in range(max_iters):
        new = np.argmin(_sq_dists(points, centers), axis=1)
        if labels is not None and np.array_equal(new, labels):
            break
        labels = new
        for j in range(centers.shape[0]):
            members = points[labels == j]
            if len(members):
                centers[j] = members.mean(axis=0)
    inertia = float(np.sum((points - centers[labels]) ** 2))
    return labels, inertia


def kmeans(points, cfg):
    """Best-of-restarts Lloyd iterations with k-means++ seeding.

    Restart ``r`` draws from a generator seeded by ``(cfg.seed, r)``, so the
    result depends only on the inputs and the seed. The run is flagged
    ``degenerate`` when there are fewer distinct points than clusters or the
    winning restart leaves a cluster empty.
    """
    points = np.asarray(points, dtype=np.float64)
    n = points.shape[0]
    k = cfg.k
    if k > n:
        raise ValueError(f"cannot form k={k} clusters from {n} points")
    best = None
    for r in range(cfg.restarts):
        rng = np.random.default_rng([cfg.seed, r])
        labels, inertia = _lloyd(points, _kmeanspp(points, k, rng), cfg.kmeans_max_iters)
        if best is None or inertia < best[1]:
            best = (labels, inertia)
    labels, inertia = best
    distinct = np.unique(points, axis=0).shape[0]
    degenerate = distinct < k or np.unique(labels).size < k
    return KMeansResult(labels.astype(np.int64), inertia, bool(degenerate))


def ncuts(W, cfg, return_info=False):
    """Cluster the graph ``W`` into ``cfg.k`` groups.

    With ``return_info`` also returns a dict with the k smallest Laplacian
    eigenvalues, the isolated-vertex mask and the k-means degeneracy flag.
    """
    V, evals = spectral_embed(W, cfg.k, return_eigenvalues=True)
    result = kmeans(V, cfg)
    if not return_info:
        return result.labels
    _, isolated = normalized_laplacian(W)
    info = {"eigenvalues": evals, "isolated": isolated, "degenerate": result.degenerate,
            "inertia": result.inertia}
    return result.labels, info
