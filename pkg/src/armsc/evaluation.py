"""Synthetic union-of-subspaces data, corruption models and clustering metrics."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linear_sum_assignment

__all__ = [
    "SubspaceSpec",
    "CorruptionSpec",
    "generate_subspaces",
    "corrupt",
    "clustering_error",
    "block_diag_mass",
    "rank_approx_profile",
    "write_table",
]

CORRUPTION_MODELS = ("none", "gaussian", "sparse", "sample_specific")


def _per_group(value, k, name):
    if np.isscalar(value):
        return [int(value)] * k
    value = [int(v) for v in value]
    if len(value) != k:
        raise ValueError(f"{name} needs one entry per subspace ({k}), got {len(value)}")
    return value


@dataclass(frozen=True)
class SubspaceSpec:
    """Union of ``k`` linear subspaces of ``R^m``.

    ``dims`` and ``points`` accept a single int (shared by every subspace) or
    one value per subspace. With ``independent=True`` the bases are disjoint
    column blocks of one random orthogonal matrix, which requires
    ``sum(dims) <= ambient_dim``; otherwise each basis is drawn separately.
    """

    ambient_dim: int
    k: int
    dims: object = 4
    points: object = 40
    seed: int = 0
    independent: bool = True

    def __post_init__(self):
        if self.ambient_dim < 1 or self.k < 1:
            raise ValueError("ambient_dim and k must be positive")
        dims = _per_group(self.dims, self.k, "dims")
        pts = _per_group(self.points, self.k, "points")
        if any(d < 1 or d > self.ambient_dim for d in dims):
            raise ValueError("each subspace dimension must lie in [1, ambient_dim]")
        if any(p < 1 for p in pts):
            raise ValueError("each subspace needs at least one point")
        if self.independent and sum(dims) > self.ambient_dim:
            raise ValueError(f"independent subspaces need sum(dims)={sum(dims)} "
                             f"<= ambient_dim={self.ambient_dim}")

    @property
    def dim_list(self):
        return _per_group(self.dims, self.k, "dims")

    @property
    def point_list(self):
        return _per_group(self.points, self.k, "points")


@dataclass(frozen=True)
class CorruptionSpec:
    """How to corrupt a clean data matrix.

    ``level`` is the noise standard deviation (gaussian), the fraction of
    corrupted entries (sparse) or the fraction of replaced columns
    (sample_specific). ``magnitude`` bounds sparse values and sets the norm
    of replacement columns.
    """

    model: str = "none"
    level: float = 0.0
    magnitude: float = 1.0
    seed: int = 0

    def __post_init__(self):
        model = {"sample": "sample_specific"}.get(self.model, self.model)
        object.__setattr__(self, "model", model)
        if model not in CORRUPTION_MODELS:
            raise ValueError(f"unknown corruption model {self.model!r}")
        if self.level < 0:
            raise ValueError("level must be non-negative")
        if model in ("sparse", "sample_specific") and self.level > 1:
            raise ValueError("corruption fraction must lie in [0, 1]")


def subspace_bases(spec):
    rng = np.random.default_rng(spec.seed)
    m = spec.ambient_dim
    dims = spec.dim_list
    if spec.independent:
        Q, _ = np.linalg.qr(rng.standard_normal((m, m)))
        offsets = np.cumsum([0] + dims)
        bases = [Q[:, offsets[i]:offsets[i + 1]] for i in range(spec.k)]
    else:
        bases = [np.linalg.qr(rng.standard_normal((m, d)))[0] for d in dims]
    return bases, rng


def generate_subspaces(spec):
    """Sample points from a union of subspaces.

    Each point is ``B_i c`` with ``c`` a unit-norm Gaussian coefficient
    vector, so every column of ``X`` has unit length. Columns are shuffled;
    the returned labels follow the shuffle.

    Returns
    -------
    X : ndarray, shape (ambient_dim, total_points)
    labels : ndarray of int, shape (total_points,)
    """
    bases, rng = subspace_bases(spec)
    blocks, labels = [], []
    for i, (B, npts) in enumerate(zip(bases, spec.point_list)):
        C = rng.standard_normal((B.shape[1], npts))
        C /= np.linalg.norm(C, axis=0)
        blocks.append(B @ C)
        labels.extend([i] * npts)
    X = np.hstack(blocks)
    labels = np.asarray(labels, dtype=np.int64)
    perm = rng.permutation(X.shape[1])
    return X[:, perm], labels[perm]


def corrupt(X, spec):
    """Apply a corruption model; returns ``(X_corrupted, E_true)``.

    ``E_true`` is defined as ``X_corrupted - X`` so the identity holds exactly.
    """
    X = np.asarray(X, dtype=np.float64)
    rng = np.random.default_rng(spec.seed)
    Xc = X.copy()
    m, n = X.shape
    if spec.model == "gaussian" and spec.level > 0:
        Xc = X + rng.normal(0.0, spec.level, size=X.shape)
    elif spec.model == "sparse":
        count = int(np.floor(spec.level * m * n))
        if count:
            idx = rng.choice(m * n, size=count, replace=False)
            flat = Xc.reshape(-1)
            flat[idx] = rng.uniform(-spec.magnitude, spec.magnitude, size=count)
    elif spec.model == "sample_specific":
        count = int(np.floor(spec.level * n))
        if count:
            cols = rng.choice(n, size=count, replace=False)
            G = rng.standard_normal((m, count))
            G *= spec.magnitude / np.linalg.norm(G, axis=0)
            Xc[:, cols] = G
    return Xc, Xc - X


def _contingency(pred, truth):
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape or pred.ndim != 1:
        raise ValueError(f"label length mismatch: {pred.shape} vs {truth.shape}")
    _, p = np.unique(pred, return_inverse=True)
    _, t = np.unique(truth, return_inverse=True)
    C = np.zeros((p.max() + 1, t.max() + 1), dtype=np.int64)
    np.add.at(C, (p, t), 1)
    return C


def clustering_error(pred, truth):
    """Misclassification rate under the best one-to-one label matching."""
    C = _contingency(pred, truth)
    rows, cols = linear_sum_assignment(C, maximize=True)
    return 1.0 - C[rows, cols].sum() / C.sum()


def block_diag_mass(W, truth):
    """Share of off-diagonal affinity that stays inside true clusters (0/0 -> 1)."""
    W = np.asarray(W, dtype=np.float64)
    truth = np.asarray(truth)
    if W.shape != (truth.size, truth.size):
        raise ValueError("W and label vector sizes disagree")
    same = truth[:, None] == truth[None, :]
    off = ~np.eye(truth.size, dtype=bool)
    total = W[off].sum()
    if total == 0:
        return 1.0
    return float(W[same & off].sum() / total)


PROFILE_COLUMNS = ("sigma1", "sigma2", "rank", "arctan_surrogate", "nuclear_norm")


def rank_approx_profile(sigma_max, steps):
    """Rank, scaled arctangent surrogate and nuclear norm over a 2-D spectrum grid.

    Returns a list of rows ``(sigma1, sigma2, rank, (2/pi) sum arctan, sum sigma)``
    over ``linspace(0, sigma_max, steps)`` squared, sigma1 varying slowest.
    """
    if steps < 2:
        raise ValueError("steps must be >= 2")
    if sigma_max <= 0:
        raise ValueError("sigma_max must be positive")
    grid = np.linspace(0.0, sigma_max, steps)
    rows = []
    for s1 in grid:
        for s2 in grid:
            sig = np.array([s1, s2])
            rows.append((float(s1), float(s2), int(np.count_nonzero(sig)),
                         float(2.0 / np.pi * np.sum(np.arctan(sig))), float(sig.sum())))
    return rows


def write_table(path, header, rows):
    """CSV with a header row."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
