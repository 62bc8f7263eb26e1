"""Affinity graph from a self-representation matrix.

The representation ``Z*`` is reduced with a skinny SVD ``U S V^T``; every
sample ``i`` is embedded as row ``i`` of ``U S^{1/2}`` and two samples are
linked with weight ``cos(angle)^(2 alpha)``.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass

import numpy as np

__all__ = ["AffinityGraph", "skinny_svd", "build_affinity"]

log = logging.getLogger(__name__)


@dataclass
class AffinityGraph:
    W: np.ndarray
    alpha: int
    rank: int
    zero_rows: np.ndarray

    @property
    def n(self):
        return self.W.shape[0]


def skinny_svd(Z, rel_tol=1e-6):
    """SVD truncated to singular values above ``rel_tol * sigma_1``.

    Returns ``(U, s, Vt)`` with ``U`` of shape ``(m, r)``; ``r = 0`` when
    ``Z`` is zero.
    """
    Z = np.asarray(Z, dtype=np.float64)
    if not np.all(np.isfinite(Z)):
        raise np.linalg.LinAlgError("skinny_svd: non-finite input")
    U, s, Vt = np.linalg.svd(Z, full_matrices=False)
    if s.size == 0 or s[0] == 0:
        r = 0
    else:
        r = int(np.count_nonzero(s > rel_tol * s[0]))
    return U[:, :r], s[:r], Vt[:r]


def build_affinity(Z_star, alpha=2, rel_tol=1e-6):
    """Angular affinity ``W_ij = (u_i . u_j / (|u_i| |u_j|))^(2 alpha)``.

    Samples whose embedding row is zero are isolated: their whole row and
    column of ``W`` is zero, diagonal included.
    """
    if int(alpha) != alpha or alpha < 1:
        raise ValueError("alpha must be a positive integer")
    alpha = int(alpha)
    Z_star = np.asarray(Z_star, dtype=np.float64)
    n = Z_star.shape[0]
    U, s, _ = skinny_svd(Z_star, rel_tol)
    if s.size == 0:
        warnings.warn("representation matrix is zero; affinity graph is empty", RuntimeWarning,
                      stacklevel=2)
        return AffinityGraph(np.zeros((n, n)), alpha, 0, np.ones(n, dtype=bool))

    emb = U * np.sqrt(s)
    norms = np.linalg.norm(emb, axis=1)
    zero = norms <= np.finfo(np.float64).eps * norms.max()
    if zero.any():
        warnings.warn(f"{int(zero.sum())} samples have a zero embedding and are isolated",
                      RuntimeWarning, stacklevel=2)
    unit = np.zeros_like(emb)
    unit[~zero] = emb[~zero] / norms[~zero, None]
    cos = unit @ unit.T
    W = np.clip(cos, -1.0, 1.0) ** (2 * alpha)
    W = 0.5 * (W + W.T)
    np.fill_diagonal(W, np.where(zero, 0.0, 1.0))
    return AffinityGraph(W, alpha, int(s.size), zero)
