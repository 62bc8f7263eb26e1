r"""Shrinkage and proximal operators used by the ARM and LRR solvers.

The arctangent surrogate ``F(Z) = sum_i arctan(sigma_i(Z))`` is concave in
the singular values, so its proximal map is computed by a difference-of-
convex (DC) iteration on the spectrum and lifted back to matrices through
the SVD of the anchor point.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "DcConfig",
    "DcInfo",
    "arctan_rank",
    "shrink_l1",
    "shrink_l21",
    "arctan_subgradient_weights",
    "prox_arctan_objective",
    "prox_arctan_vector",
    "prox_arctan_matrix",
    "spectral_gradient",
    "svt_nuclear",
]

# sup_s 2s / (1 + s^2)^2, attained at s = 1/sqrt(3). For mu above this the
# scalar prox objective is strictly convex on s >= 0.
CONVEXITY_MU = 3.0 * np.sqrt(3.0) / 8.0


@dataclass(frozen=True)
class DcConfig:
    """Stopping rule for the DC iteration on the spectrum."""

    max_iters: int = 50
    tol: float = 1e-8

    def __post_init__(self):
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")
        if self.tol < 0:
            raise ValueError("tol must be non-negative")


@dataclass(frozen=True)
class DcInfo:
    iters: int
    converged: bool


def arctan_rank(sigma):
    """Sum of ``arctan(|sigma_i|)``; lies in ``[0, len(sigma) * pi / 2)``."""
    return float(np.sum(np.arctan(np.abs(np.asarray(sigma, dtype=np.float64)))))


def shrink_l1(Q, tau):
    """Entry-wise soft threshold, the minimizer of ``tau|E|_1 + 0.5|E - Q|_F^2``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    Q = np.asarray(Q, dtype=np.float64)
    return np.sign(Q) * np.maximum(np.abs(Q) - tau, 0.0)


def shrink_l21(Q, tau):
    """Column-wise shrinkage, the minimizer of ``tau|E|_{2,1} + 0.5|E - Q|_F^2``.

    Column ``i`` is scaled by ``(|q_i| - tau) / |q_i|`` when its norm exceeds
    ``tau`` and set to zero otherwise.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    Q = np.asarray(Q, dtype=np.float64)
    norms = np.linalg.norm(Q, axis=0)
    scale = np.zeros_like(norms)
    keep = norms > tau
    scale[keep] = (norms[keep] - tau) / norms[keep]
    return Q * scale


def arctan_subgradient_weights(sigma):
    """Derivative of ``arctan`` at each singular value, taken as 1 at zero.

    ``1 / (1 + 0^2)`` is already 1, so the convention at the origin (the
    right-hand limit) coincides with the formula.
    """
    sigma = np.asarray(sigma, dtype=np.float64)
    return 1.0 / (1.0 + sigma * sigma)


def prox_arctan_objective(sigma, sigma_a, mu):
    """``sum arctan(sigma) + mu/2 |sigma - sigma_a|^2``, per component."""
    sigma = np.asarray(sigma, dtype=np.float64)
    return np.arctan(np.abs(sigma)) + 0.5 * mu * (sigma - sigma_a) ** 2


def _dc_run(sigma_a, mu, start, cfg):
    s = start.copy()
    for k in range(1, cfg.max_iters + 1):
        nxt = np.maximum(sigma_a - arctan_subgradient_weights(s) / mu, 0.0)
        step = np.max(np.abs(nxt - s)) if s.size else 0.0
        s = nxt
        if step <= cfg.tol:
            return s, k, True
    return s, cfg.max_iters, False


def prox_arctan_vector(sigma_a, mu, cfg=None, return_info=False):
    r"""Proximal map of the arctangent rank surrogate on a spectrum.

    Solves ``argmin_{s >= 0} sum arctan(s_i) + mu/2 |s - sigma_a|^2`` with
    the DC fixed-point iteration ``s <- (sigma_a - w(s) / mu)_+`` where
    ``w(s) = 1 / (1 + s^2)``, started at ``s = sigma_a``.

    The map ``s -> (sigma_a - w(s)/mu)_+`` is monotone, so the run from
    ``sigma_a`` descends to the largest fixed point below it. When
    ``mu <= 3 sqrt(3) / 8`` the scalar problems can have two local minima;
    a second run started at zero then climbs to the smallest fixed point
    and the better of the two is kept per component.

    Parameters
    ----------
    sigma_a : array_like
        Non-negative anchor spectrum.
    mu : float
        Penalty, ``mu > 0``.
    cfg : DcConfig, optional
    return_info : bool
        Also return a :class:`DcInfo` with the iteration count.

    Returns
    -------
    sigma : ndarray
    info : DcInfo, only when ``return_info`` is set
    """
    if mu <= 0:
        raise ValueError("mu must be positive")
    cfg = cfg or DcConfig()
    sigma_a = np.asarray(sigma_a, dtype=np.float64)
    s, iters, converged = _dc_run(sigma_a, mu, sigma_a, cfg)
    if mu <= CONVEXITY_MU and s.size:
        s0, iters0, conv0 = _dc_run(sigma_a, mu, np.zeros_like(sigma_a), cfg)
        better = prox_arctan_objective(s0, sigma_a, mu) < prox_arctan_objective(s, sigma_a, mu)
        s = np.where(better, s0, s)
        iters = max(iters, iters0)
        converged = converged and conv0
    if return_info:
        return s, DcInfo(iters, converged)
    return s


def prox_arctan_matrix(A, mu, cfg=None, return_info=False):
    """``argmin_Z F(Z) + mu/2 |Z - A|_F^2`` via the SVD of ``A``.

    Returns ``U diag(sigma*) V^T`` where ``A = U diag(sigma_A) V^T`` and
    ``sigma*`` is :func:`prox_arctan_vector` applied to ``sigma_A``.
    """
    A = np.asarray(A, dtype=np.float64)
    if not np.all(np.isfinite(A)):
        raise np.linalg.LinAlgError("prox_arctan_matrix: non-finite input")
    U, sa, Vt = np.linalg.svd(A, full_matrices=False)
    s, info = prox_arctan_vector(sa, mu, cfg, return_info=True)
    Z = (U * s) @ Vt
    if return_info:
        return Z, info
    return Z


def spectral_gradient(A):
    """Gradient of ``sum arctan(sigma_i(A))``: ``U diag(1/(1+sigma^2)) V^T``.

    Only a gradient when the singular values are distinct and positive.
    """
    U, s, Vt = np.linalg.svd(np.asarray(A, dtype=np.float64), full_matrices=False)
    return (U * arctan_subgradient_weights(s)) @ Vt


def svt_nuclear(A, tau):
    """Singular value thresholding, the proximal map of ``tau |.|_*``."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    U, s, Vt = np.linalg.svd(np.asarray(A, dtype=np.float64), full_matrices=False)
    return (U * np.maximum(s - tau, 0.0)) @ Vt
