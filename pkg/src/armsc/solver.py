"""Augmented-Lagrangian solver for arctangent rank minimization.

Solves ``min sum arctan(sigma_i(J)) + lam |E|_l  s.t.  X = XZ + E, Z = J``
by alternating exact block updates of Z, J and E, a dual ascent step on the
two multipliers, and a geometric increase of the penalty ``mu``. The
nuclear-norm (LRR) baseline reuses the same scaffold with singular value
thresholding in the J-step.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, asdict

import numpy as np
from scipy import linalg

from .prox import DcConfig, prox_arctan_vector, shrink_l1, shrink_l21

__all__ = [
    "ERROR_MODELS",
    "SolverConfig",
    "SolverError",
    "IterRecord",
    "SolveResult",
    "SystemCache",
    "precompute_system",
    "update_Z",
    "update_J",
    "update_J_nuclear",
    "update_E",
    "update_multipliers",
    "error_norm",
    "objective_value",
    "augmented_lagrangian",
    "mu_schedule_sums",
    "solve_arm",
    "solve_lrr_baseline",
]

log = logging.getLogger(__name__)

ERROR_MODELS = ("frobenius", "l1", "l21")
_MODEL_ALIASES = {"fro": "frobenius", "frobenius": "frobenius", "l1": "l1", "l21": "l21",
                  "l2,1": "l21"}


def _canonical_model(name):
    try:
        return _MODEL_ALIASES[name.lower()]
    except KeyError:
        raise ValueError(f"unknown error model {name!r}; expected one of {ERROR_MODELS}") from None


class SolverError(RuntimeError):
    """Numerical failure inside the ALM loop (non-finite state, failed SVD)."""


@dataclass(frozen=True)
class SolverConfig:
    """Inputs of the ALM loop.

    Defaults are the motion-segmentation setting (``lam=2``, ``mu0=10``,
    ``rho=1.05`` with the l2,1 error model).
    """

    lam: float = 2.0
    mu0: float = 10.0
    rho: float = 1.05
    error_model: str = "l21"
    rel_tol: float = 1e-5
    max_iters: int = 150
    dc: DcConfig = field(default_factory=DcConfig)
    debug: bool = False

    def __post_init__(self):
        object.__setattr__(self, "error_model", _canonical_model(self.error_model))
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if not self.mu0 > 0:
            raise ValueError("mu0 must be positive")
        if not self.rho > 1:
            raise ValueError("rho must exceed 1")
        if not self.rel_tol > 0:
            raise ValueError("rel_tol must be positive")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")

    def as_dict(self):
        d = asdict(self)
        dc = d.pop("dc")
        d["dc_max_iters"] = dc["max_iters"]
        d["dc_tol"] = dc["tol"]
        return d


@dataclass(frozen=True)
class IterRecord:
    iter: int
    objective: float
    r1: float
    r2: float
    mu: float
    dc_iters: int
    arctan_rank: float
    nuclear_norm: float
    y1_max: float
    y2_max: float


TRACE_COLUMNS = tuple(IterRecord.__dataclass_fields__)


@dataclass
class SolveResult:
    Z: np.ndarray
    E: np.ndarray
    J: np.ndarray
    trace: list
    converged: bool
    method: str = "arm"
    descent_violations: int = 0
    gram_invertible: bool = False

    @property
    def iterations(self):
        return len(self.trace)

    def trace_array(self, column):
        return np.array([getattr(rec, column) for rec in self.trace])


class SystemCache:
    """Cholesky factorization of ``I + X^T X``, reused by every Z-update."""

    def __init__(self, X):
        X = np.asarray(X, dtype=np.float64)
        if not np.all(np.isfinite(X)):
            raise SolverError("data matrix contains non-finite entries")
        n = X.shape[1]
        G = X.T @ X
        G[np.diag_indices(n)] += 1.0
        try:
            self._factor = linalg.cho_factor(G, lower=False, check_finite=False)
        except linalg.LinAlgError as exc:
            raise SolverError(f"factorization of I + X^T X failed: {exc}") from exc
        self.n = n

    def solve(self, b):
        return linalg.cho_solve(self._factor, b, check_finite=False)


def precompute_system(X):
    return SystemCache(X)


def update_Z(cache, X, E, J, Y1, Y2, mu):
    """Exact minimizer of the augmented Lagrangian in Z (a linear solve)."""
    rhs = X.T @ (X - E) + J + (X.T @ Y1 + Y2) / mu
    return cache.solve(rhs)


def _arctan_j_step(Z, Y2, mu, dc):
    # also hands back the spectrum of J so the trace needs no second SVD
    U, sa, Vt = _svd(Z - Y2 / mu)
    s, info = prox_arctan_vector(sa, mu, dc, return_info=True)
    return (U * s) @ Vt, info.iters, s


def _nuclear_j_step(Z, Y2, mu):
    U, sa, Vt = _svd(Z - Y2 / mu)
    s = np.maximum(sa - 1.0 / mu, 0.0)
    return (U * s) @ Vt, 0, s


def update_J(Z, Y2, mu, dc=None):
    """Arctangent prox at ``Z - Y2/mu``; returns ``(J, dc_iters)``."""
    J, iters, _ = _arctan_j_step(Z, Y2, mu, dc)
    return J, iters


def update_J_nuclear(Z, Y2, mu):
    """Singular value thresholding at ``Z - Y2/mu`` with threshold ``1/mu``."""
    J, _, _ = _nuclear_j_step(Z, Y2, mu)
    return J


def update_E(X, Z, Y1, mu, lam, error_model, XZ=None):
    """Closed-form E-step for the chosen error model."""
    model = _canonical_model(error_model)
    XZ = X @ Z if XZ is None else XZ
    if model == "frobenius":
        return (Y1 + mu * (X - XZ)) / (mu + 2.0 * lam)
    Q = X - XZ + Y1 / mu
    if model == "l1":
        return shrink_l1(Q, lam / mu)
    return shrink_l21(Q, lam / mu)


def update_multipliers(Y1, Y2, X, Z, E, J, mu, XZ=None):
    XZ = X @ Z if XZ is None else XZ
    return Y1 + mu * (X - XZ - E), Y2 + mu * (J - Z)


def error_norm(E, error_model):
    """``|E|_F^2``, ``|E|_1`` or ``|E|_{2,1}``."""
    model = _canonical_model(error_model)
    if model == "frobenius":
        return float(np.sum(E * E))
    if model == "l1":
        return float(np.sum(np.abs(E)))
    return float(np.sum(np.linalg.norm(E, axis=0)))


def objective_value(Z, E, lam, error_model, sigma=None):
    """``sum arctan(sigma_i(Z)) + lam |E|_l`` (squared norm for Frobenius)."""
    if sigma is None:
        sigma = np.linalg.svd(Z, compute_uv=False)
    return float(np.sum(np.arctan(sigma))) + lam * error_norm(E, error_model)


def augmented_lagrangian(X, Z, E, J, Y1, Y2, mu, lam, error_model, rank_term="arctan"):
    s = np.linalg.svd(J, compute_uv=False)
    rank_val = np.sum(np.arctan(s)) if rank_term == "arctan" else np.sum(s)
    R1 = X - X @ Z - E
    R2 = J - Z
    return float(rank_val + lam * error_norm(E, error_model)
                 + np.sum(Y1 * R1) + np.sum(Y2 * R2)
                 + 0.5 * mu * (np.sum(R1 * R1) + np.sum(R2 * R2)))


def mu_schedule_sums(mu0, rho, terms):
    """Partial sums of ``mu_{t+1}/mu_t^2`` and ``1/mu_t`` for ``mu_t = mu0 rho^t``.

    Both series are geometric with ratio ``1/rho`` and converge for rho > 1;
    returned as ``(sum_a, sum_b, limit_a, limit_b)``.
    """
    t = np.arange(terms, dtype=np.float64)
    inv_mu = np.exp(-np.log(mu0) - t * np.log(rho))
    sum_a = float(np.sum(rho * inv_mu))
    sum_b = float(np.sum(inv_mu))
    limit_b = 1.0 / (mu0 * (1.0 - 1.0 / rho))
    return sum_a, sum_b, rho * limit_b, limit_b


def _svd(A):
    try:
        return np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"SVD failed: {exc}") from exc


def _alm(X, cfg, method):
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D matrix")
    m, n = X.shape
    cache = precompute_system(X)
    lam, model = cfg.lam, cfg.error_model
    rank_term = "arctan" if method == "arm" else "nuclear"

    J = np.eye(n)
    E = np.zeros((m, n))
    Y1 = np.zeros((m, n))
    Y2 = np.zeros((n, n))
    Z = np.zeros((n, n))
    mu = cfg.mu0
    norm_x = float(np.linalg.norm(X))
    scale = norm_x if norm_x > 0 else 1.0

    trace = []
    violations = 0
    converged = False

    def lagr(Z_, E_, J_):
        return augmented_lagrangian(X, Z_, E_, J_, Y1, Y2, mu, lam, model, rank_term)

    for it in range(cfg.max_iters):
        if cfg.debug:
            before = lagr(Z, E, J)

        Z = update_Z(cache, X, E, J, Y1, Y2, mu)
        if cfg.debug:
            after = lagr(Z, E, J)
            violations += _descent_violated(before, after)
            before = after

        if method == "arm":
            J, dc_iters, sigma_j = _arctan_j_step(Z, Y2, mu, cfg.dc)
        else:
            J, dc_iters, sigma_j = _nuclear_j_step(Z, Y2, mu)
        if cfg.debug:
            after = lagr(Z, E, J)
            violations += _descent_violated(before, after)
            before = after

        XZ = X @ Z
        E = update_E(X, Z, Y1, mu, lam, model, XZ=XZ)
        if cfg.debug:
            after = lagr(Z, E, J)
            violations += _descent_violated(before, after)

        Y1, Y2 = update_multipliers(Y1, Y2, X, Z, E, J, mu, XZ=XZ)

        r1 = float(np.linalg.norm(X - XZ - E)) / scale
        r2 = float(np.linalg.norm(J - Z)) / scale
        arct = float(np.sum(np.arctan(sigma_j)))
        nuc = float(np.sum(sigma_j))
        rank_val = arct if method == "arm" else nuc
        objective = rank_val + lam * error_norm(E, model)
        rec = IterRecord(it + 1, objective, r1, r2, mu, int(dc_iters), arct, nuc,
                         float(np.max(np.abs(Y1))) if Y1.size else 0.0,
                         float(np.max(np.abs(Y2))) if Y2.size else 0.0)
        trace.append(rec)
        log.debug("iter %d obj=%.6g r1=%.3g r2=%.3g mu=%.4g dc=%d",
                  rec.iter, objective, r1, r2, mu, dc_iters)

        if not (math.isfinite(objective) and math.isfinite(rec.y1_max)
                and math.isfinite(rec.y2_max)):
            raise SolverError(f"non-finite solver state at iteration {it + 1}")

        if max(r1, r2) <= cfg.rel_tol:
            converged = True
            break
        mu *= cfg.rho

    gram_invertible = bool(m >= n and np.linalg.matrix_rank(X) == n)
    if violations:
        log.warning("%d blockwise descent violations recorded", violations)
    return SolveResult(Z=Z, E=E, J=J, trace=trace, converged=converged, method=method,
                       descent_violations=violations, gram_invertible=gram_invertible)


def _descent_violated(before, after, rtol=1e-9):
    return int(after > before + rtol * max(1.0, abs(before)))


def solve_arm(X, cfg=None):
    """Run the ARM augmented-Lagrangian loop on data ``X`` (columns are samples).

    Starts from ``J = I``, ``E = 0``, ``Y1 = Y2 = 0`` and stops once both
    relative feasibility residuals ``|X - XZ - E|_F/|X|_F`` and
    ``|J - Z|_F/|X|_F`` drop to ``cfg.rel_tol`` or after ``cfg.max_iters``
    iterations.

    Returns
    -------
    SolveResult
        ``Z``, ``E``, ``J`` plus one :class:`IterRecord` per iteration.
    """
    return _alm(X, cfg or SolverConfig(), "arm")


def solve_lrr_baseline(X, cfg=None):
    """Nuclear-norm counterpart of :func:`solve_arm` (threshold ``1/mu`` in the J-step)."""
    return _alm(X, cfg or SolverConfig(), "lrr")
