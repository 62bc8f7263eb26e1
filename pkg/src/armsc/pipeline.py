"""End-to-end subspace clustering: solve, build the affinity graph, cut it."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .affinity import AffinityGraph, build_affinity
from .solver import SolveResult, SolverConfig, solve_arm, solve_lrr_baseline
from .spectral import SpectralConfig, ncuts

__all__ = ["ClusterResult", "cluster_subspaces"]

SOLVERS = {"arm": solve_arm, "lrr": solve_lrr_baseline}


@dataclass
class ClusterResult:
    labels: np.ndarray
    solve: SolveResult
    graph: AffinityGraph
    info: dict


def cluster_subspaces(X, k, solver_cfg=None, alpha=2, seed=0, method="arm",
                      svd_rel_tol=1e-6, restarts=20):
    """Cluster the columns of ``X`` into ``k`` subspaces.

    ``method`` picks the arctangent solver (``"arm"``) or the nuclear-norm
    baseline (``"lrr"``); everything after the solve is shared.
    """
    try:
        solve = SOLVERS[method]
    except KeyError:
        raise ValueError(f"unknown method {method!r}") from None
    res = solve(X, solver_cfg or SolverConfig())
    graph = build_affinity(res.Z, alpha=alpha, rel_tol=svd_rel_tol)
    labels, info = ncuts(graph.W, SpectralConfig(k=k, seed=seed, restarts=restarts),
                         return_info=True)
    return ClusterResult(labels, res, graph, info)
