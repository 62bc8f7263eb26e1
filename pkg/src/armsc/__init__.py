"""Arctangent rank minimization (ARM) for robust subspace clustering."""
from .affinity import AffinityGraph, build_affinity, skinny_svd
from .evaluation import (CorruptionSpec, SubspaceSpec, block_diag_mass, clustering_error,
                         corrupt, generate_subspaces, rank_approx_profile)
from .matrix_io import MatrixFormatError, load_labels, load_matrix, save_labels, save_matrix
from .pipeline import ClusterResult, cluster_subspaces
from .prox import (DcConfig, arctan_rank, arctan_subgradient_weights, prox_arctan_matrix,
                   prox_arctan_vector, shrink_l1, shrink_l21, spectral_gradient, svt_nuclear)
from .solver import SolveResult, SolverConfig, SolverError, solve_arm, solve_lrr_baseline
from .spectral import SpectralConfig, kmeans, ncuts, spectral_embed

__version__ = "0.1.0"
