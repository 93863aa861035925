"""Robust matrix completion in a general orthonormal basis.

Recovers the column space of a low-rank matrix and the support of its
corrupted columns from a subset of expansion coefficients, by nuclear
norm plus l2,1 minimization.  Also provides the l2,1 filtering speedup
and a subspace-clustering pipeline built on the recovered matrix.
"""

from .admm import AdmmConfig, SolveResult, default_lambda, solve
from .basis import ColumnLocalBasis, ObservedCoefficients, analyze, synthesize
from .cluster import cluster_with_missing, lrr_from_mc, shape_interaction, spectral_cluster
from .filtering import FilterConfig, FilterResult, estimate_rank
from .filtering import run as filter_run
from .matcore import InputError
from .synth import SyntheticProblem, SyntheticSpec, generate

__version__ = "0.1.0"

__all__ = [
    "AdmmConfig", "SolveResult", "default_lambda", "solve",
    "ColumnLocalBasis", "ObservedCoefficients", "analyze", "synthesize",
    "cluster_with_missing", "lrr_from_mc", "shape_interaction", "spectral_cluster",
    "FilterConfig", "FilterResult", "estimate_rank", "filter_run",
    "InputError", "SyntheticProblem", "SyntheticSpec", "generate",
]
