"""Subspace clustering on top of robust completion.

A robust-completion solution ``(L*, S*)`` gives the robust LRR
representation in closed form: the shape interaction matrix ``V V^T`` of
``L*``.  Its entries are block diagonal for independent subspaces, which
spectral clustering then separates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from sklearn.cluster import KMeans

from . import admm, filtering
from .basis import ColumnLocalBasis, ObservedCoefficients
from .matcore import InputError, pinv, skinny_svd
from .metrics import support

RANK_TOL = 1e-8


@dataclass(frozen=True)
class ClusterResult:
    labels: np.ndarray
    k: int
    outliers: np.ndarray | None = None


def lrr_from_mc(L_star) -> np.ndarray:
    """``pinv(L*) L*``, the ``n x n`` representation with ``L* = L* Z``."""
    L_star = np.asarray(L_star, dtype=float)
    if L_star.size == 0:
        raise InputError("L_star is empty")
    if not np.any(L_star):
        return np.zeros((L_star.shape[1], L_star.shape[1]))
    return pinv(L_star, RANK_TOL) @ L_star


def shape_interaction(L) -> np.ndarray:
    """``V V^T`` from the skinny SVD of ``L``."""
    L = np.asarray(L, dtype=float)
    if L.size == 0:
        raise InputError("L is empty")
    if not np.any(L):
        return np.zeros((L.shape[1], L.shape[1]))
    V = skinny_svd(L, RANK_TOL).V
    return V @ V.T


def affinity(Z) -> np.ndarray:
    Z = np.abs(np.asarray(Z, dtype=float))
    return Z + Z.T


def spectral_embedding(W, k: int) -> np.ndarray:
    """Row-normalized bottom-``k`` eigenvectors of ``I - D^-1/2 W D^-1/2``."""
    deg = W.sum(axis=1)
    # isolated nodes get a tiny ridge instead of a division by zero
    deg = np.maximum(deg, 1e-12 * max(1.0, float(deg.max())))
    dinv = 1.0 / np.sqrt(deg)
    A = W * dinv[:, None] * dinv[None, :]
    # bottom eigenvectors of the Laplacian are the top ones of A
    vals, vecs = np.linalg.eigh((A + A.T) / 2)
    E = vecs[:, -k:]
    norms = np.linalg.norm(E, axis=1, keepdims=True)
    return E / np.where(norms > 0, norms, 1.0)


def spectral_cluster(Z, k: int, rng: int | np.random.Generator | None = 0,
                     n_init: int = 10) -> ClusterResult:
    """Normalized-cut style clustering of the columns represented by ``Z``."""
    Z = np.asarray(Z, dtype=float)
    if Z.ndim != 2 or Z.shape[0] != Z.shape[1]:
        raise InputError("Z must be square")
    if k < 1:
        raise InputError("k must be >= 1")
    n = Z.shape[0]
    if k == 1 or n <= k:
        labels = np.zeros(n, dtype=int) if k == 1 else np.arange(n)
        return ClusterResult(labels, k)
    if isinstance(rng, np.random.Generator):
        rng = int(rng.integers(2**31 - 1))
    E = spectral_embedding(affinity(Z), k)
    km = KMeans(n_clusters=k, init="k-means++", n_init=n_init, random_state=rng)
    return ClusterResult(km.fit_predict(E).astype(int), k)


def cluster_with_missing(observed: ObservedCoefficients, basis: ColumnLocalBasis, k: int,
                         admm_config: admm.AdmmConfig | None = None,
                         filter_config: filtering.FilterConfig | None = None,
                         seed: int = 0) -> ClusterResult:
    """Complete and de-corrupt with robust MC, then cluster the clean columns.

    Columns identified as corrupted receive label ``-1``.  Passing
    ``filter_config`` switches the completion step to l2,1 filtering.
    """
    n = observed.shape[1]
    if filter_config is not None:
        fr = filtering.run(observed, basis, filter_config)
        L_star, outliers = fr.completed, fr.support
    else:
        res = admm.solve(observed, basis, admm_config)
        L_star, outliers = res.L_star, support(res.S_star)
    labels = np.full(n, -1, dtype=int)
    inliers = np.setdiff1d(np.arange(n), outliers)
    if inliers.size:
        Z = shape_interaction(L_star[:, inliers])
        labels[inliers] = spectral_cluster(Z, min(k, inliers.size), rng=seed).labels
    return ClusterResult(labels, k, np.asarray(outliers, dtype=int))
