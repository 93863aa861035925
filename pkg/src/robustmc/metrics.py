"""Recovery metrics and assumption diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .basis import IDENTITY, PER_COLUMN, ColumnLocalBasis
from .matcore import InputError, column_norms, skinny_svd

RANK_TOL = 1e-8


def _check_orthonormal(U, name):
    U = np.asarray(U, dtype=float)
    if U.ndim != 2:
        raise InputError(f"{name} must be 2-D")
    if U.shape[1]:
        err = np.linalg.norm(U.T @ U - np.eye(U.shape[1]))
        if err > 1e-8:
            raise InputError(f"{name} is not column-orthonormal (residual {err:.2e})")
    return U


def subspace_distance(U1, U2) -> float:
    """``||U1 U1^T - U2 U2^T||_F`` via the principal angles between the spaces.

    With ``c_i`` the cosines of the principal angles,
    ``||P1 - P2||_F^2 = r1 + r2 - 2 sum c_i^2``; the sum is accumulated as
    sines so identical spaces give a distance near machine precision
    rather than its square root.
    """
    U1 = _check_orthonormal(U1, "U1")
    U2 = _check_orthonormal(U2, "U2")
    if U1.shape[0] != U2.shape[0]:
        raise InputError("row counts differ")
    r1, r2 = U1.shape[1], U2.shape[1]
    if r1 == 0 or r2 == 0:
        return float(np.sqrt(r1 + r2))
    # principal sines from the residual of projecting the smaller basis
    A, B = (U1, U2) if r1 <= r2 else (U2, U1)
    resid = A - B @ (B.T @ A)
    sines = np.linalg.svd(resid, compute_uv=False)
    sin2 = float(np.sum(np.minimum(sines, 1.0) ** 2))
    return float(np.sqrt(abs(r1 - r2) + 2.0 * sin2))


def column_space(L, rank_tol: float = RANK_TOL) -> np.ndarray:
    return skinny_svd(L, rank_tol).U


def support(S, rel_tol: float = 1e-6, scale: float | None = None) -> np.ndarray:
    """Indices of columns of ``S`` whose norm exceeds ``rel_tol * scale``.

    ``scale`` defaults to ``max(1, max column norm of S)``.
    """
    cn = column_norms(S)
    if scale is None:
        scale = max(1.0, float(cn.max()) if cn.size else 1.0)
    return np.flatnonzero(cn > rel_tol * scale)


def support_hamming(I1, I2, n: int | None = None) -> int:
    s1 = {int(i) for i in I1}
    s2 = {int(i) for i in I2}
    if n is not None and any(not 0 <= i < n for i in s1 | s2):
        raise InputError("support index out of range")
    return len(s1 ^ s2)


@dataclass(frozen=True)
class IncoherenceReport:
    mu_row: float
    mu_col: float
    mu_cross: float
    ambiguity: float | None = None

    @property
    def mu(self) -> float:
        return max(self.mu_row, self.mu_col, self.mu_cross)


def incoherence(L, basis: ColumnLocalBasis | None = None, S=None,
                rank_tol: float = RANK_TOL) -> IncoherenceReport:
    """Smallest ``mu`` satisfying each incoherence inequality for ``L``.

    For ``omega_ij = q e_j^T`` (``q`` column ``i`` of ``Q_j``)::

        ||P_V omega_ij||_F^2 = ||q||^2 ||V_j:||^2 = ||V_j:||^2
        ||P_U omega_ij||_F^2 = ||U^T q||^2
        <U V^T, omega_ij>    = q^T U V_j:^T

    and each maximum is rescaled by ``n/r``, ``m/r`` and ``mn/r``.
    """
    L = np.asarray(L, dtype=float)
    m, n = L.shape
    if basis is None:
        basis = ColumnLocalBasis.identity(m, n)
    f = skinny_svd(L, rank_tol)
    r = f.rank
    if r == 0:
        raise InputError("incoherence is undefined for a zero matrix")
    U, V = f.U, f.V
    row_lev = np.sum(V ** 2, axis=1)  # length n
    mu_row = n / r * float(row_lev.max())
    if basis.kind == IDENTITY:
        col_lev = np.sum(U ** 2, axis=1)
        cross = np.abs(U @ V.T)
        mu_col = m / r * float(col_lev.max())
        mu_cross = m * n / r * float(cross.max() ** 2)
    elif basis.kind == PER_COLUMN:
        mu_col = mu_cross = 0.0
        for j in range(n):
            W = basis.transform[j].T @ U  # rows are q^T U
            mu_col = max(mu_col, float(np.sum(W ** 2, axis=1).max()))
            mu_cross = max(mu_cross, float(np.abs(W @ V[j]).max()))
        mu_col *= m / r
        mu_cross = m * n / r * mu_cross ** 2
    else:
        W = basis.transform.T @ U
        mu_col = m / r * float(np.sum(W ** 2, axis=1).max())
        mu_cross = m * n / r * float(np.abs(W @ V.T).max() ** 2)
    amb = ambiguity_norm(S) if S is not None else None
    return IncoherenceReport(mu_row, mu_col, mu_cross, amb)


def ambiguity_norm(S) -> float:
    """Spectral norm of ``S`` with its nonzero columns scaled to unit length."""
    S = np.asarray(S, dtype=float)
    cn = column_norms(S)
    nz = cn > 0
    if not nz.any():
        return 0.0
    return float(np.linalg.norm(S[:, nz] / cn[nz], 2))


def clustering_accuracy(pred, truth) -> float:
    """Best agreement over one-to-one relabelings of the predicted clusters."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise InputError("label arrays differ in length")
    if pred.size == 0:
        return 1.0
    p_ids, p_inv = np.unique(pred, return_inverse=True)
    t_ids, t_inv = np.unique(truth, return_inverse=True)
    counts = np.zeros((p_ids.size, t_ids.size), dtype=int)
    np.add.at(counts, (p_inv, t_inv), 1)
    if max(counts.shape) <= 6:
        best = 0
        small, big = (counts, counts.shape[1]) if counts.shape[0] <= counts.shape[1] \
            else (counts.T, counts.shape[0])
        for perm in permutations(range(big), small.shape[0]):
            best = max(best, sum(small[i, perm[i]] for i in range(small.shape[0])))
        matched = best
    else:
        rows, cols = linear_sum_assignment(-counts)
        matched = counts[rows, cols].sum()
    return float(matched) / pred.size
