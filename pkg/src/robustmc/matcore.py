"""Dense linear-algebra kernels and proximal operators.

Everything here works on plain ``numpy.ndarray`` values of dtype float64.
The factor containers are small frozen dataclasses so callers can unpack
them by name.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

DEFAULT_RANK_TOL = 1e-10


class InputError(ValueError):
    """Raised when an argument violates an operation's preconditions."""


def thin_svd(A):
    """``U, s, Vt`` of a finite matrix, economy size.

    The divide-and-conquer driver occasionally fails to converge on
    well-posed inputs; the QR-iteration driver is then used instead.
    """
    try:
        return np.linalg.svd(A, full_matrices=False)
    except np.linalg.LinAlgError:
        return scipy.linalg.svd(A, full_matrices=False, lapack_driver="gesvd")


@dataclass(frozen=True)
class SvdFactors:
    U: np.ndarray
    sigma: np.ndarray
    V: np.ndarray
    rank_tol: float

    @property
    def rank(self) -> int:
        return int(self.sigma.size)

    def reconstruct(self) -> np.ndarray:
        return (self.U * self.sigma) @ self.V.T


@dataclass(frozen=True)
class QrFactors:
    Q: np.ndarray
    R: np.ndarray


def as_matrix(A, name: str = "A") -> np.ndarray:
    """Validate ``A`` as a finite, non-empty 2-D float array."""
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A[:, None]
    if A.ndim != 2:
        raise InputError(f"{name} must be 2-D, got shape {A.shape}")
    if A.size == 0:
        raise InputError(f"{name} is empty")
    if not np.all(np.isfinite(A)):
        raise InputError(f"{name} has non-finite entries")
    return A


def skinny_svd(A, rank_tol: float = DEFAULT_RANK_TOL) -> SvdFactors:
    """Thin SVD keeping only triples with ``sigma_i > rank_tol * sigma_1``.

    With ``rank_tol == 0`` every strictly positive singular value is kept.
    """
    A = as_matrix(A)
    if rank_tol < 0:
        raise InputError("rank_tol must be non-negative")
    m, n = A.shape
    U, s, Vt = thin_svd(A)
    if s.size == 0 or s[0] == 0.0:
        return SvdFactors(np.zeros((m, 0)), np.zeros(0), np.zeros((n, 0)), rank_tol)
    keep = int(np.count_nonzero(s > rank_tol * s[0]))
    return SvdFactors(U[:, :keep], s[:keep], Vt[:keep].T, rank_tol)


def numerical_rank(A, rank_tol: float = 1e-8) -> int:
    return skinny_svd(A, rank_tol).rank


def qr(A) -> QrFactors:
    """Thin QR with a non-negative diagonal on ``R``.

    Rank deficiency shows up as diagonal entries of ``R`` below
    ``1e-12 * max|A|``; see :func:`qr_rank`.
    """
    A = as_matrix(A)
    Q, R = np.linalg.qr(A, mode="reduced")
    signs = np.where(np.diag(R) < 0, -1.0, 1.0)
    return QrFactors(Q * signs, R * signs[:, None])


def qr_rank(factors: QrFactors, scale: float) -> int:
    tol = 1e-12 * scale
    return int(np.count_nonzero(np.abs(np.diag(factors.R)) > tol))


def pinv(A, rank_tol: float = DEFAULT_RANK_TOL) -> np.ndarray:
    """Moore-Penrose pseudo-inverse built on :func:`skinny_svd`."""
    f = skinny_svd(A, rank_tol)
    return (f.V / f.sigma) @ f.U.T


def column_norms(A) -> np.ndarray:
    return np.linalg.norm(np.asarray(A, dtype=float), axis=0)


def norms(A) -> dict[str, float]:
    A = as_matrix(A)
    s = np.linalg.svd(A, compute_uv=False)
    cn = column_norms(A)
    return {
        "nuclear": float(s.sum()),
        "l21": float(cn.sum()),
        "l2inf": float(cn.max()),
        "frobenius": float(np.linalg.norm(A)),
        "spectral": float(s[0]),
        "l1": float(np.abs(A).sum()),
        "linf": float(np.abs(A).max()),
    }


def nuclear_norm(A) -> float:
    return float(np.linalg.svd(np.asarray(A, dtype=float), compute_uv=False).sum())


def l21_norm(A) -> float:
    return float(column_norms(A).sum())


def svt(A, tau: float) -> np.ndarray:
    """Singular value thresholding, the prox of ``tau * ||.||_*``."""
    if tau <= 0:
        raise InputError("tau must be positive")
    A = np.asarray(A, dtype=float)
    U, s, Vt = thin_svd(A)
    s = s - tau
    k = int(np.count_nonzero(s > 0))
    return (U[:, :k] * s[:k]) @ Vt[:k]


def column_shrink(A, tau: float) -> np.ndarray:
    """Column-wise soft thresholding, the prox of ``tau * ||.||_{2,1}``."""
    if tau <= 0:
        raise InputError("tau must be positive")
    A = np.asarray(A, dtype=float)
    cn = column_norms(A)
    scale = np.zeros_like(cn)
    big = cn > tau
    scale[big] = 1.0 - tau / cn[big]
    return A * scale
