"""Reference computations written independently of the package code.

These use plain numpy/scipy only, so a bug in a package kernel cannot
also hide in the check.
"""

import numpy as np
from scipy.optimize import minimize_scalar


def group_prox_line_search(a, tau):
    """argmin_s tau||s|| + 0.5||s - a||^2 by bounded 1-D search along a.

    The minimizer is parallel to ``a``, so only its length ``t`` in
    ``[0, ||a||]`` needs searching.
    """
    na = np.linalg.norm(a)
    if na == 0:
        return np.zeros_like(a)
    res = minimize_scalar(lambda t: tau * t + 0.5 * (t - na) ** 2, bounds=(0.0, na),
                          method="bounded", options={"xatol": 1e-12})
    return res.x * a / na


def nuclear_prox_optimality(A, X, tau, rank_tol=1e-9):
    """Residual of ``(A - X)/tau`` as a subgradient of the nuclear norm at ``X``.

    ``G`` is a subgradient at ``X = U S V^T`` iff ``U^T G V = I``,
    ``U^T G (I - VV^T) = 0``, ``(I - UU^T) G V = 0`` and the rest has
    spectral norm at most one.
    """
    G = (A - X) / tau
    U, s, Vt = np.linalg.svd(X)
    k = int(np.sum(s > rank_tol * max(s[0], 1e-300))) if s.size and s[0] > 0 else 0
    U1, U2 = U[:, :k], U[:, k:]
    V1, V2 = Vt[:k].T, Vt[k:].T
    errs = [np.abs(U1.T @ G @ V1 - np.eye(k)).max() if k else 0.0,
            np.abs(U1.T @ G @ V2).max() if k and V2.size else 0.0,
            np.abs(U2.T @ G @ V1).max() if k and U2.size else 0.0]
    rest = U2.T @ G @ V2
    if rest.size:
        errs.append(max(0.0, np.linalg.norm(rest, 2) - 1.0))
    return float(max(errs))


def _svt(A, tau):
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    return (U * np.maximum(s - tau, 0.0)) @ Vt


def _col_shrink(A, tau):
    n = np.linalg.norm(A, axis=0)
    f = np.where(n > tau, 1.0 - tau / np.where(n > 0, n, 1.0), 0.0)
    return A * f


def objective(L, S, lam):
    return np.linalg.svd(L, compute_uv=False).sum() + lam * np.linalg.norm(S, axis=0).sum()


def robust_pca_objective(M, lam, iters=100_000, step=1.0):
    """Optimal value of ``min ||L||_* + lam ||M - L||_{2,1}`` by proximal splitting.

    Neither term is smooth, so the proximal iteration is the
    Douglas-Rachford form: alternate the two proximal maps on a reflected
    sequence.  Returns the objective of the final ``L`` iterate.
    """
    M = np.asarray(M, dtype=float)
    z = np.zeros_like(M)
    for _ in range(iters):
        x = _svt(z, step)
        # prox of lam||M - .||_{2,1}: shift to M, shrink, shift back
        y = M - _col_shrink(M - (2 * x - z), step * lam)
        z = z + y - x
    L = _svt(z, step)
    return objective(L, M - L, lam)


def dct2_closed_form(m):
    """Orthonormal type-II cosine transform from its textbook formula (atoms as rows)."""
    k = np.arange(m)[:, None]
    i = np.arange(m)[None, :]
    C = np.sqrt(2.0 / m) * np.cos(np.pi * (2 * i + 1) * k / (2 * m))
    C[0] /= np.sqrt(2.0)
    return C
