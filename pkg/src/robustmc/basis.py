"""Column-local orthonormal bases and the observation projector.

A basis element ``omega_ij`` is ``q_j^(i) e_j^T``: column ``i`` of an
orthonormal ``m x m`` transform ``Q_j``, placed in column ``j``.  Any
orthonormal family whose elements for a fixed ``j`` span the matrices
supported on column ``j`` has this form, so storing one transform per
column (or one shared transform, or none) covers the general case.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.fft import dct

from .matcore import InputError

IDENTITY = "identity"
SHARED = "shared"
PER_COLUMN = "per_column"


@dataclass(frozen=True)
class ColumnLocalBasis:
    kind: str
    m: int
    n: int
    transform: np.ndarray | None = field(default=None, repr=False)

    def __post_init__(self):
        if self.kind == IDENTITY:
            return
        T = self.transform
        if self.kind == SHARED:
            if T is None or T.shape != (self.m, self.m):
                raise InputError(f"shared transform must be {self.m}x{self.m}")
            err = np.linalg.norm(T.T @ T - np.eye(self.m))
        elif self.kind == PER_COLUMN:
            if T is None or T.shape != (self.n, self.m, self.m):
                raise InputError(f"per-column transforms must be {self.n}x{self.m}x{self.m}")
            gram = np.einsum("jki,jkl->jil", T, T)
            err = np.abs(gram - np.eye(self.m)).max()
        else:
            raise InputError(f"unknown basis kind {self.kind!r}")
        if err > 1e-10:
            raise InputError(f"transform is not orthonormal (residual {err:.2e})")

    @classmethod
    def identity(cls, m: int, n: int) -> "ColumnLocalBasis":
        return cls(IDENTITY, m, n)

    @classmethod
    def shared(cls, G, n: int) -> "ColumnLocalBasis":
        G = np.asarray(G, dtype=float)
        return cls(SHARED, G.shape[0], n, G)

    @classmethod
    def per_column(cls, Qs) -> "ColumnLocalBasis":
        Qs = np.asarray(Qs, dtype=float)
        return cls(PER_COLUMN, Qs.shape[1], Qs.shape[0], Qs)

    @property
    def shape(self) -> tuple[int, int]:
        return (self.m, self.n)

    def restrict(self, columns) -> "ColumnLocalBasis":
        """Basis for the submatrix made of ``columns`` (in the given order)."""
        columns = np.asarray(columns, dtype=int)
        if self.kind == IDENTITY:
            return ColumnLocalBasis.identity(self.m, columns.size)
        if self.kind == SHARED:
            return ColumnLocalBasis(SHARED, self.m, columns.size, self.transform)
        return ColumnLocalBasis(PER_COLUMN, self.m, columns.size, self.transform[columns])

    def column_transform(self, j: int) -> np.ndarray:
        if self.kind == IDENTITY:
            return np.eye(self.m)
        if self.kind == SHARED:
            return self.transform
        return self.transform[j]

    def element(self, i: int, j: int) -> np.ndarray:
        """The ``m x n`` basis matrix ``omega_ij``."""
        W = np.zeros((self.m, self.n))
        W[:, j] = self.column_transform(j)[:, i]
        return W

    def _check(self, X, name):
        X = np.asarray(X, dtype=float)
        if X.shape != self.shape:
            raise InputError(f"{name} has shape {X.shape}, basis expects {self.shape}")
        return X


def analyze(X, basis: ColumnLocalBasis) -> np.ndarray:
    """Coefficients ``C_ij = <X, omega_ij> = (Q_j^T X_:j)_i``."""
    X = basis._check(X, "X")
    if basis.kind == IDENTITY:
        return X.copy()
    if basis.kind == SHARED:
        return basis.transform.T @ X
    return np.einsum("jki,kj->ij", basis.transform, X)


def synthesize(C, basis: ColumnLocalBasis) -> np.ndarray:
    """Inverse of :func:`analyze`: ``X_:j = Q_j C_:j``."""
    C = basis._check(C, "C")
    if basis.kind == IDENTITY:
        return C.copy()
    if basis.kind == SHARED:
        return basis.transform @ C
    return np.einsum("jik,kj->ij", basis.transform, C)


@dataclass(frozen=True)
class ObservedCoefficients:
    """Observed coefficient set ``K_obs`` with values ``<M, omega_ij>``.

    ``mask`` is a boolean ``m x n`` array; ``values`` holds the observed
    coefficients at masked positions and zeros elsewhere.
    """

    mask: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        values = np.asarray(self.values, dtype=float)
        if mask.ndim != 2 or mask.shape != values.shape:
            raise InputError("mask and values must be matching 2-D arrays")
        if not np.all(np.isfinite(values)):
            raise InputError("observed values must be finite")
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "values", np.where(mask, values, 0.0))

    @classmethod
    def from_matrix(cls, M, mask, basis: ColumnLocalBasis) -> "ObservedCoefficients":
        mask = np.asarray(mask, dtype=bool)
        return cls(mask, np.where(mask, analyze(M, basis), 0.0))

    @classmethod
    def from_triples(cls, triples, shape) -> "ObservedCoefficients":
        """Build from an iterable of ``(i, j, value)``; duplicates are rejected."""
        mask = np.zeros(shape, dtype=bool)
        values = np.zeros(shape)
        for i, j, v in triples:
            i, j = int(i), int(j)
            if not (0 <= i < shape[0] and 0 <= j < shape[1]):
                raise InputError(f"index ({i}, {j}) out of range for shape {shape}")
            if mask[i, j]:
                raise InputError(f"duplicate index ({i}, {j})")
            mask[i, j] = True
            values[i, j] = v
        return cls(mask, values)

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape

    @property
    def count(self) -> int:
        return int(self.mask.sum())

    def triples(self):
        ii, jj = np.nonzero(self.mask)
        return [(int(i), int(j), float(self.values[i, j])) for i, j in zip(ii, jj)]

    def restrict(self, columns) -> "ObservedCoefficients":
        columns = np.asarray(columns, dtype=int)
        return ObservedCoefficients(self.mask[:, columns], self.values[:, columns])


def project_observed(X, obs: ObservedCoefficients, basis: ColumnLocalBasis) -> np.ndarray:
    """Orthogonal projection onto the span of the observed basis elements."""
    return synthesize(np.where(obs.mask, analyze(X, basis), 0.0), basis)


def observed_matrix(obs: ObservedCoefficients, basis: ColumnLocalBasis) -> np.ndarray:
    """``R(M)`` as a matrix: the observed coefficients synthesized."""
    return synthesize(obs.values, basis)


def random_orthonormal(m: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed orthonormal matrix via QR of a Gaussian matrix."""
    if m < 1:
        raise InputError("m must be >= 1")
    Q, R = np.linalg.qr(rng.standard_normal((m, m)))
    return Q * np.where(np.diag(R) < 0, -1.0, 1.0)


def dct_transform(m: int) -> np.ndarray:
    """Orthonormal type-II DCT matrix; ``dct_transform(m) @ x`` is the DCT of ``x``.

    Its rows are the cosine atoms.
    """
    if m < 1:
        raise InputError("m must be >= 1")
    return dct(np.eye(m), type=2, norm="ortho", axis=0)


def make_basis(kind: str, m: int, n: int, seed: int | None = None) -> ColumnLocalBasis:
    """Construct a basis from a descriptor: identity, dct, random or random_per_column."""
    if kind == "identity":
        return ColumnLocalBasis.identity(m, n)
    if kind == "dct":
        # columns of the synthesis matrix are the cosine atoms
        return ColumnLocalBasis.shared(dct_transform(m).T, n)
    rng = np.random.default_rng(seed)
    if kind == "random":
        return ColumnLocalBasis.shared(random_orthonormal(m, rng), n)
    if kind == "random_per_column":
        return ColumnLocalBasis.per_column(np.stack([random_orthonormal(m, rng) for _ in range(n)]))
    raise InputError(f"unknown basis kind {kind!r}")
