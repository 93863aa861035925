"""Seeded synthetic problem generators.

All randomness flows through a ``numpy.random.Generator`` built from the
problem seed, so a spec and seed determine the problem bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .basis import ColumnLocalBasis, ObservedCoefficients, make_basis
from .matcore import InputError


@dataclass(frozen=True)
class SyntheticSpec:
    m: int
    n: int
    r: int
    a: float = 0.1
    p0: float = 0.8
    noise_variance: float = 1.0
    basis: str = "identity"
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise InputError("m and n must be positive")
        if not 0 <= self.r <= min(self.m, self.n):
            raise InputError(f"rank {self.r} outside [0, {min(self.m, self.n)}]")
        if not 0 <= self.a <= 1:
            raise InputError("outlier probability a must lie in [0, 1]")
        if not 0 <= self.p0 <= 1:
            raise InputError("observation probability p0 must lie in [0, 1]")
        if self.noise_variance <= 0:
            raise InputError("noise_variance must be positive")

    @classmethod
    def standard(cls, n: int, seed: int = 0, **kw) -> "SyntheticSpec":
        """Square problem with ``r = 0.05 n``, ``a = 0.1``, ``p0 = 0.8``."""
        params = dict(m=n, n=n, r=max(1, round(0.05 * n)), a=0.1, p0=0.8, seed=seed)
        params.update(kw)
        return cls(**params)


@dataclass(frozen=True)
class SyntheticProblem:
    L0: np.ndarray
    S0: np.ndarray
    outlier_support: np.ndarray
    observed: ObservedCoefficients
    basis: ColumnLocalBasis
    spec: SyntheticSpec | None = None
    labels: np.ndarray | None = field(default=None, repr=False)
    basis_seed: int | None = None

    @property
    def M(self) -> np.ndarray:
        return self.L0 + self.S0

    @property
    def shape(self) -> tuple[int, int]:
        return self.L0.shape


def rng_for(seed: int) -> np.random.Generator:
    return np.random.default_rng(seed)


def gen_lowrank(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    """``X Y^T`` with i.i.d. standard normal ``m x r`` and ``n x r`` factors."""
    X = rng.standard_normal((spec.m, spec.r))
    Y = rng.standard_normal((spec.n, spec.r))
    return X @ Y.T


def bernoulli_columns(n: int, p: float, rng: np.random.Generator) -> np.ndarray:
    """Sorted indices of columns selected independently with probability ``p``."""
    return np.flatnonzero(rng.random(n) < p)


def gen_outliers(spec: SyntheticSpec, rng: np.random.Generator):
    """Column-sparse Gaussian corruption; returns ``(S0, I0)``."""
    I0 = bernoulli_columns(spec.n, spec.a, rng)
    S0 = np.zeros((spec.m, spec.n))
    S0[:, I0] = np.sqrt(spec.noise_variance) * rng.standard_normal((spec.m, I0.size))
    return S0, I0


def gen_mask(spec: SyntheticSpec, rng: np.random.Generator) -> np.ndarray:
    """Boolean ``m x n`` mask, each coefficient kept with probability ``p0``."""
    return rng.random((spec.m, spec.n)) < spec.p0


def assemble(L0, S0, I0, mask, basis, spec=None, labels=None) -> SyntheticProblem:
    L0 = np.array(L0, dtype=float)
    # the clean part carries no energy on corrupted columns
    L0[:, I0] = 0.0
    observed = ObservedCoefficients.from_matrix(L0 + S0, mask, basis)
    return SyntheticProblem(L0, S0, np.asarray(I0, dtype=int), observed, basis, spec, labels)


def generate(spec: SyntheticSpec) -> SyntheticProblem:
    """Full problem instance for ``spec``; deterministic per ``spec.seed``."""
    rng = rng_for(spec.seed)
    L0 = gen_lowrank(spec, rng)
    S0, I0 = gen_outliers(spec, rng)
    mask = gen_mask(spec, rng)
    basis_seed = int(rng.integers(2**63))
    basis = make_basis(spec.basis, spec.m, spec.n, seed=basis_seed)
    return replace(assemble(L0, S0, I0, mask, basis, spec), basis_seed=basis_seed)


def gen_adversarial_row_spike(n: int, r: int, a: float, spike: float | None = None,
                              rng: np.random.Generator | None = None,
                              seed: int = 0) -> SyntheticProblem:
    """Incoherent ``L0`` with outliers that are a single spike in row 0.

    Every corrupted column is ``spike * e_1``; observation is complete.
    """
    if n < 1 or r < 1:
        raise InputError("n and r must be positive")
    if rng is None:
        rng = rng_for(seed)
    spike = float(n if spike is None else spike)
    spec = SyntheticSpec(m=n, n=n, r=r, a=a, p0=1.0, seed=seed)
    L0 = gen_lowrank(spec, rng)
    I0 = bernoulli_columns(n, a, rng)
    S0 = np.zeros((n, n))
    S0[0, I0] = spike
    mask = np.ones((n, n), dtype=bool)
    return assemble(L0, S0, I0, mask, ColumnLocalBasis.identity(n, n), spec)


def gen_union_of_subspaces(m: int, dims, points_per_subspace: int, a: float = 0.0,
                           p0: float = 1.0, rng: np.random.Generator | None = None,
                           seed: int = 0, noise_variance: float = 1.0,
                           basis: str = "identity"):
    """Columns drawn from independent random subspaces, plus outliers and a mask.

    Returns ``(problem, labels)``; ``labels[j]`` is the subspace that
    column ``j`` was drawn from (outlier columns keep their label but carry
    no clean signal).
    """
    dims = [int(d) for d in dims]
    if sum(dims) > m:
        raise InputError(f"total subspace dimension {sum(dims)} exceeds ambient {m}")
    if rng is None:
        rng = rng_for(seed)
    n = points_per_subspace * len(dims)
    spec = SyntheticSpec(m=m, n=n, r=sum(dims), a=a, p0=p0,
                         noise_variance=noise_variance, basis=basis, seed=seed)
    Q, _ = np.linalg.qr(rng.standard_normal((m, sum(dims))))
    blocks, labels, start = [], [], 0
    for k, d in enumerate(dims):
        Uk = Q[:, start:start + d]
        start += d
        blocks.append(Uk @ rng.standard_normal((d, points_per_subspace)))
        labels.extend([k] * points_per_subspace)
    L0 = np.hstack(blocks)
    labels = np.asarray(labels)
    S0, I0 = gen_outliers(spec, rng)
    mask = gen_mask(spec, rng)
    basis_seed = int(rng.integers(2**63))
    B = make_basis(basis, m, n, seed=basis_seed)
    problem = replace(assemble(L0, S0, I0, mask, B, spec, labels), basis_seed=basis_seed)
    return problem, labels


def with_noise_variance(spec: SyntheticSpec, variance: float) -> SyntheticSpec:
    return replace(spec, noise_variance=variance)
