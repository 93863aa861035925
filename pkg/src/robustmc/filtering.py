"""l2,1 filtering: recover the column space from a random seed block, then
test and complete every remaining column by least squares.

The seed block is a Bernoulli(d/n) column sample solved with the full
ADMM program.  Each remaining column is regressed, on its observed
coefficients only, onto the recovered basis; a non-negligible residual
marks the column as corrupted.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field, replace

import numpy as np

from . import admm
from .basis import IDENTITY, SHARED, ColumnLocalBasis, ObservedCoefficients
from .matcore import InputError, qr, qr_rank, skinny_svd
from .metrics import support

log = logging.getLogger(__name__)

BASIS_RANK_TOL = 1e-6


@dataclass
class FilterConfig:
    rank_estimate: int | str = "auto"
    oversample_const: float = 0.12
    outlier_rel_tol: float = 1e-6
    seed: int = 0
    admm: admm.AdmmConfig = field(default_factory=admm.AdmmConfig)
    max_seed_fraction: float = 0.5

    def __post_init__(self):
        if self.oversample_const <= 0:
            raise InputError("oversample_const must be positive")
        if self.outlier_rel_tol <= 0:
            raise InputError("outlier_rel_tol must be positive")
        if self.rank_estimate != "auto" and int(self.rank_estimate) < 0:
            raise InputError("rank_estimate must be non-negative or 'auto'")


@dataclass
class FilterResult:
    U_basis: np.ndarray
    seed_columns: np.ndarray
    outlier_flags: np.ndarray
    completed: np.ndarray
    seed_solve: admm.SolveResult | None
    elapsed: float
    residuals: np.ndarray
    undetermined: np.ndarray
    rank: int

    @property
    def converged(self) -> bool:
        return self.seed_solve is None or self.seed_solve.converged

    @property
    def support(self) -> np.ndarray:
        return np.flatnonzero(self.outlier_flags)

    def column_rows(self):
        """``(index, residual, flag)`` per column, for CSV output."""
        return [(j, float(self.residuals[j]), int(self.outlier_flags[j]))
                for j in range(self.outlier_flags.size)]


@dataclass
class RankEstimate:
    rank: int
    status: str  # "accepted" or "low-rank assumption violated"
    trials: list = field(default_factory=list)

    @property
    def accepted(self) -> bool:
        return self.status == "accepted"


def seed_size(n: int, r: int, oversample_const: float, max_fraction: float = 0.5) -> float:
    """Expected seed size ``d = C r (ln n)^3``, capped at ``max_fraction * n``."""
    d = oversample_const * max(r, 1) * math.log(max(n, 2)) ** 3
    return float(min(max(d, 1.0), max_fraction * n))


def sample_seed_columns(n: int, d: float, rng: np.random.Generator) -> np.ndarray:
    """Columns kept independently with probability ``d/n``; resampled if empty."""
    if not 0 < d <= n:
        raise InputError(f"seed size d={d} outside (0, {n}]")
    p = d / n
    while True:
        cols = np.flatnonzero(rng.random(n) < p)
        if cols.size:
            return cols


def solve_seed(observed: ObservedCoefficients, basis: ColumnLocalBasis,
               config: admm.AdmmConfig | None = None):
    """Solve the seed block; returns ``(SolveResult, U_basis)``.

    The regularizer defaults to ``1/sqrt(ln k)`` with ``k`` the block width.
    """
    config = config or admm.AdmmConfig()
    k = observed.shape[1]
    if config.lam is None:
        config = replace(config, lam=admm.default_lambda(k))
    res = admm.solve(observed, basis, config)
    U = skinny_svd(res.L_star, BASIS_RANK_TOL).U if np.any(res.L_star) else \
        np.zeros((observed.shape[0], 0))
    return res, U


def filter_column(y, basis_rows, rel_tol: float = 1e-6):
    """Least-squares test of one column against the recovered space.

    ``y`` holds the observed coefficients of the column and ``basis_rows``
    the matching rows of the (transformed) basis.  Returns
    ``(residual_norm, coefficients, determined)``; ``determined`` is false
    when the observed rows do not have full column rank.
    """
    y = np.asarray(y, dtype=float)
    A = np.asarray(basis_rows, dtype=float)
    r = A.shape[1]
    if r == 0:
        return float(np.linalg.norm(y)), np.zeros(0), True
    if y.size < r:
        q, *_ = np.linalg.lstsq(A, y, rcond=None)
        return float(np.linalg.norm(y - A @ q)), q, False
    f = qr(A)
    if qr_rank(f, max(np.abs(A).max(), 1e-300)) < r or \
            np.min(np.abs(np.diag(f.R))) <= rel_tol * np.max(np.abs(np.diag(f.R))):
        q, *_ = np.linalg.lstsq(A, y, rcond=None)
        return float(np.linalg.norm(y - A @ q)), q, False
    proj = f.Q.T @ y
    residual = float(np.linalg.norm(y - f.Q @ proj))
    q = np.linalg.solve(f.R, proj)
    return residual, q, True


def _transformed_basis(U: np.ndarray, basis: ColumnLocalBasis, j: int, cache: dict):
    if basis.kind == IDENTITY:
        return U
    if basis.kind == SHARED:
        if "shared" not in cache:
            cache["shared"] = basis.transform.T @ U
        return cache["shared"]
    return basis.transform[j].T @ U


def run(observed: ObservedCoefficients, basis: ColumnLocalBasis,
        config: FilterConfig | None = None) -> FilterResult:
    """Seed solve followed by per-column filtering of the remaining columns."""
    config = config or FilterConfig()
    if observed.shape != basis.shape:
        raise InputError("observation and basis shapes differ")
    m, n = observed.shape
    t0 = time.perf_counter()
    rng = np.random.default_rng(config.seed)

    if config.rank_estimate == "auto":
        est = estimate_rank(observed, basis, config, rng=rng)
        if not est.accepted:
            log.warning("rank estimation aborted; filtering with rank %d", est.rank)
        r = est.rank
        # reuse the accepted trial's seed block
        seed_cols, seed_res, U = est.trials[-1][1:4] if est.trials else (None, None, None)
    else:
        r = int(config.rank_estimate)
        seed_cols = None

    if seed_cols is None:
        d = seed_size(n, r, config.oversample_const, config.max_seed_fraction)
        seed_cols = sample_seed_columns(n, d, rng)
        seed_res, U = solve_seed(observed.restrict(seed_cols), basis.restrict(seed_cols),
                                 config.admm)

    flags = np.zeros(n, dtype=bool)
    residuals = np.zeros(n)
    undetermined = np.zeros(n, dtype=bool)
    completed = np.zeros((m, n))

    seed_flags = np.zeros(seed_cols.size, dtype=bool)
    seed_flags[support(seed_res.S_star)] = True
    flags[seed_cols] = seed_flags
    residuals[seed_cols] = np.linalg.norm(seed_res.S_star, axis=0)
    completed[:, seed_cols] = np.where(seed_flags, 0.0, seed_res.L_star)

    is_seed = np.zeros(n, dtype=bool)
    is_seed[seed_cols] = True
    cache: dict = {}
    for j in np.flatnonzero(~is_seed):
        rows = observed.mask[:, j]
        y = observed.values[rows, j]
        W = _transformed_basis(U, basis, j, cache)
        res_norm, q, determined = filter_column(y, W[rows], config.outlier_rel_tol)
        residuals[j] = res_norm
        undetermined[j] = not determined
        if res_norm > config.outlier_rel_tol * max(1.0, float(np.linalg.norm(y))):
            flags[j] = True
        elif U.shape[1]:
            completed[:, j] = U @ q

    return FilterResult(U, seed_cols, flags, completed, seed_res,
                        time.perf_counter() - t0, residuals, undetermined, U.shape[1])


def estimate_rank(observed: ObservedCoefficients, basis: ColumnLocalBasis,
                  config: FilterConfig | None = None, r0: int = 1,
                  rng: np.random.Generator | None = None) -> RankEstimate:
    """Grow a trial rank until the seed solve's rank fits within it.

    A trial with target ``r`` samples ``d = C r (ln n)^3`` expected columns
    and is accepted when ``d / rank(L_l) >= C (ln n)^3``, i.e. when the
    recovered rank does not exceed ``r``.  Otherwise ``r`` grows to
    ``max(r + 1, ceil(1.5 r))``; once ``d / n`` would reach the seed
    fraction limit the search gives up.
    """
    config = config or FilterConfig()
    rng = rng if rng is not None else np.random.default_rng(config.seed)
    n = observed.shape[1]
    polylog = math.log(max(n, 2)) ** 3
    r = max(int(r0), 1)
    trials = []
    while True:
        d = config.oversample_const * r * polylog
        if d / n >= config.max_seed_fraction:
            return RankEstimate(trials[-1][4] if trials else r,
                                "low-rank assumption violated", trials)
        cols = sample_seed_columns(n, d, rng)
        res, U = solve_seed(observed.restrict(cols), basis.restrict(cols), config.admm)
        rank = U.shape[1]
        trials.append((r, cols, res, U, rank))
        if rank == 0 or d / rank >= config.oversample_const * polylog:
            return RankEstimate(rank, "accepted", trials)
        r = max(r + 1, math.ceil(1.5 * r))
