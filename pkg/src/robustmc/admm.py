"""Inexact augmented-Lagrangian solver for nuclear + l2,1 robust completion.

Solves::

    min ||L||_* + lam ||S||_{2,1}   s.t.   R(L + S) = R(M)

with a consensus variable ``D`` constrained to the affine set
``{X : R(X) = R(M)}``.  One sweep is::

    L <- svt_{1/beta}(D - S - Lam/beta)
    S <- column_shrink_{lam/beta}(D - L - Lam/beta)
    D <- L + S + Lam/beta, observed coefficients overwritten by R(M)
    Lam <- Lam + beta (L + S - D)

The penalty ``beta`` follows residual balancing: it grows by
``beta_growth`` (up to ``beta_max``) while the primal residual dominates
the dual one by more than ``balance``, and shrinks in the opposite case.
Setting ``balance=0`` gives the plain monotone schedule.  The run stops
once both residuals are below tolerance.

The multiplier only ever lives on observed coefficients, so it is stored
in coefficient space.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .basis import ColumnLocalBasis, ObservedCoefficients, analyze, synthesize
from .matcore import InputError, column_norms, column_shrink, skinny_svd, thin_svd

log = logging.getLogger(__name__)


def default_lambda(n: int) -> float:
    """``1 / sqrt(ln n)`` with the log clamped below at 1, so the result is <= 1."""
    if n < 1:
        raise InputError("n must be >= 1")
    return 1.0 / math.sqrt(max(math.log(n), 1.0))


@dataclass
class AdmmConfig:
    lam: float | None = None
    beta0: float | None = None
    beta_growth: float = 1.5
    beta_max: float = 1e10
    max_iter: int = 1000
    tol: float = 1e-8
    dual_tol: float | None = None
    balance: float = 3.0
    rank_tol: float = 1e-10

    def __post_init__(self):
        if self.lam is not None and self.lam <= 0:
            raise InputError("lambda must be positive")
        if self.beta0 is not None and self.beta0 <= 0:
            raise InputError("beta0 must be positive")
        if self.beta_growth < 1:
            raise InputError("beta_growth must be >= 1")
        if self.beta_max <= 0 or self.max_iter < 1 or self.tol <= 0:
            raise InputError("beta_max, max_iter and tol must be positive")


@dataclass
class SolveResult:
    L_star: np.ndarray
    S_star: np.ndarray
    iterations: int
    feasibility_history: list[float]
    converged: bool
    objective_history: list[float] = field(default_factory=list)
    multiplier: np.ndarray | None = None
    lam: float = 0.0
    dual_history: list[float] = field(default_factory=list)

    @property
    def objective(self) -> float:
        return self.objective_history[-1] if self.objective_history else 0.0

    def telemetry_rows(self):
        """``(iter, residual, objective)`` tuples, 1-based."""
        return [(k + 1, r, o) for k, (r, o) in
                enumerate(zip(self.feasibility_history, self.objective_history))]


def lam_scale(lam_c):
    return max(1.0, float(np.linalg.norm(lam_c)))


def _svt_with_norm(A: np.ndarray, tau: float):
    U, s, Vt = thin_svd(A)
    s = s - tau
    k = int(np.count_nonzero(s > 0))
    return (U[:, :k] * s[:k]) @ Vt[:k], float(s[:k].sum())


def solve(observed: ObservedCoefficients, basis: ColumnLocalBasis,
          config: AdmmConfig | None = None) -> SolveResult:
    """Run the solver on observed coefficients of ``M`` in ``basis``.

    Non-convergence within ``max_iter`` is reported through
    ``SolveResult.converged``; it is not an error.
    """
    config = config or AdmmConfig()
    if observed.shape != basis.shape:
        raise InputError(f"observation shape {observed.shape} does not match basis {basis.shape}")
    if observed.count == 0:
        raise InputError("no observed coefficients")
    m, n = observed.shape
    lam = config.lam if config.lam is not None else default_lambda(n)
    mask = observed.mask
    vals = observed.values

    RM = synthesize(vals, basis)
    norm_RM = float(np.linalg.norm(vals))
    scale = max(1.0, norm_RM)
    L = np.zeros((m, n))
    S = np.zeros((m, n))
    lam_c = np.zeros((m, n))  # multiplier, coefficient space
    if config.beta0 is not None:
        beta = config.beta0
    else:
        sigma1 = np.linalg.norm(RM, 2)
        beta = 1.25 / sigma1 if sigma1 > 0 else 1.0

    history: list[float] = []
    dual_history: list[float] = []
    dual_tol = config.dual_tol if config.dual_tol is not None else config.tol
    objectives: list[float] = []
    converged = False
    it = 0
    dual = np.inf
    D_c = vals.copy()
    C_s = np.zeros((m, n))
    # D - Lam/beta, kept in matrix space
    target = RM.copy()
    for it in range(1, config.max_iter + 1):
        L, nuc = _svt_with_norm(target - S, 1.0 / beta)
        S = column_shrink(target - L, lam / beta)
        C_s_prev, D_c_prev = C_s, D_c
        C_s = analyze(S, basis)
        C_ls = analyze(L, basis) + C_s
        resid = np.where(mask, C_ls - vals, 0.0)
        lam_c += beta * resid
        # Lam vanishes off K_obs, so there D = L + S
        D_c = np.where(mask, vals, C_ls)
        dD = D_c - D_c_prev
        dual = beta * max(float(np.linalg.norm(C_s - C_s_prev - dD)),
                          float(np.linalg.norm(dD)))
        feas = float(np.linalg.norm(resid)) / scale
        history.append(feas)
        dual_history.append(dual)
        objectives.append(nuc + lam * float(column_norms(S).sum()))
        if feas <= config.tol and dual <= dual_tol:
            converged = True
            break
        if config.balance and feas > config.balance * dual / lam_scale(lam_c):
            beta = min(beta * config.beta_growth, config.beta_max)
        elif config.balance and dual / lam_scale(lam_c) > config.balance * feas:
            beta = beta / config.beta_growth
        elif not config.balance:
            beta = min(beta * config.beta_growth, config.beta_max)
        target = synthesize(D_c - lam_c / beta, basis)

    if not converged:
        log.warning("ADMM stopped after %d iterations: primal %.3e, dual %.3e",
                    it, history[-1], dual)
    return SolveResult(L, S, it, history, converged, objectives,
                       multiplier=synthesize(lam_c, basis), lam=lam,
                       dual_history=dual_history)


def solve_standard_rpca(M, lam: float | None = None,
                        config: AdmmConfig | None = None) -> SolveResult:
    """Outlier pursuit on a fully observed matrix in the standard basis."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        raise InputError("M is empty")
    config = config or AdmmConfig()
    if lam is not None:
        config = AdmmConfig(**{**config.__dict__, "lam": lam})
    m, n = M.shape
    obs = ObservedCoefficients(np.ones((m, n), dtype=bool), M)
    return solve(obs, ColumnLocalBasis.identity(m, n), config)


def objective(L, S, lam: float) -> float:
    return float(np.linalg.svd(L, compute_uv=False).sum() + lam * column_norms(S).sum())


def nuclear_subgradient_residual(L, G, rank_tol: float = 1e-8) -> float:
    """Distance-like measure of ``G`` from the subdifferential of ``||.||_*`` at ``L``.

    ``G`` is a subgradient iff ``P_T(G) = U V^T`` and ``||P_T_perp(G)||_2 <= 1``.
    """
    f = skinny_svd(L, rank_tol)
    U, V = f.U, f.V
    PU_G = U @ (U.T @ G)
    PT_G = PU_G + (G - PU_G) @ V @ V.T
    r1 = np.linalg.norm(PT_G - U @ V.T)
    rest = G - PT_G
    r2 = max(0.0, np.linalg.norm(rest, 2) - 1.0) if rest.size else 0.0
    return float(max(r1, r2))


def l21_subgradient_residual(S, G, lam: float, zero_tol: float = 0.0) -> float:
    """Same for ``lam * ||.||_{2,1}``, evaluated column by column."""
    S = np.asarray(S, dtype=float)
    G = np.asarray(G, dtype=float)
    sn = column_norms(S)
    gn = column_norms(G)
    worst = 0.0
    for j in range(S.shape[1]):
        if sn[j] > zero_tol:
            worst = max(worst, float(np.linalg.norm(G[:, j] - lam * S[:, j] / sn[j])))
        else:
            worst = max(worst, gn[j] - lam)
    return worst


def stationarity(result: SolveResult, rank_tol: float = 1e-8) -> tuple[float, float]:
    """Residuals of ``0 in d||L*||_* + Lam`` and ``0 in lam d||S*||_{2,1} + Lam``."""
    G = -result.multiplier
    return (nuclear_subgradient_residual(result.L_star, G, rank_tol),
            l21_subgradient_residual(result.S_star, G, result.lam))
