"""Experiment drivers shared by the command line and the acceptance suite.

Each driver returns plain rows (dicts) so results can be written as CSV
or asserted on directly.  Trials are independent and keyed by their
position, so running them in a process pool yields the same table as a
serial run.
"""

from __future__ import annotations

import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import replace

import numpy as np

from . import admm, cluster, filtering, synth
from .metrics import clustering_accuracy, column_space, subspace_distance, support, support_hamming

SUCCESS_DIST = 1e-6


def trial_seed(base: int, *key: int) -> int:
    """Independent 63-bit seed for a trial identified by ``key``."""
    return int(np.random.SeedSequence([int(base), *map(int, key)]).generate_state(1, np.uint64)[0]
               >> np.uint64(1))


def recovery(problem: synth.SyntheticProblem, U_star, support_star) -> tuple[float, int]:
    """Subspace distance to ``Range(L0)`` and support Hamming distance.

    Columns without a single observed coefficient are left out of the
    support comparison since nothing about them is identifiable.
    """
    dist = subspace_distance(U_star, column_space(problem.L0))
    seen = problem.observed.mask.any(axis=0)
    est = [j for j in support_star if seen[j]]
    truth = [j for j in problem.outlier_support if seen[j]]
    return dist, support_hamming(est, truth, problem.shape[1])


def is_success(dist: float, hamming: int) -> bool:
    return hamming == 0 and dist < SUCCESS_DIST


def pmap(fn, items, threads: int = 1):
    items = list(items)
    if threads <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def solve_problem(problem: synth.SyntheticProblem, config: admm.AdmmConfig | None = None,
                  trial: int = 0) -> tuple[dict, admm.SolveResult]:
    t0 = time.perf_counter()
    res = admm.solve(problem.observed, problem.basis, config)
    seconds = time.perf_counter() - t0
    dist, ham = recovery(problem, column_space(res.L_star), support(res.S_star))
    row = {"n": problem.shape[1], "trial": trial, "dist": dist, "hamming": ham,
           "seconds": seconds, "iters": res.iterations, "converged": int(res.converged)}
    return row, res


def _solve_spec(args):
    spec, config, trial = args
    return solve_problem(synth.generate(spec), config, trial)[0]


def solve_trials(spec: synth.SyntheticSpec, trials: int, config: admm.AdmmConfig | None = None,
                 threads: int = 1) -> list[dict]:
    """``trials`` independent instances of ``spec``; trial ``t`` uses seed ``spec.seed + t``."""
    jobs = [(replace(spec, seed=spec.seed + t), config, t) for t in range(trials)]
    return pmap(_solve_spec, jobs, threads)


def filter_problem(problem: synth.SyntheticProblem, config: filtering.FilterConfig,
                   compare: bool = True, admm_config: admm.AdmmConfig | None = None) -> dict:
    """Filtering (and optionally the full solve) on one instance, with timings."""
    spec = problem.spec
    row = {"n": problem.shape[1], "r": spec.r if spec else "", "p0": spec.p0 if spec else "",
           "a": spec.a if spec else "", "seed": spec.seed if spec else ""}
    fr = filtering.run(problem.observed, problem.basis, config)
    dist, ham = recovery(problem, fr.U_basis, fr.support)
    row.update(filter_seconds=fr.elapsed, filter_dist=dist, filter_hamming=ham,
               seed_columns=fr.seed_columns.size, rank=fr.rank)
    if compare:
        arow, _ = solve_problem(problem, admm_config)
        row.update(admm_seconds=arow["seconds"], admm_dist=arow["dist"],
                   admm_hamming=arow["hamming"],
                   speedup=arow["seconds"] / max(fr.elapsed, 1e-12))
    return row


def _phase_cell(args):
    n, r, a, p0, seed, config = args
    spec = synth.SyntheticSpec(m=n, n=n, r=r, a=a, p0=p0, seed=seed)
    row, _ = solve_problem(synth.generate(spec), config)
    return int(is_success(row["dist"], row["hamming"]))


def phase_grid(n: int, rank_fracs, outlier_fracs, p0: float, trials: int, seed: int = 0,
               config: admm.AdmmConfig | None = None, threads: int = 1) -> np.ndarray:
    """Success counts; rows follow ``rank_fracs``, columns ``outlier_fracs``."""
    rank_fracs = list(rank_fracs)
    outlier_fracs = list(outlier_fracs)
    jobs, keys = [], []
    for i, rf in enumerate(rank_fracs):
        for j, a in enumerate(outlier_fracs):
            r = int(round(rf * n))
            for t in range(trials):
                keys.append((i, j))
                jobs.append((n, r, float(a), p0, trial_seed(seed, i, j, t, int(p0 * 1000)), config))
    grid = np.zeros((len(rank_fracs), len(outlier_fracs)), dtype=int)
    for (i, j), ok in zip(keys, pmap(_phase_cell, jobs, threads)):
        grid[i, j] += ok
    return grid


def monotonicity_violations(grid) -> list[tuple]:
    """Adjacent pairs where success increases along either axis.

    Returns ``(axis, i, j, increase)`` tuples; axis 0 compares row ``i`` to
    ``i+1`` at column ``j``, axis 1 compares column ``j`` to ``j+1``.
    """
    g = np.asarray(grid)
    out = []
    for i in range(g.shape[0] - 1):
        for j in range(g.shape[1]):
            if g[i + 1, j] > g[i, j]:
                out.append((0, i, j, int(g[i + 1, j] - g[i, j])))
    for i in range(g.shape[0]):
        for j in range(g.shape[1] - 1):
            if g[i, j + 1] > g[i, j]:
                out.append((1, i, j, int(g[i, j + 1] - g[i, j])))
    return out


def grid_to_pgm(grid, trials: int) -> np.ndarray:
    return np.rint(np.asarray(grid) * 255.0 / max(trials, 1)).astype(int)


def cluster_trial(m: int, dims, points_per_subspace: int, a: float, p0: float, seed: int,
                  config: admm.AdmmConfig | None = None,
                  filter_config: filtering.FilterConfig | None = None) -> dict:
    """Union-of-subspaces pipeline; accuracy is measured on the true inliers.

    A true inlier wrongly reported as corrupted (label -1) counts as an error.
    """
    problem, labels = synth.gen_union_of_subspaces(m, dims, points_per_subspace, a=a, p0=p0,
                                                   seed=seed)
    t0 = time.perf_counter()
    cr = cluster.cluster_with_missing(problem.observed, problem.basis, len(dims), config,
                                      filter_config, seed=seed)
    seconds = time.perf_counter() - t0
    inl = np.setdiff1d(np.arange(problem.shape[1]), problem.outlier_support)
    pred, truth = cr.labels[inl], labels[inl]
    kept = pred >= 0
    acc = clustering_accuracy(pred[kept], truth[kept]) * kept.sum() / max(inl.size, 1)
    ham = support_hamming(cr.outliers, problem.outlier_support)
    return {"seed": seed, "accuracy": acc, "hamming": ham, "seconds": seconds,
            "labels": cr.labels, "truth": labels}


def bench_scaling(ns, m: int, r: int, p0: float, a: float, seed: int = 0,
                  config: filtering.FilterConfig | None = None, compare: bool = False) -> list[dict]:
    """Filtering wall clock across column counts at fixed ``(m, r, p0, a)``."""
    config = config or filtering.FilterConfig(rank_estimate=r, seed=seed)
    rows = []
    for n in ns:
        spec = synth.SyntheticSpec(m=m, n=n, r=r, a=a, p0=p0, seed=seed)
        rows.append(filter_problem(synth.generate(spec), config, compare=compare))
    return rows
