import numpy as np
import pytest

from robustmc import admm, experiments, filtering, synth
from robustmc.basis import ColumnLocalBasis, ObservedCoefficients
from robustmc.filtering import (FilterConfig, estimate_rank, filter_column, sample_seed_columns,
                                seed_size, solve_seed)
from robustmc.matcore import InputError
from robustmc.metrics import column_space, subspace_distance


def test_config_validation():
    with pytest.raises(InputError):
        FilterConfig(oversample_const=0)
    with pytest.raises(InputError):
        FilterConfig(outlier_rel_tol=-1)
    with pytest.raises(InputError):
        FilterConfig(rank_estimate=-2)


def test_seed_size_is_capped():
    assert seed_size(1000, 1, 0.12) == pytest.approx(0.12 * np.log(1000) ** 3)
    assert seed_size(1000, 50, 4.0) == 500


def test_sample_seed_columns():
    g = np.random.default_rng(0)
    assert sample_seed_columns(10, 10, g).tolist() == list(range(10))
    a = sample_seed_columns(1000, 100, np.random.default_rng(5))
    b = sample_seed_columns(1000, 100, np.random.default_rng(5))
    np.testing.assert_array_equal(a, b)
    assert 50 < a.size < 200
    assert sample_seed_columns(1000, 0.001, np.random.default_rng(1)).size >= 1
    with pytest.raises(InputError):
        sample_seed_columns(10, 0, g)


def test_filter_column_in_and_out_of_space(rng):
    A = rng.standard_normal((8, 2))
    q = rng.standard_normal(2)
    res, coef, ok = filter_column(A @ q, A)
    assert res < 1e-10 and ok
    np.testing.assert_allclose(coef, q, atol=1e-10)
    Q = np.linalg.qr(A, mode="complete")[0]
    y = Q[:, 3] * 2.5
    res, _, _ = filter_column(y, A)
    assert res == pytest.approx(np.linalg.norm(y))


def test_filter_column_undetermined(rng):
    A = rng.standard_normal((1, 3))
    _, _, ok = filter_column(np.array([1.0]), A)
    assert not ok
    B = np.column_stack([np.ones(4), np.ones(4)])
    _, _, ok = filter_column(np.ones(4), B)
    assert not ok


def test_solve_seed_full_block_matches_full_solve():
    p = synth.generate(synth.SyntheticSpec.standard(60, seed=2))
    res, U = solve_seed(p.observed, p.basis)
    full = admm.solve(p.observed, p.basis)
    np.testing.assert_allclose(res.L_star, full.L_star, atol=1e-10)
    assert subspace_distance(U, column_space(full.L_star, 1e-6)) < 1e-8


def test_solve_seed_rank_zero():
    obs = ObservedCoefficients(np.ones((5, 4), bool), np.zeros((5, 4)))
    _, U = solve_seed(obs, ColumnLocalBasis.identity(5, 4))
    assert U.shape == (5, 0)


def test_clean_input_is_reproduced():
    p = synth.generate(synth.SyntheticSpec(m=100, n=500, r=2, a=0.0, p0=1.0, seed=3))
    fr = filtering.run(p.observed, p.basis, FilterConfig(rank_estimate=2, seed=1))
    assert not fr.outlier_flags.any()
    assert np.abs(fr.completed - p.L0).max() <= 1e-8 * np.abs(p.L0).max()
    assert np.abs(fr.U_basis.T @ fr.U_basis - np.eye(fr.rank)).max() < 1e-10


def test_planted_orthogonal_outlier_is_flagged():
    p = synth.generate(synth.SyntheticSpec(m=80, n=400, r=2, a=0.0, p0=1.0, seed=4))
    U = column_space(p.L0)
    Q = np.linalg.qr(np.column_stack([U, np.random.default_rng(0).standard_normal(80)]))[0]
    M = p.M.copy()
    cfg = FilterConfig(rank_estimate=2, seed=7)
    seed_cols = sample_seed_columns(400, seed_size(400, 2, cfg.oversample_const),
                                    np.random.default_rng(7))
    j = int(np.setdiff1d(np.arange(400), seed_cols)[0])
    M[:, j] = 3.0 * Q[:, 2]
    obs = ObservedCoefficients(np.ones((80, 400), bool), M)
    fr = filtering.run(obs, p.basis, cfg)
    assert fr.support.tolist() == [j]
    assert fr.residuals[j] == pytest.approx(3.0, rel=1e-8)


def test_flags_follow_threshold():
    p = synth.generate(synth.SyntheticSpec(m=80, n=400, r=2, a=0.1, p0=0.9, seed=8))
    cfg = FilterConfig(rank_estimate=2, seed=2)
    fr = filtering.run(p.observed, p.basis, cfg)
    rest = np.setdiff1d(np.arange(400), fr.seed_columns)
    ynorm = np.linalg.norm(p.observed.values[:, rest], axis=0)
    expect = fr.residuals[rest] > cfg.outlier_rel_tol * np.maximum(1.0, ynorm)
    np.testing.assert_array_equal(fr.outlier_flags[rest], expect)
    assert fr.converged
    rows = fr.column_rows()
    assert len(rows) == 400 and rows[5][0] == 5


def test_column_order_independence():
    p = synth.generate(synth.SyntheticSpec(m=60, n=300, r=2, a=0.1, p0=0.9, seed=9,
                                           basis="random_per_column"))
    fr = filtering.run(p.observed, p.basis, FilterConfig(rank_estimate=2, seed=3))
    rest = np.setdiff1d(np.arange(300), fr.seed_columns)
    cache = {}
    for j in rest[::-1]:
        rows = p.observed.mask[:, j]
        W = filtering._transformed_basis(fr.U_basis, p.basis, j, cache)
        res, _, _ = filter_column(p.observed.values[rows, j], W[rows])
        assert res == fr.residuals[j]


def test_estimate_rank():
    p = synth.generate(synth.SyntheticSpec(m=100, n=500, r=1, a=0.0, p0=1.0, seed=1))
    est = estimate_rank(p.observed, p.basis)
    assert est.accepted and est.rank == 1
    p = synth.generate(synth.SyntheticSpec(m=100, n=500, r=5, a=0.0, p0=1.0, seed=1))
    est = estimate_rank(p.observed, p.basis)
    assert est.accepted and est.rank == 5 and est.trials[-1][4] == 5
    obs = ObservedCoefficients(np.ones((20, 500), bool), np.zeros((20, 500)))
    est = estimate_rank(obs, ColumnLocalBasis.identity(20, 500))
    assert est.accepted and est.rank == 0 and len(est.trials) == 1


def test_estimate_rank_gives_up_past_seed_fraction():
    p = synth.generate(synth.SyntheticSpec(m=40, n=200, r=2, a=0.0, p0=1.0, seed=0))
    est = estimate_rank(p.observed, p.basis, FilterConfig(max_seed_fraction=0.01))
    assert est.status == "low-rank assumption violated" and not est.trials


def test_pure_noise_seed_is_all_outliers():
    g = np.random.default_rng(0)
    M = g.standard_normal((40, 200))
    est = estimate_rank(ObservedCoefficients(np.ones(M.shape, bool), M),
                        ColumnLocalBasis.identity(40, 200))
    assert est.rank == 0


def test_auto_rank_run():
    p = synth.generate(synth.SyntheticSpec(m=100, n=500, r=3, a=0.1, p0=0.95, seed=6))
    fr = filtering.run(p.observed, p.basis, FilterConfig(seed=4))
    assert fr.rank == 3
    dist, _ = experiments.recovery(p, fr.U_basis, fr.support)
    assert dist < 1e-6


def test_runtime_scales_linearly():
    best = None
    for rep in range(2):
        rows = experiments.bench_scaling([500, 1000, 2000], 200, 5, 0.95, 0.1, seed=rep)
        t = np.array([r["filter_seconds"] for r in rows])
        best = t if best is None else np.minimum(best, t)
    ns = np.array([500.0, 1000.0, 2000.0])
    fit = np.polyval(np.polyfit(ns, best, 1), ns)
    ratio = best / fit
    assert np.all(ratio <= 1.5) and np.all(ratio >= 1 / 1.5)
