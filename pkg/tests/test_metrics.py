import numpy as np
import pytest

from robustmc.basis import ColumnLocalBasis, make_basis
from robustmc.matcore import InputError
from robustmc.metrics import (ambiguity_norm, clustering_accuracy, column_space, incoherence,
                              subspace_distance, support, support_hamming)


def _orth(rng, m, r):
    return np.linalg.qr(rng.standard_normal((m, r)))[0]


def test_subspace_distance_examples(rng):
    U = _orth(rng, 6, 2)
    assert subspace_distance(U, U) < 1e-14
    e1, e2 = np.array([[1.0], [0.0]]), np.array([[0.0], [1.0]])
    assert subspace_distance(e1, e2) == pytest.approx(np.sqrt(2))
    R = _orth(rng, 2, 2)
    assert subspace_distance(U, U @ R) < 1e-10


def test_subspace_distance_matches_projector_difference(rng):
    for r1, r2 in [(2, 2), (1, 3), (3, 0)]:
        A, B = _orth(rng, 7, r1), _orth(rng, 7, r2)
        direct = np.linalg.norm(A @ A.T - B @ B.T)
        assert subspace_distance(A, B) == pytest.approx(direct, abs=1e-12)


def test_subspace_distance_is_metric(rng):
    for _ in range(20):
        A, B, C = (_orth(rng, 8, 3) for _ in range(3))
        assert subspace_distance(A, B) == pytest.approx(subspace_distance(B, A), abs=1e-12)
        assert subspace_distance(A, C) <= subspace_distance(A, B) + subspace_distance(B, C) + 1e-9


def test_subspace_distance_rejects_non_orthonormal():
    with pytest.raises(InputError):
        subspace_distance(np.array([[2.0], [0.0]]), np.array([[1.0], [0.0]]))


def test_support_hamming_examples():
    assert support_hamming({1, 2}, {1, 2}, 5) == 0
    assert support_hamming({1, 2}, {2, 3}, 5) == 2
    assert support_hamming(set(), range(7), 7) == 7
    with pytest.raises(InputError):
        support_hamming({9}, set(), 5)


def test_support_threshold():
    S = np.zeros((3, 4))
    S[:, 1] = 2.0
    S[0, 3] = 1e-9
    assert support(S).tolist() == [1]


def _incoherence_oracle(L, basis, r):
    """Maxima over every explicit basis matrix omega_ij."""
    U, s, Vt = np.linalg.svd(L, full_matrices=False)
    U, V = U[:, :r], Vt[:r].T
    m, n = L.shape
    row = col = cross = 0.0
    for i in range(m):
        for j in range(n):
            W = basis.element(i, j)
            row = max(row, np.linalg.norm(W @ V @ V.T) ** 2)
            col = max(col, np.linalg.norm(U @ U.T @ W) ** 2)
            cross = max(cross, abs(np.sum(U @ V.T * W)))
    return n / r * row, m / r * col, m * n / r * cross ** 2


@pytest.mark.parametrize("kind", ["identity", "dct", "random", "random_per_column"])
def test_incoherence_matches_elementwise_oracle(kind, rng):
    L = rng.standard_normal((6, 2)) @ rng.standard_normal((5, 2)).T
    B = make_basis(kind, 6, 5, seed=3)
    rep = incoherence(L, B)
    np.testing.assert_allclose([rep.mu_row, rep.mu_col, rep.mu_cross],
                               _incoherence_oracle(L, B, 2), rtol=1e-10)
    assert rep.mu == max(rep.mu_row, rep.mu_col, rep.mu_cross)


def test_incoherence_examples():
    rep = incoherence(np.ones((8, 8)))
    assert rep.mu == pytest.approx(1.0)
    E = np.zeros((8, 8))
    E[0, 0] = 1.0
    assert incoherence(E).mu_row == pytest.approx(8.0)
    with pytest.raises(InputError):
        incoherence(np.zeros((3, 3)))


def _gaussian_reports(n, r, seeds=20):
    out = []
    for seed in range(seeds):
        g = np.random.default_rng(seed)
        out.append(incoherence(g.standard_normal((n, r)) @ g.standard_normal((n, r)).T))
    return out


@pytest.mark.parametrize("n", [50, 200, 500])
def test_incoherence_of_gaussian_products(n):
    bound = 10 * np.log(n)
    for r in (1, 3, 10):
        reps = _gaussian_reports(n, r)
        assert max(max(p.mu_row, p.mu_col) for p in reps) < bound
    assert max(p.mu for p in _gaussian_reports(n, 10)) < bound


def test_cross_incoherence_grows_like_log_squared():
    # rank one: max |u_i v_j|^2 m n is about (2 ln n)^2, beyond any c ln n
    worst = max(p.mu_cross for p in _gaussian_reports(500, 1))
    assert worst > 10 * np.log(500)
    assert worst < 2 * (2 * np.log(500)) ** 2


def test_incoherence_scale_invariant(rng):
    L = rng.standard_normal((7, 2)) @ rng.standard_normal((6, 2)).T
    a, b = incoherence(L), incoherence(-3.5 * L)
    np.testing.assert_allclose([a.mu_row, a.mu_col, a.mu_cross],
                               [b.mu_row, b.mu_col, b.mu_cross], rtol=1e-10)


def test_ambiguity_examples(rng):
    assert ambiguity_norm(np.zeros((3, 3))) == 0.0
    S = np.zeros((4, 3))
    S[:, 1] = rng.standard_normal(4)
    assert ambiguity_norm(S) == pytest.approx(1.0)
    d = rng.standard_normal(5)
    k = 4
    S = np.outer(d, rng.uniform(0.5, 3, size=k))
    assert ambiguity_norm(S) == pytest.approx(np.sqrt(k))


def test_ambiguity_of_isotropic_columns():
    for seed in range(20):
        S = np.random.default_rng(seed).standard_normal((200, 200))
        assert ambiguity_norm(S) < 3


def test_ambiguity_column_scaling(rng):
    S = rng.standard_normal((5, 6))
    S[:, 2] = 0.0
    scaled = S * rng.uniform(0.1, 10, size=6)
    assert ambiguity_norm(S) == pytest.approx(ambiguity_norm(scaled), rel=1e-12)


def test_clustering_accuracy():
    t = np.array([0, 0, 1, 1, 2, 2])
    assert clustering_accuracy(t, t) == 1.0
    assert clustering_accuracy(np.array([2, 2, 0, 0, 1, 1]), t) == 1.0
    half = np.array([0, 0, 0, 0, 1, 1, 1, 1])
    flipped = np.array([0, 0, 1, 1, 1, 1, 0, 0])
    assert clustering_accuracy(flipped, half) == 0.5
    many = np.repeat(np.arange(8), 3)
    perm = np.random.default_rng(0).permutation(8)[many]
    assert clustering_accuracy(perm, many) == 1.0


def test_column_space_rank(rng):
    L = rng.standard_normal((9, 3)) @ rng.standard_normal((4, 3)).T
    assert column_space(L).shape == (9, 3)
    assert ColumnLocalBasis.identity(2, 2).shape == (2, 2)
