import numpy as np
import pytest

from rklda.baselines import (
    Subspace,
    orthonormal_basis,
    pinv_oracle,
    principal_angles,
    solve_lsqr,
    ulda_oracle,
)
from rklda.errors import DegenerateSubspace, TooLarge
from rklda.labels import encode_labels, index_labels
from rklda.matrix import build_centered_view, to_dense_centered


def precentered(X):
    return build_centered_view(np.asarray(X, dtype=np.float64), assume_centered=True)


FOUR_POINT_X = np.array([[0.0, 0.0], [2.0, 0.0], [0.0, 2.0], [2.0, 2.0]])
FOUR_POINT_LABELS = index_labels([1, 1, 2, 2])


def test_lsqr_identity_system():
    sub = solve_lsqr(precentered(np.eye(2)), np.array([[3.0], [4.0]]))
    assert np.allclose(sub.matrix, [[3.0], [4.0]], atol=1e-10)
    assert sub.origin == "LSQR"
    assert sub.converged


def test_lsqr_least_norm_single_row():
    sub = solve_lsqr(precentered([[1.0, 1.0]]), np.array([[2.0]]))
    assert np.allclose(sub.matrix, [[1.0], [1.0]], atol=1e-10)


def test_lsqr_agrees_with_pinv_planted():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((30, 120))
    view = build_centered_view(X)
    Xc = to_dense_centered(view)
    Y = Xc @ (Xc.T @ rng.standard_normal((30, 3)))
    a = solve_lsqr(view, Y).matrix
    b = pinv_oracle(Xc, Y).matrix
    assert np.linalg.norm(a - b) <= 1e-6 * np.linalg.norm(b)


def test_lsqr_nonconvergence_flagged():
    rng = np.random.default_rng(5)
    X = rng.standard_normal((40, 60))
    view = build_centered_view(X)
    Y = rng.standard_normal((40, 1))
    sub = solve_lsqr(view, Y, tol=1e-14, max_iters=2)
    assert not sub.converged


def test_pinv_identity():
    Y = np.array([[1.0, 2.0], [3.0, 4.0]])
    sub = pinv_oracle(np.eye(2), Y)
    assert np.allclose(sub.matrix, Y)
    assert sub.origin == "PINV"


def test_pinv_single_row():
    sub = pinv_oracle(np.array([[1.0, 1.0]]), np.array([[2.0]]))
    assert np.allclose(sub.matrix, [[1.0], [1.0]])


def test_pinv_rank_truncation():
    X = np.array([[1.0, 0.0], [0.0, 0.0]])
    sub = pinv_oracle(X, np.array([[1.0], [1.0]]))
    assert np.allclose(sub.matrix, [[1.0], [0.0]])


def test_pinv_guard():
    with pytest.raises(TooLarge):
        pinv_oracle(np.eye(100), np.ones((100, 1)), max_elements=99)


def test_pinv_matches_numpy_pinv():
    rng = np.random.default_rng(8)
    for n, d in [(10, 25), (25, 10), (12, 12)]:
        X = rng.standard_normal((n, d))
        Y = rng.standard_normal((n, 2))
        assert np.allclose(pinv_oracle(X, Y).matrix, np.linalg.pinv(X) @ Y, atol=1e-10)


def test_ulda_four_point():
    sub = ulda_oracle(FOUR_POINT_X, FOUR_POINT_LABELS)
    assert sub.matrix.shape[1] == 1
    direction = sub.matrix[:, 0] / np.linalg.norm(sub.matrix[:, 0])
    assert abs(direction[1]) == pytest.approx(1.0, abs=1e-12)
    assert abs(direction[0]) == pytest.approx(0.0, abs=1e-12)


def test_ulda_one_dimensional():
    X = np.array([[0.0], [0.1], [5.0], [5.1]])
    sub = ulda_oracle(X, index_labels(["a", "a", "b", "b"]))
    assert sub.matrix.shape == (1, 1)


def test_ulda_identical_means_degenerate():
    X = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]])
    labels = index_labels(["a", "a", "b", "b"])  # both class means at origin
    with pytest.raises(DegenerateSubspace):
        ulda_oracle(X, labels)


def test_ulda_at_most_g_minus_1_columns():
    rng = np.random.default_rng(10)
    for g in (2, 3, 5):
        toks = [f"c{i % g}" for i in range(40)]
        X = rng.standard_normal((40, 12)) + 4.0 * rng.standard_normal((g, 12))[
            [i % g for i in range(40)]
        ]
        sub = ulda_oracle(X, index_labels(toks))
        assert sub.matrix.shape[1] <= g - 1


def test_ulda_eigenvector_property():
    # returned columns satisfy pinv(S_t) S_b g = lambda g with lambda > 0
    rng = np.random.default_rng(3)
    from rklda.scatter import scatter_matrices

    g = 3
    toks = [f"c{i % g}" for i in range(30)]
    centers = 3.0 * rng.standard_normal((g, 8))
    X = centers[[i % g for i in range(30)]] + rng.standard_normal((30, 8))
    lv = index_labels(toks)
    sub = ulda_oracle(X, lv)
    ss = scatter_matrices(X, lv)
    M = np.linalg.pinv(ss.s_t) @ ss.s_b
    for col in sub.matrix.T:
        image = M @ col
        lam = col @ image / (col @ col)
        assert lam > 1e-10
        assert np.allclose(image, lam * col, atol=1e-8 * max(1.0, abs(lam)))


def test_principal_angles_identical_and_orthogonal():
    e1 = Subspace(matrix=np.array([[1.0], [0.0]]), origin="PINV")
    e2 = Subspace(matrix=np.array([[0.0], [1.0]]), origin="PINV")
    assert principal_angles(e1, e1) == pytest.approx([0.0], abs=1e-12)
    assert principal_angles(e1, e2) == pytest.approx([np.pi / 2], abs=1e-12)


def test_principal_angles_four_point_equivalence():
    view = build_centered_view(FOUR_POINT_X)
    Y = encode_labels(FOUR_POINT_LABELS)
    Xc = to_dense_centered(view)
    # hand computation: Xc^T Y has columns (0, -/+ 2*sqrt(2))
    assert np.allclose(
        Xc.T @ Y.matrix, [[0.0, 0.0], [-2.8284271247461903, 2.8284271247461903]]
    )
    w_ln = pinv_oracle(Xc, Y)
    g_u = ulda_oracle(FOUR_POINT_X, FOUR_POINT_LABELS)
    angles = principal_angles(w_ln, g_u)
    assert np.all(angles < 1e-8)


def test_principal_angles_empty_subspace():
    zero = Subspace(matrix=np.zeros((3, 2)), origin="RK")
    good = Subspace(matrix=np.eye(3)[:, :1], origin="RK")
    with pytest.raises(DegenerateSubspace):
        principal_angles(zero, good)


def test_orthonormal_basis_rank_truncates():
    # second column is a sub-roundoff perturbation of the first: rank 1
    M = np.array([[1.0, 1.0 + 1e-16], [1.0, 1.0], [0.0, 0.0]])
    q = orthonormal_basis(Subspace(matrix=M, origin="PINV"))
    assert q.shape[1] == 1


def test_least_norm_minimality():
    rng = np.random.default_rng(17)
    X = rng.standard_normal((8, 20))
    Y = X @ (X.T @ rng.standard_normal((8, 2)))
    W = pinv_oracle(X, Y).matrix
    _, s, Vt = np.linalg.svd(X, full_matrices=True)
    null = Vt[8:].T  # basis of the null space
    for _ in range(10):
        other = W + null @ rng.standard_normal((null.shape[1], 2)) * 0.5
        assert np.allclose(X @ other, Y, atol=1e-8)
        assert np.linalg.norm(other) > np.linalg.norm(W)


def test_lsqr_pinv_agree_including_inconsistent():
    rng = np.random.default_rng(23)
    for trial in range(12):
        n = int(rng.integers(5, 40))
        d = int(rng.integers(5, 60))
        if trial % 3 == 0:
            r = max(1, min(n, d) // 2)
            X = rng.standard_normal((n, r)) @ rng.standard_normal((r, d))
        else:
            X = rng.standard_normal((n, d))
        Y = rng.standard_normal((n, 2))
        view = build_centered_view(X)
        Xc = to_dense_centered(view)
        a = solve_lsqr(view, Y).matrix
        b = pinv_oracle(Xc, Y).matrix
        assert np.linalg.norm(a - b) <= 1e-6 * max(np.linalg.norm(b), 1e-12)


def test_subspace_equivalence_linearly_independent_observations():
    rng = np.random.default_rng(29)
    for _ in range(5):
        n = int(rng.integers(6, 16))
        d = n + int(rng.integers(2, 30))
        g = int(rng.integers(2, 4))
        toks = [f"c{i % g}" for i in range(n)]
        X = rng.standard_normal((n, d))
        lv = index_labels(toks)
        Y = encode_labels(lv)
        Xc = to_dense_centered(build_centered_view(X))
        w_ln = pinv_oracle(Xc, Y)
        g_u = ulda_oracle(X, lv)
        angles = principal_angles(w_ln, g_u)
        assert np.all(angles < 1e-8)
