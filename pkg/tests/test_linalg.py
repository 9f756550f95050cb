"""Dense symmetric kernels: frozen factorizations plus reconstruction sweeps."""

import math

import numpy as np
import pytest

from convexkit import linalg


def test_cholesky_frozen_2x2():
    # [[4,2],[2,5]] factors by hand: L = [[2,0],[1,2]]
    L = linalg.cholesky(np.array([[4.0, 2.0], [2.0, 5.0]]))
    assert np.allclose(L, [[2.0, 0.0], [1.0, 2.0]], atol=1e-14)


def test_cholesky_rejects_indefinite():
    with pytest.raises(linalg.NotPositiveDefinite) as err:
        linalg.cholesky(np.array([[1.0, 2.0], [2.0, 1.0]]))
    assert err.value.index == 1
    assert err.value.pivot < 0


def test_cholesky_rejects_asymmetric_and_nonsquare():
    with pytest.raises(ValueError):
        linalg.cholesky(np.array([[1.0, 0.5], [0.0, 1.0]]))
    with pytest.raises(ValueError):
        linalg.cholesky(np.zeros((2, 3)))


def test_solve_posdef_residual():
    rng = np.random.default_rng(0)
    for n in (2, 5, 20, 100):
        M = rng.standard_normal((n, n))
        A = M @ M.T + np.eye(n)
        b = rng.standard_normal(n)
        x = linalg.solve_posdef(A, b)
        assert np.linalg.norm(A @ x - b) <= 1e-9 * (np.linalg.norm(b) + 1.0)


def test_solve_posdef_shape_mismatch():
    with pytest.raises(ValueError):
        linalg.solve_posdef(np.eye(3), np.ones(2))


def test_sym_eig_diagonal_frozen():
    dec = linalg.sym_eig(np.diag([3.0, -1.0, 2.0]))
    assert np.allclose(dec.eigenvalues, [3.0, 2.0, -1.0], atol=1e-12)
    # eigenvectors are signed unit coordinate vectors
    assert np.allclose(np.abs(dec.eigenvectors), np.eye(3)[:, [0, 2, 1]], atol=1e-12)


def test_sym_eig_matches_numpy_and_reconstructs():
    rng = np.random.default_rng(1)
    for n in (2, 5, 20, 100):
        M = rng.standard_normal((n, n))
        A = 0.5 * (M + M.T)
        dec = linalg.sym_eig(A)
        ref = np.sort(np.linalg.eigvalsh(A))[::-1]
        assert np.allclose(dec.eigenvalues, ref, atol=1e-9 * max(1.0, np.abs(ref).max()))
        assert np.allclose(dec.reconstruct(), A, atol=1e-9 * max(1.0, np.abs(A).max()))
        # orthonormality of the eigenbasis
        V = dec.eigenvectors
        assert np.allclose(V.T @ V, np.eye(n), atol=1e-9)


def test_matrix_function_exp_of_zero_is_identity():
    out = linalg.matrix_function(np.zeros((4, 4)), math.exp)
    assert np.allclose(out, np.eye(4), atol=1e-12)


def test_matrix_function_sqrt_squares_back():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((6, 6))
    A = M @ M.T + 0.5 * np.eye(6)
    root = linalg.matrix_function(A, math.sqrt)
    assert np.allclose(root @ root, A, atol=1e-8)


def test_matrix_function_domain_error():
    singular = np.diag([1.0, 0.0])
    with pytest.raises(linalg.DomainError):
        linalg.matrix_function(singular, math.log)


def test_dimension_cap():
    with pytest.raises(ValueError):
        linalg.cholesky(np.eye(501))
