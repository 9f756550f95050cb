"""Dense symmetric linear algebra kernels.

Everything here works on plain float64 numpy arrays. Matrices are dense and
small (dim <= 500); there is deliberately no sparse path.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

__all__ = [
    "NotPositiveDefinite",
    "NoConvergence",
    "DomainError",
    "SpectralDecomposition",
    "cholesky",
    "solve_cholesky",
    "solve_posdef",
    "sym_eig",
    "matrix_function",
]

MAX_DIM = 500
JACOBI_MAX_SWEEPS = 100
JACOBI_OFFDIAG_RTOL = 1e-12


class NotPositiveDefinite(Exception):
    """A Cholesky pivot fell at or below the positive-definiteness threshold."""

    def __init__(self, index: int, pivot: float):
        self.index = index
        self.pivot = pivot
        super().__init__(f"pivot {pivot:.3e} at column {index} is not acceptably positive")


class NoConvergence(Exception):
    """The Jacobi sweep budget ran out before the off-diagonal mass vanished."""


class DomainError(Exception):
    """A scalar function was applied to an eigenvalue outside its domain."""


def _as_square(M: np.ndarray) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {M.shape}")
    if M.shape[0] > MAX_DIM:
        raise ValueError(f"dimension {M.shape[0]} exceeds supported maximum {MAX_DIM}")
    return M


def _check_symmetric(M: np.ndarray) -> np.ndarray:
    M = _as_square(M)
    scale = float(np.max(np.abs(M))) if M.size else 0.0
    if scale and float(np.max(np.abs(M - M.T))) > 1e-8 * scale:
        raise ValueError("matrix is not symmetric")
    return 0.5 * (M + M.T)


def cholesky(M: np.ndarray) -> np.ndarray:
    """Lower-triangular L with L L^T = M for symmetric positive definite M.

    Raises NotPositiveDefinite when a pivot drops to or below
    dim * 1e-14 * max|M|.
    """
    A = _check_symmetric(M).copy()
    n = A.shape[0]
    thresh = n * 1e-14 * float(np.max(np.abs(A))) if n else 0.0
    L = np.zeros_like(A)
    for j in range(n):
        d = A[j, j] - L[j, :j] @ L[j, :j]
        if d <= thresh:
            raise NotPositiveDefinite(j, float(d))
        L[j, j] = math.sqrt(d)
        if j + 1 < n:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def _solve_lower(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = L.shape[0]
    x = np.zeros(n)
    for i in range(n):
        x[i] = (b[i] - L[i, :i] @ x[:i]) / L[i, i]
    return x


def _solve_upper(U: np.ndarray, b: np.ndarray) -> np.ndarray:
    n = U.shape[0]
    x = np.zeros(n)
    for i in range(n - 1, -1, -1):
        x[i] = (b[i] - U[i, i + 1 :] @ x[i + 1 :]) / U[i, i]
    return x


def solve_cholesky(L: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve (L L^T) x = b given a precomputed Cholesky factor."""
    b = np.asarray(b, dtype=float)
    return _solve_upper(L.T, _solve_lower(L, b))


def solve_posdef(M: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Solve M x = b for symmetric positive definite M.

    One step of iterative refinement keeps the residual below
    1e-9 * (||b|| + 1) on reasonably conditioned systems.
    """
    A = _check_symmetric(M)
    b = np.asarray(b, dtype=float)
    if b.shape != (A.shape[0],):
        raise ValueError(f"rhs shape {b.shape} does not match matrix dim {A.shape[0]}")
    L = cholesky(A)
    x = solve_cholesky(L, b)
    x = x + solve_cholesky(L, b - A @ x)
    return x


@dataclass
class SpectralDecomposition:
    """Eigenvalues in descending order; eigenvectors[:, k] pairs with eigenvalues[k]."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        V = self.eigenvectors
        return (V * self.eigenvalues) @ V.T


def sym_eig(M: np.ndarray) -> SpectralDecomposition:
    """Full spectral decomposition of a symmetric matrix by cyclic Jacobi sweeps.

    Stops when the off-diagonal Frobenius mass is below 1e-12 times the
    Frobenius norm of the input; raises NoConvergence if 100 sweeps are not
    enough (does not happen for symmetric input at these dims, but the budget
    is a hard cap, not a heuristic).
    """
    A = _check_symmetric(M).copy()
    n = A.shape[0]
    V = np.eye(n)
    if n == 0:
        return SpectralDecomposition(np.zeros(0), V)
    fro = float(np.linalg.norm(A))
    tol = JACOBI_OFFDIAG_RTOL * fro

    def offdiag(B: np.ndarray) -> float:
        # summed directly: the norm(B)^2 - norm(diag)^2 form cancels
        # catastrophically and floors near fro * sqrt(eps)
        off = B - np.diag(np.diag(B))
        return float(np.linalg.norm(off))

    sweeps = 0
    while offdiag(A) > tol:
        if sweeps >= JACOBI_MAX_SWEEPS:
            raise NoConvergence(f"off-diagonal mass {offdiag(A):.3e} after {sweeps} sweeps")
        sweeps += 1
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = A[p, q]
                if abs(apq) <= 1e-300:
                    continue
                theta = (float(A[q, q]) - float(A[p, p])) / (2.0 * float(apq))
                if abs(theta) > 1e150:
                    t = 0.5 / theta  # tan ~ 1/(2 theta); theta^2 would overflow
                else:
                    t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
                c = 1.0 / math.sqrt(t * t + 1.0)
                s = t * c
                rp, rq = A[p, :].copy(), A[q, :].copy()
                A[p, :] = c * rp - s * rq
                A[q, :] = s * rp + c * rq
                cp, cq = A[:, p].copy(), A[:, q].copy()
                A[:, p] = c * cp - s * cq
                A[:, q] = s * cp + c * cq
                A[p, q] = 0.0
                A[q, p] = 0.0
                vp, vq = V[:, p].copy(), V[:, q].copy()
                V[:, p] = c * vp - s * vq
                V[:, q] = s * vp + c * vq
    order = np.argsort(np.diag(A))[::-1]
    return SpectralDecomposition(np.diag(A)[order].copy(), V[:, order].copy())


def matrix_function(M: np.ndarray, fn: Callable[[float], float]) -> np.ndarray:
    """Apply a scalar function spectrally: V diag(fn(lambda)) V^T.

    Raises DomainError when fn rejects an eigenvalue or returns a non-finite
    value (e.g. log of a zero eigenvalue).
    """
    dec = sym_eig(M)
    vals = np.empty_like(dec.eigenvalues)
    for k, lam in enumerate(dec.eigenvalues):
        try:
            vals[k] = fn(float(lam))
        except (ValueError, ZeroDivisionError, OverflowError) as exc:
            raise DomainError(f"fn undefined at eigenvalue {lam!r}: {exc}") from exc
        if not math.isfinite(vals[k]):
            raise DomainError(f"fn({lam!r}) is not finite")
    V = dec.eigenvectors
    out = (V * vals) @ V.T
    return 0.5 * (out + out.T)
