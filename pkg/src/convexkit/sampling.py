"""Uniform sampling from convex bodies and randomized rounding.

Hit-and-run walks (analytic chords for halfplane regions and balls, bisection
for membership-only bodies), isotropic whitening of sample batches, Gaussian
sampling from a PSD covariance, and the MAXCUT semidefinite relaxation with
sign rounding.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import linalg

__all__ = [
    "RankDeficient",
    "HitAndRun",
    "uniform_samples",
    "IsotropicEstimate",
    "isotropic_whiten",
    "covariance_eig_range",
    "centroid_cut_fraction",
    "psd_cholesky_floor",
    "gaussian_sample",
    "graph_laplacian",
    "brute_force_maxcut",
    "sdp_relax_maxcut",
    "gw_round",
    "psd_quadratic_round",
    "expected_sign_quadratic",
]


class RankDeficient(Exception):
    """Sample covariance is numerically singular; whitening is undefined."""


# ------------------------------------------------------------------ hit and run

class HitAndRun:
    """Hit-and-run walk with pluggable chord geometry.

    One step: draw a direction (uniform on the sphere, or shaped by the last
    batch covariance when whitening is on), intersect the line with the body,
    jump to a uniform point of the chord.
    """

    def __init__(self, chord_fn: Callable, x0: np.ndarray, seed: int = 0,
                 add_halfplane_fn: Optional[Callable] = None):
        self._chord = chord_fn
        self.x = np.asarray(x0, dtype=float).copy()
        self.dim = self.x.size
        self.rng = np.random.default_rng(seed)
        self._add_halfplane = add_halfplane_fn
        self._dir_shape: Optional[np.ndarray] = None
        self.steps_taken = 0

    # --- constructors -------------------------------------------------------

    @classmethod
    def for_halfplanes(cls, W: np.ndarray, c: np.ndarray, x0, seed: int = 0):
        """Region {x : W x <= c}; rows may be added later with add_halfplane."""
        W = [np.asarray(w, dtype=float) for w in np.atleast_2d(W)]
        c = [float(v) for v in np.atleast_1d(c)]

        def chord(x, u):
            t_lo, t_hi = -math.inf, math.inf
            Wm = np.array(W)
            cm = np.array(c)
            du = Wm @ u
            slack = cm - Wm @ x
            pos = du > 1e-300
            neg = du < -1e-300
            if np.any(pos):
                t_hi = float(np.min(slack[pos] / du[pos]))
            if np.any(neg):
                t_lo = float(np.max(slack[neg] / du[neg]))
            return t_lo, t_hi

        def add(w, offset):
            W.append(np.asarray(w, dtype=float))
            c.append(float(offset))

        return cls(chord, x0, seed, add_halfplane_fn=add)

    @classmethod
    def for_ball(cls, center, R: float, x0=None, seed: int = 0):
        center = np.asarray(center, dtype=float)

        def chord(x, u):
            d = x - center
            b = float(d @ u)
            cq = float(d @ d) - R * R
            disc = b * b - cq
            if disc <= 0:
                return 0.0, 0.0
            s = math.sqrt(disc)
            return -b - s, -b + s

        return cls(chord, center if x0 is None else x0, seed)

    @classmethod
    def for_membership(cls, contains: Callable, x0, enclosing_radius: float,
                       seed: int = 0, tol: float = 1e-10):
        """Membership-oracle body; chord endpoints located by bisection."""
        x0 = np.asarray(x0, dtype=float)

        def boundary(x, u, hi):
            lo = 0.0
            while hi - lo > tol:
                mid = 0.5 * (lo + hi)
                if contains(x + mid * u):
                    lo = mid
                else:
                    hi = mid
            return lo

        def chord(x, u):
            span = 2.0 * enclosing_radius
            return -boundary(x, -u, span), boundary(x, u, span)

        return cls(chord, x0, seed)

    # --- walking ------------------------------------------------------------

    def _direction(self) -> np.ndarray:
        u = self.rng.standard_normal(self.dim)
        if self._dir_shape is not None:
            u = self._dir_shape @ u
        n = np.linalg.norm(u)
        while n == 0.0:
            u = self.rng.standard_normal(self.dim)
            n = np.linalg.norm(u)
        return u / n

    def step(self) -> np.ndarray:
        u = self._direction()
        t_lo, t_hi = self._chord(self.x, u)
        if not (t_lo <= 0.0 <= t_hi):
            # numerical drift put the point marginally outside; stay put
            return self.x
        self.x = self.x + self.rng.uniform(t_lo, t_hi) * u
        self.steps_taken += 1
        return self.x

    def burn_in(self, k: int) -> None:
        for _ in range(int(k)):
            self.step()

    def sample(self, n_samples: int, stride: int = 1, whiten: bool = False) -> np.ndarray:
        out = np.empty((int(n_samples), self.dim))
        for i in range(int(n_samples)):
            for _ in range(int(stride)):
                self.step()
            out[i] = self.x
        if whiten:
            cov = np.cov(out.T) if self.dim > 1 else np.array([[np.var(out[:, 0])]])
            vals, vecs = np.linalg.eigh(0.5 * (cov + cov.T))
            vals = np.maximum(vals, 1e-12 * max(float(vals.max()), 1.0))
            self._dir_shape = (vecs * np.sqrt(vals)) @ vecs.T
        return out

    def add_halfplane(self, w, offset) -> None:
        if self._add_halfplane is None:
            raise ValueError("this walker's region is not a halfplane intersection")
        self._add_halfplane(w, offset)


def uniform_samples(walker: HitAndRun, n_samples: int, burn_in: Optional[int] = None,
                    stride: Optional[int] = None) -> np.ndarray:
    """Burn in (default 10 n^3 steps), then collect n_samples with a stride."""
    n = walker.dim
    walker.burn_in(10 * n**3 if burn_in is None else burn_in)
    return walker.sample(n_samples, stride=stride if stride else max(1, n))


# -------------------------------------------------------------------- whitening

@dataclass
class IsotropicEstimate:
    mean: np.ndarray
    cov: np.ndarray
    transform: np.ndarray  # cov^{-1/2}

    def apply(self, samples: np.ndarray) -> np.ndarray:
        return (np.atleast_2d(samples) - self.mean) @ self.transform.T


def isotropic_whiten(samples: np.ndarray, floor: float = 1e-12) -> IsotropicEstimate:
    """Estimate mean/covariance and the whitening map cov^{-1/2}.

    Raises RankDeficient when the smallest covariance eigenvalue is at or
    below floor * max(1, largest eigenvalue).
    """
    S = np.atleast_2d(np.asarray(samples, dtype=float))
    mu = S.mean(axis=0)
    C = (S - mu).T @ (S - mu) / S.shape[0]
    C = 0.5 * (C + C.T)
    vals, vecs = np.linalg.eigh(C)
    if float(vals.min()) <= floor * max(1.0, float(vals.max())):
        raise RankDeficient(f"covariance eigenvalue {vals.min():.3e} too small")
    Wm = (vecs / np.sqrt(vals)) @ vecs.T
    return IsotropicEstimate(mu, C, Wm)


def covariance_eig_range(samples: np.ndarray):
    S = np.atleast_2d(np.asarray(samples, dtype=float))
    mu = S.mean(axis=0)
    C = (S - mu).T @ (S - mu) / S.shape[0]
    vals = np.linalg.eigvalsh(0.5 * (C + C.T))
    return float(vals.min()), float(vals.max())


def centroid_cut_fraction(samples: np.ndarray, z: np.ndarray, w: np.ndarray) -> float:
    """Fraction of the batch on the far side of the hyperplane through z.

    For a body in near-isotropic position with centroid at the origin, the
    true measure of {x : w^T (x - z) >= 0} is at least 1/e - ||z||.
    """
    S = np.atleast_2d(samples)
    return float(np.mean((S - np.asarray(z)) @ np.asarray(w) >= 0.0))


# ------------------------------------------------------------- gaussian sampling

def psd_cholesky_floor(M: np.ndarray, floor: float = 1e-12) -> np.ndarray:
    """Cholesky-type factor L with L L^T ~= M for PSD (possibly singular) M.

    Pivots at or below floor zero out their column instead of failing, so
    rank-deficient covariances factor cleanly.
    """
    A = np.asarray(M, dtype=float)
    n = A.shape[0]
    L = np.zeros_like(A)
    for j in range(n):
        d = A[j, j] - L[j, :j] @ L[j, :j]
        if d <= floor:
            continue
        L[j, j] = math.sqrt(d)
        if j + 1 < n:
            L[j + 1 :, j] = (A[j + 1 :, j] - L[j + 1 :, :j] @ L[j, :j]) / L[j, j]
    return L


def gaussian_sample(Sigma: np.ndarray, rng: np.random.Generator,
                    size: Optional[int] = None) -> np.ndarray:
    """Draw N(0, Sigma) via the floored Cholesky factor."""
    L = psd_cholesky_floor(Sigma)
    n = L.shape[0]
    if size is None:
        return L @ rng.standard_normal(n)
    return rng.standard_normal((int(size), n)) @ L.T


# ------------------------------------------------------------------ MAXCUT / GW

def graph_laplacian(Adj: np.ndarray) -> np.ndarray:
    Adj = np.asarray(Adj, dtype=float)
    return np.diag(Adj.sum(axis=1)) - Adj


def brute_force_maxcut(L: np.ndarray):
    """Exact max of z^T L z over sign vectors, for n <= 16.

    Values are on the quadratic-form scale (4x the cut weight).
    Returns (best_value, best_signs).
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    if n > 16:
        raise ValueError("brute force capped at n = 16")
    m = 1 << (n - 1)
    bits = (np.arange(m)[:, None] >> np.arange(n)[None, :]) & 1
    S = 2.0 * bits - 1.0
    S[:, -1] = 1.0  # fix the last coordinate's sign; z and -z tie
    vals = np.einsum("ij,jk,ik->i", S, L, S)
    k = int(np.argmax(vals))
    return float(vals[k]), S[k].copy()


def _project_psd(M: np.ndarray) -> np.ndarray:
    vals, vecs = np.linalg.eigh(0.5 * (M + M.T))
    pos = np.maximum(vals, 0.0)
    return (vecs * pos) @ vecs.T


def _dykstra_psd_unitdiag(X: np.ndarray, sweeps: int = 200, tol: float = 1e-7) -> np.ndarray:
    """Dykstra's alternating projections onto {PSD} intersect {diag = 1}."""
    Y = X.copy()
    p = np.zeros_like(X)
    q = np.zeros_like(X)
    for _ in range(sweeps):
        Z = _project_psd(Y + p)
        p = Y + p - Z
        Y_new = Z + q
        np.fill_diagonal(Y_new, 1.0)
        q = Z + q - Y_new
        delta = float(np.max(np.abs(Y_new - Y)))
        Y = Y_new
        if delta <= tol:
            break
    return Y


def sdp_relax_maxcut(L: np.ndarray, max_iter: int = 2000, tol: float = 1e-9,
                     dykstra_sweeps: int = 200, dykstra_tol: float = 1e-7) -> np.ndarray:
    """Solve max <L, X> over {X PSD, diag X = 1} by projected gradient ascent.

    Step 1/(2 ||L||_F); each ascent step is re-projected with Dykstra capped
    at dykstra_sweeps sweeps (tol dykstra_tol). Returns the solution matrix.
    """
    L = np.asarray(L, dtype=float)
    n = L.shape[0]
    X = np.eye(n)
    step = 1.0 / (2.0 * float(np.linalg.norm(L)))
    obj = float(np.sum(L * X))
    stall = 0
    for _ in range(max_iter):
        X = _dykstra_psd_unitdiag(X + step * L, dykstra_sweeps, dykstra_tol)
        obj_new = float(np.sum(L * X))
        if abs(obj_new - obj) <= tol * (1.0 + abs(obj)):
            stall += 1
            if stall >= 5:
                break
        else:
            stall = 0
        obj = obj_new
    return 0.5 * (X + X.T)


def gw_round(Sigma: np.ndarray, L: np.ndarray, replicates: int,
             rng: np.random.Generator):
    """Random-hyperplane rounding: z = sign(xi), xi ~ N(0, Sigma).

    sign(0) is +1. Returns a dict with the per-replicate values, their mean,
    and the best sign vector found.
    """
    Sigma = np.asarray(Sigma, dtype=float)
    L = np.asarray(L, dtype=float)
    F = psd_cholesky_floor(Sigma)
    Z = rng.standard_normal((int(replicates), Sigma.shape[0])) @ F.T
    S = np.where(Z >= 0.0, 1.0, -1.0)
    vals = np.einsum("ij,jk,ik->i", S, L, S)
    k = int(np.argmax(vals))
    return {"values": vals, "mean_value": float(vals.mean()),
            "best_value": float(vals[k]), "best_signs": S[k].copy()}


def psd_quadratic_round(B: np.ndarray, Sigma: np.ndarray, replicates: int,
                        rng: np.random.Generator) -> float:
    """Mean of z^T B z over sign roundings of N(0, Sigma) draws."""
    out = gw_round(Sigma, B, replicates, rng)
    return out["mean_value"]


def expected_sign_quadratic(B: np.ndarray, Sigma: np.ndarray) -> float:
    """Closed form E z^T B z = (2/pi) <B, arcsin(Sigma)> (entrywise arcsin)."""
    B = np.asarray(B, dtype=float)
    Sigma = np.clip(np.asarray(Sigma, dtype=float), -1.0, 1.0)
    return float((2.0 / math.pi) * np.sum(B * np.arcsin(Sigma)))
