"""Cutting-plane methods: ellipsoid, center of gravity, and Vaidya's method.

All three maintain a localization region certified to contain the target set
(or the minimizer) and shrink it with separating hyperplanes. Traces use the
cutting-plane schema: per-iteration feasibility flag, best value seen at a
feasible query point, a log-volume proxy for the region, and the oracle call
count.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import linalg
from .oracles import ConstraintSet, DimensionMismatch, FirstOrderOracle
from .problems import Problem

__all__ = [
    "CutTrace",
    "ellipsoid_step",
    "run_ellipsoid",
    "clip_polygon",
    "polygon_area",
    "polygon_centroid",
    "run_center_of_gravity",
    "regular_simplex_rows",
    "leverage_scores",
    "volumetric_center",
    "run_vaidya",
]


@dataclass
class CutTrace:
    iters: list = field(default_factory=list)
    feasible_flags: list = field(default_factory=list)
    best_values: list = field(default_factory=list)
    log_volume_proxy: list = field(default_factory=list)
    oracle_calls: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.iters)


# -------------------------------------------------------------------- ellipsoid

def ellipsoid_step(c: np.ndarray, H: np.ndarray, w: np.ndarray):
    """Minimum-volume ellipsoid containing {x in E : w^T (x - c) <= 0}.

    E = {x : (x-c)^T H^{-1} (x-c) <= 1}. In dimension 1 the update is the
    half interval. Returns (c_next, H_next).
    """
    n = c.size
    if n == 1:
        h = math.sqrt(float(H[0, 0]))
        sgn = 1.0 if w[0] > 0 else -1.0
        return c - sgn * np.array([h / 2.0]), np.array([[h * h / 4.0]])
    Hw = H @ w
    whw = float(w @ Hw)
    if whw <= 0:
        raise linalg.NotPositiveDefinite(-1, whw)
    c_next = c - Hw / ((n + 1.0) * math.sqrt(whw))
    H_next = (n * n / (n * n - 1.0)) * (H - (2.0 / (n + 1.0)) * np.outer(Hw, Hw) / whw)
    return c_next, 0.5 * (H_next + H_next.T)


def _half_logdet(H: np.ndarray) -> float:
    L = linalg.cholesky(H)
    return float(np.sum(np.log(np.diag(L))))


def run_ellipsoid(problem: Problem, horizon: int, R: Optional[float] = None,
                  r: Optional[float] = None, B: Optional[float] = None,
                  enforce: bool = True) -> CutTrace:
    """Ellipsoid method for constrained minimization via separation + values.

    Starts from the ball of radius R around the set's center. Guarantee once
    s >= 2 n^2 log(R/r): some visited center is feasible and
        best_value - f* <= 2 B R / r * exp(-s / (2 n^2)).
    The per-step volume contraction exp(-1/(2n)) is asserted on every step.
    """
    f, cset = problem.oracle, problem.constraint
    if cset is None:
        raise ValueError("ellipsoid needs a constraint set with a separation oracle")
    n = cset.dim
    R = float(R if R is not None else cset.R)
    r = float(r if r is not None else cset.r)
    B = float(B if B is not None else f.metadata["B"])
    c = cset.center.copy()
    H = R * R * np.eye(n)
    t_min = max(1, math.ceil(2 * n * n * math.log(R / r))) if R > r else 1
    shrink = math.exp(-1.0 / (2.0 * n))
    trace = CutTrace(meta={"algorithm": "ellipsoid", "R": R, "r": r, "B": B,
                           "t_min": t_min})
    best = math.inf
    feasible = False
    logv = _half_logdet(H)
    sep_calls = 0
    for s in range(1, int(horizon) + 1):
        if cset.contains(c):
            feasible = True
            best = min(best, f.value(c))
            w = f.subgradient(c)
            if float(w @ w) == 0.0:
                # zero subgradient: the center is optimal, nothing to cut
                trace.iters.append(s)
                trace.feasible_flags.append(True)
                trace.best_values.append(best)
                trace.log_volume_proxy.append(logv)
                trace.oracle_calls.append(
                    sep_calls + f.counts["zeroth"] + f.counts["first"])
                trace.meta["stopped_optimal"] = s
                break
        else:
            sep_calls += 1
            w = cset.separate(c)
        c, H = ellipsoid_step(c, H, w)
        logv_next = _half_logdet(H)
        if enforce and logv_next - logv > math.log(shrink) + 1e-9:
            raise AssertionError(f"ellipsoid volume factor broken at s={s}")
        logv = logv_next
        trace.iters.append(s)
        trace.feasible_flags.append(feasible)
        trace.best_values.append(best)
        trace.log_volume_proxy.append(logv)
        trace.oracle_calls.append(sep_calls + f.counts["zeroth"] + f.counts["first"])
        if enforce and problem.f_star is not None and s >= t_min:
            if not feasible:
                raise AssertionError(f"no feasible center found by s={s} >= t_min={t_min}")
            bound = 2.0 * B * R / r * math.exp(-s / (2.0 * n * n))
            if best - problem.f_star > bound + 1e-12:
                raise AssertionError(f"ellipsoid value bound broken at s={s}")
    return trace


# ------------------------------------------------------- exact 2-d center of gravity

def clip_polygon(verts: np.ndarray, w: np.ndarray, x0: np.ndarray) -> np.ndarray:
    """Intersect a convex polygon (CCW vertex array) with {x : w^T (x-x0) <= 0}."""
    out = []
    m = len(verts)
    for i in range(m):
        a, b = verts[i], verts[(i + 1) % m]
        da = float(w @ (a - x0))
        db = float(w @ (b - x0))
        if da <= 0:
            out.append(a)
        if (da < 0 < db) or (db < 0 < da):
            out.append(a + (da / (da - db)) * (b - a))
    return np.array(out) if out else np.zeros((0, 2))


def polygon_area(verts: np.ndarray) -> float:
    if len(verts) < 3:
        return 0.0
    x, y = verts[:, 0], verts[:, 1]
    return 0.5 * abs(float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y)))


def polygon_centroid(verts: np.ndarray) -> np.ndarray:
    x, y = verts[:, 0], verts[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    a = float(np.sum(cross)) / 2.0
    cx = float(np.sum((x + np.roll(x, -1)) * cross)) / (6.0 * a)
    cy = float(np.sum((y + np.roll(y, -1)) * cross)) / (6.0 * a)
    return np.array([cx, cy])


def _initial_polygon(cset: ConstraintSet) -> np.ndarray:
    if cset.kind != "box" or cset.dim != 2:
        raise ValueError("exact mode needs a 2-d box constraint set")
    c = cset.center
    # recover the corners from center and half-widths via projection
    lo = cset.project(c - 1e9 * np.ones(2))
    hi = cset.project(c + 1e9 * np.ones(2))
    return np.array([[lo[0], lo[1]], [hi[0], lo[1]], [hi[0], hi[1]], [lo[0], hi[1]]])


def run_center_of_gravity(problem: Problem, horizon: int, mode: str = "exact2d",
                          B: Optional[float] = None, enforce: bool = True,
                          n_samples: Optional[int] = None, stride: Optional[int] = None,
                          seed: int = 0) -> CutTrace:
    """Center-of-gravity cutting with exact 2-d polygon clipping or sampling.

    exact2d: the localization set is a polygon, its centroid is exact, and
    both the per-cut retained-area lower bound (>= 1/e of the previous area)
    and the value guarantee best - f* <= 2 B (1 - 1/e)^(s/2) are asserted.

    randomized: the centroid is estimated from hit-and-run samples; one
    iteration 'makes progress' when the new cut removes at least 25% of the
    current sample batch (the centered-cut guarantee at the accuracy the
    estimate maintains). No pointwise bound is enforced; the progress flags
    are returned in trace.meta["progress"].
    """
    f, cset = problem.oracle, problem.constraint
    if cset is None:
        raise ValueError("center of gravity needs a constraint set")
    if mode == "exact2d":
        if cset.dim != 2:
            raise DimensionMismatch(f"exact2d needs dim 2, got {cset.dim}")
        return _run_cog_exact2d(problem, int(horizon), B, enforce)
    if mode == "randomized":
        return _run_cog_randomized(problem, int(horizon), n_samples, stride, seed)
    raise ValueError(f"unknown mode {mode!r}")


def _run_cog_exact2d(problem: Problem, horizon: int, B: Optional[float],
                     enforce: bool) -> CutTrace:
    f = problem.oracle
    poly = _initial_polygon(problem.constraint)
    B = float(B if B is not None else f.metadata["B"])
    keep_frac = 1.0 / math.e
    trace = CutTrace(meta={"algorithm": "cog_exact2d", "B": B})
    best = math.inf
    for s in range(1, horizon + 1):
        area = polygon_area(poly)
        c = polygon_centroid(poly)
        best = min(best, f.value(c))
        w = f.subgradient(c)
        if np.linalg.norm(w) <= 1e-15:
            best = min(best, f.peek_value(c))
            trace.iters.append(s)
            trace.feasible_flags.append(True)
            trace.best_values.append(best)
            trace.log_volume_proxy.append(math.log(max(area, 1e-300)))
            trace.oracle_calls.append(f.counts["zeroth"] + f.counts["first"])
            break
        poly = clip_polygon(poly, w, c)
        new_area = polygon_area(poly)
        if enforce and new_area < keep_frac * area - 1e-12 * area:
            raise AssertionError(f"centroid cut kept less than 1/e of the area at s={s}")
        trace.iters.append(s)
        trace.feasible_flags.append(True)
        trace.best_values.append(best)
        trace.log_volume_proxy.append(math.log(max(new_area, 1e-300)))
        trace.oracle_calls.append(f.counts["zeroth"] + f.counts["first"])
        if enforce and problem.f_star is not None:
            bound = 2.0 * B * (1.0 - 1.0 / math.e) ** (s / 2.0)
            if best - problem.f_star > bound + 1e-12:
                raise AssertionError(f"center-of-gravity value bound broken at s={s}")
        if len(poly) < 3:
            break
    return trace


def _run_cog_randomized(problem: Problem, horizon: int, n_samples: Optional[int],
                        stride: Optional[int], seed: int) -> CutTrace:
    from .sampling import HitAndRun

    f, cset = problem.oracle, problem.constraint
    n = cset.dim
    N = int(n_samples) if n_samples else 100 * n
    stride = int(stride) if stride else 2 * n
    # localization region: the initial box plus accumulated cuts, as rows w.x <= c
    lo = cset.project(cset.center - 1e9 * np.ones(n))
    hi = cset.project(cset.center + 1e9 * np.ones(n))
    rows_w = [row for i in range(n) for row in (np.eye(n)[i], -np.eye(n)[i])]
    rows_c = [v for i in range(n) for v in (hi[i], -lo[i])]
    walker = HitAndRun.for_halfplanes(np.array(rows_w), np.array(rows_c),
                                      x0=cset.center.copy(), seed=seed)
    walker.burn_in(20 * n)
    trace = CutTrace(meta={"algorithm": "cog_randomized", "progress": [],
                           "removed_fraction": []})
    best = math.inf
    for s in range(1, horizon + 1):
        batch = walker.sample(N, stride=stride, whiten=True)
        c_hat = batch.mean(axis=0)
        best = min(best, f.value(c_hat))
        w = f.subgradient(c_hat)
        margin = batch @ w - float(w @ c_hat)
        removed = float(np.mean(margin > 0))
        trace.meta["removed_fraction"].append(removed)
        trace.meta["progress"].append(removed >= 0.25)
        walker.add_halfplane(w, float(w @ c_hat))
        survivors = batch[margin <= 0]
        if len(survivors):
            walker.x = survivors[np.argmin(np.linalg.norm(survivors - c_hat, axis=1))].copy()
        trace.iters.append(s)
        trace.feasible_flags.append(True)
        trace.best_values.append(best)
        trace.log_volume_proxy.append(math.nan)
        trace.oracle_calls.append(f.counts["zeroth"] + f.counts["first"])
    return trace


# ---------------------------------------------------------------- Vaidya's method

def regular_simplex_rows(n: int, R: float):
    """Rows (A, b) of a regular simplex {A x >= b} whose inscribed ball is B(0, R).

    The n+1 facet normals are unit vectors with pairwise inner product -1/n.
    """
    E = np.eye(n + 1) - np.ones((n + 1, n + 1)) / (n + 1)
    basis = np.linalg.qr(np.column_stack([np.ones(n + 1), np.eye(n + 1)[:, :n]]))[0][:, 1:]
    V = E @ basis
    V /= np.linalg.norm(V, axis=1, keepdims=True)
    return -V, np.full(n + 1, -R)


def _log_barrier_hessian(A: np.ndarray, slacks: np.ndarray) -> np.ndarray:
    W = A / slacks[:, None]
    return W.T @ W


def leverage_scores(A: np.ndarray, b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """sigma_i = (Hess F)^{-1}[a_i, a_i] / slack_i^2 for the log barrier of {Ax >= b}.

    The scores sum to n whenever the Hessian is nonsingular.
    """
    slacks = A @ x - b
    if np.any(slacks <= 0):
        raise ValueError("x is not strictly inside the polytope")
    H = _log_barrier_hessian(A, slacks)
    L = linalg.cholesky(H)
    W = A / slacks[:, None]
    X = np.empty_like(W)
    for i in range(W.shape[0]):
        X[i] = linalg.solve_cholesky(L, W[i])
    return np.einsum("ij,ij->i", W, X)


def _vaidya_grad_metric(A: np.ndarray, b: np.ndarray, x: np.ndarray):
    slacks = A @ x - b
    H = _log_barrier_hessian(A, slacks)
    L = linalg.cholesky(H)
    W = A / slacks[:, None]
    X = np.empty_like(W)
    for i in range(W.shape[0]):
        X[i] = linalg.solve_cholesky(L, W[i])
    sigma = np.einsum("ij,ij->i", W, X)
    grad = -(W * sigma[:, None]).sum(axis=0)
    Q = (W * sigma[:, None]).T @ W
    return grad, Q, sigma, slacks, H


def volumetric_value(A: np.ndarray, b: np.ndarray, x: np.ndarray) -> float:
    slacks = A @ x - b
    if np.any(slacks <= 0):
        return math.inf
    H = _log_barrier_hessian(A, slacks)
    return _half_logdet(H)


def volumetric_center(A: np.ndarray, b: np.ndarray, x0: np.ndarray,
                      tol: float = 1e-6, max_iter: int = 200) -> np.ndarray:
    """Minimize the volumetric barrier by damped Newton in the Q metric.

    Steps -Q^{-1} grad / (1 + lambda) with lambda = ||grad||_{Q^{-1}}, halved
    further if a step would leave the polytope or increase the barrier.
    """
    x = x0.copy()
    v = volumetric_value(A, b, x)
    for _ in range(max_iter):
        grad, Q, _, _, _ = _vaidya_grad_metric(A, b, x)
        d = linalg.solve_posdef(Q, -grad)
        lam = math.sqrt(max(float(-grad @ d), 0.0))
        if lam <= tol:
            return x
        step = 1.0 / (1.0 + lam)
        for _ in range(60):
            x_new = x + step * d
            v_new = volumetric_value(A, b, x_new)
            if v_new < v + 1e-12:
                break
            step /= 2.0
        else:
            return x
        x, v = x_new, v_new
    raise RuntimeError("volumetric recentering did not converge")


def run_vaidya(target: ConstraintSet, horizon: int, R: Optional[float] = None,
               eps: float = 0.006, enforce: bool = True) -> CutTrace:
    """Vaidya's cutting-plane method for the feasibility problem.

    Maintains a polytope {A x >= b} containing the target set, starting from
    a regular simplex whose inscribed ball B(0, R) contains it. Each round
    recenters to the volumetric center, then either drops the row with the
    smallest leverage score (when it is below eps) or queries the separation
    oracle and inserts the returned cut at leverage sqrt(eps)/5 (offset found
    by bisection). Stops as soon as a query point lands in the target.
    """
    n = target.dim
    R = float(R if R is not None else target.R)
    A, b = regular_simplex_rows(n, R)
    x = np.zeros(n)
    trace = CutTrace(meta={"algorithm": "vaidya", "case2_count": 0, "cases": []})
    feasible = False
    sep_calls = 0
    for s in range(1, int(horizon) + 1):
        x = volumetric_center(A, b, x)
        grad, Q, sigma, slacks, H = _vaidya_grad_metric(A, b, x)
        i_min = int(np.argmin(sigma))
        if sigma[i_min] < eps and A.shape[0] > n + 1:
            A = np.delete(A, i_min, axis=0)
            b = np.delete(b, i_min)
            trace.meta["cases"].append(1)
        else:
            trace.meta["case2_count"] += 1
            trace.meta["cases"].append(2)
            sep_calls += 1
            if target.contains(x):
                feasible = True
                trace.iters.append(s)
                trace.feasible_flags.append(True)
                trace.best_values.append(math.nan)
                trace.log_volume_proxy.append(-volumetric_value(A, b, x))
                trace.oracle_calls.append(sep_calls)
                break
            w = target.separate(x)
            c_row = -w
            u = float(c_row @ linalg.solve_posdef(H, c_row))
            tau = math.sqrt(eps) / 5.0
            tight = float(c_row @ x)
            # slack s solves u / s^2 = tau; bisect on the offset beta = tight - s
            s_star = math.sqrt(u / tau)
            lo_beta, hi_beta = tight - 4.0 * s_star, tight - s_star / 4.0
            for _ in range(200):
                mid = 0.5 * (lo_beta + hi_beta)
                val = u / (tight - mid) ** 2
                if val < tau:
                    lo_beta = mid
                else:
                    hi_beta = mid
                if hi_beta - lo_beta <= 1e-8 * max(1.0, abs(mid)):
                    break
            beta = 0.5 * (lo_beta + hi_beta)
            if enforce:
                achieved = u / (tight - beta) ** 2
                if abs(achieved - tau) > 1e-6 * tau + 1e-6:
                    raise AssertionError("insertion leverage missed its target")
            A = np.vstack([A, c_row])
            b = np.append(b, beta)
        trace.iters.append(s)
        trace.feasible_flags.append(feasible)
        trace.best_values.append(math.nan)
        trace.log_volume_proxy.append(-volumetric_value(A, b, x))
        trace.oracle_calls.append(sep_calls)
        if enforce and 2 * trace.meta["case2_count"] < s - 2:
            raise AssertionError("case-2 frequency invariant broken")
    trace.meta["feasible_point"] = x if feasible else None
    return trace
