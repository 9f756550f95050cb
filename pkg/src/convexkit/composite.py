"""Composite objectives (smooth + prox-friendly) and saddle-point solvers.

Composite side: soft thresholding, ISTA, FISTA on F = f + g with prox access
to g. Saddle side: SaddleProblem bundles phi with per-block mirror setups and
exact inner max/min evaluators so the duality gap of averaged iterates is
computable; SP-MD (nonsmooth) and SP-MP (smooth) run block mirror updates on
the product space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import linalg
from .harness import BoundSpec, RunTrace, TraceRecorder, checkpoints
from .mirror import MirrorSetup, euclidean_ball_setup, simplex_setup
from .oracles import FirstOrderOracle

__all__ = [
    "prox_l1",
    "CompositeProblem",
    "build_lasso",
    "run_ista",
    "run_fista",
    "SaddleProblem",
    "duality_gap",
    "build_matrix_game",
    "build_linear_classification",
    "build_max_smooth_saddle",
    "run_sp_md",
    "run_sp_mp",
]


def prox_l1(x: np.ndarray, threshold: float) -> np.ndarray:
    """Soft thresholding: the prox of threshold * ||.||_1."""
    return np.sign(x) * np.maximum(np.abs(x) - threshold, 0.0)


@dataclass
class CompositeProblem:
    """F(x) = f(x) + g(x), f beta-smooth with gradient access, g prox-friendly.

    oracle.value returns the TOTAL objective F; oracle.subgradient returns
    the gradient of the smooth part f only (what ISTA/FISTA query).
    """

    oracle: FirstOrderOracle
    prox: Callable[[np.ndarray, float], np.ndarray]  # (x, scale) -> prox_{scale g}(x)
    reg_value: Callable[[np.ndarray], float]
    beta: float
    x_star: Optional[np.ndarray] = None
    F_star: Optional[float] = None
    params: dict = field(default_factory=dict)

    @property
    def dim(self) -> int:
        return self.oracle.dim


def _fista_solve(grad, prox, beta, x0, iters):
    """Bare FISTA loop used to produce reference solutions."""
    x = x0.copy()
    y = x0.copy()
    lam = 0.0
    for _ in range(iters):
        lam_s = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * lam * lam))
        lam_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * lam_s * lam_s))
        gamma = (1.0 - lam_s) / lam_next
        y_next = prox(x - grad(x) / beta, 1.0 / beta)
        x = (1.0 - gamma) * y_next + gamma * y
        y = y_next
        lam = lam_s
    return y


def build_lasso(m: int, n: int, lam: float, seed: int = 0, noise: float = 0.1,
                sparsity: int = 5, ref_iters: int = 20000,
                cond: Optional[float] = None) -> CompositeProblem:
    """Least squares with an l1 penalty: F(x) = 1/2 ||Ax - b||^2 + lam ||x||_1.

    The reference optimum is produced by a long accelerated prox run and then
    certified against the subdifferential optimality condition (KKT residual
    below 1e-6 * lam), so downstream bound checks have a trustworthy F*.

    cond, when given, reshapes the singular values of A geometrically so that
    A^T A has that condition number; useful for exposing the sublinear decay
    phase, which a well-conditioned random design exits almost immediately.
    """
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((m, n)) / math.sqrt(m)
    if cond is not None:
        U, _, Vt = np.linalg.svd(A, full_matrices=False)
        A = U @ np.diag(np.geomspace(1.0, float(cond) ** -0.5, min(m, n))) @ Vt
    x_true = np.zeros(n)
    support = rng.choice(n, size=min(sparsity, n), replace=False)
    x_true[support] = rng.standard_normal(support.size)
    b = A @ x_true + noise * rng.standard_normal(m)
    beta = float(np.max(linalg.sym_eig(A.T @ A).eigenvalues))

    def smooth_grad(x):
        return A.T @ (A @ x - b)

    def reg_value(x):
        return lam * float(np.sum(np.abs(x)))

    def total_value(x):
        r = A @ x - b
        return 0.5 * float(r @ r) + reg_value(x)

    def prox(x, scale):
        return prox_l1(x, scale * lam)

    x_ref = _fista_solve(smooth_grad, prox, beta, np.zeros(n), ref_iters)
    # optimality: every coordinate of grad f must lie in lam * [-1, 1], with
    # equality tight against the sign on the support
    gref = smooth_grad(x_ref)
    on = np.abs(x_ref) > 1e-10
    kkt = max(
        float(np.max(np.abs(gref[on] + lam * np.sign(x_ref[on])))) if np.any(on) else 0.0,
        float(np.max(np.maximum(np.abs(gref[~on]) - lam, 0.0))) if np.any(~on) else 0.0,
    )
    if kkt > 1e-6 * max(lam, 1.0):
        raise RuntimeError(f"reference solve failed its optimality check ({kkt:.2e})")
    oracle = FirstOrderOracle(n, total_value, smooth_grad,
                              metadata={"beta": beta, "norm": "l2"})
    return CompositeProblem(oracle, prox, reg_value, beta, x_ref, total_value(x_ref),
                            {"m": m, "n": n, "lam": lam, "seed": seed})


def run_ista(problem: CompositeProblem, horizon: int, x1=None, record=None,
             enforce: bool = True) -> RunTrace:
    """Proximal gradient with step 1/beta.

    Guarantee: F(x_s) - F* <= beta ||x1 - x*||^2 / (2 s), and F decreases
    monotonically (asserted).
    """
    beta = problem.beta
    x = np.zeros(problem.dim) if x1 is None else np.asarray(x1, dtype=float)
    if problem.x_star is None or problem.F_star is None:
        raise ValueError("composite runs need the reference optimum")
    R2 = float(np.linalg.norm(x - problem.x_star) ** 2)
    t = int(horizon)
    bound = BoundSpec("ista", lambda s: beta * R2 / (2.0 * s))
    rec = TraceRecorder(problem.oracle, problem.F_star, bound, record or checkpoints(t),
                        enforce=enforce, meta={"algorithm": "ista"})
    prev = math.inf
    for s in range(1, t + 1):
        Fx = problem.oracle.peek_value(x)
        if enforce and Fx > prev + 1e-10 * max(1.0, abs(prev)):
            raise AssertionError(f"proximal gradient descent broke monotonicity at s={s}")
        prev = Fx
        if rec.wants(s):
            rec.record(s, x)
        g = problem.oracle.subgradient(x)
        x = problem.prox(x - g / beta, 1.0 / beta)
    return rec.trace


def run_fista(problem: CompositeProblem, horizon: int, x1=None, record=None,
              enforce: bool = True) -> RunTrace:
    """Accelerated proximal gradient (same momentum recursion as smooth AGD).

    Guarantee: F(y_s) - F* <= 2 beta ||x1 - x*||^2 / s^2. Not monotone.
    """
    beta = problem.beta
    x = np.zeros(problem.dim) if x1 is None else np.asarray(x1, dtype=float)
    if problem.x_star is None or problem.F_star is None:
        raise ValueError("composite runs need the reference optimum")
    R2 = float(np.linalg.norm(x - problem.x_star) ** 2)
    t = int(horizon)
    bound = BoundSpec("fista", lambda s: 2.0 * beta * R2 / (s * s))
    rec = TraceRecorder(problem.oracle, problem.F_star, bound, record or checkpoints(t),
                        enforce=enforce, meta={"algorithm": "fista"})
    y = x.copy()
    lam = 0.0
    for s in range(1, t + 1):
        if rec.wants(s):
            rec.record(s, y)
        lam_s = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * lam * lam))
        lam_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * lam_s * lam_s))
        gamma = (1.0 - lam_s) / lam_next
        g = problem.oracle.subgradient(x)
        y_next = problem.prox(x - g / beta, 1.0 / beta)
        x = (1.0 - gamma) * y_next + gamma * y
        y = y_next
        lam = lam_s
    return rec.trace


# ------------------------------------------------------------------ saddle points

@dataclass
class SaddleProblem:
    """min over x of max over y of phi(x, y), with exact inner evaluators.

    grad_x/grad_y are partial gradients of phi. inner_max(x) = max_y phi(x,y)
    and inner_min(y) = min_x phi(x,y) must be exact (or certified accurate)
    since the duality gap of averaged iterates is the checked quantity.
    L_X/L_Y bound the dual norms of the partial gradients; the beta block
    (b11, b12, b22, b21) holds the partial smoothness constants.
    """

    phi: Callable
    grad_x: Callable
    grad_y: Callable
    setup_x: MirrorSetup
    setup_y: MirrorSetup
    inner_max: Callable
    inner_min: Callable
    L_X: float = math.nan
    L_Y: float = math.nan
    betas: tuple = (math.nan,) * 4
    name: str = "saddle"
    params: dict = field(default_factory=dict)


def duality_gap(problem: SaddleProblem, x: np.ndarray, y: np.ndarray) -> float:
    return float(problem.inner_max(x) - problem.inner_min(y))


def build_matrix_game(A: np.ndarray) -> SaddleProblem:
    """phi(x, y) = x^T A y on simplex x simplex (row player minimizes)."""
    A = np.asarray(A, dtype=float)
    n, m = A.shape
    Amax = float(np.max(np.abs(A)))
    return SaddleProblem(
        phi=lambda x, y: float(x @ A @ y),
        grad_x=lambda x, y: A @ y,
        grad_y=lambda x, y: A.T @ x,
        setup_x=simplex_setup(n),
        setup_y=simplex_setup(m),
        inner_max=lambda x: float(np.max(A.T @ x)),
        inner_min=lambda y: float(np.min(A @ y)),
        L_X=Amax, L_Y=Amax,
        betas=(0.0, Amax, 0.0, Amax),
        name="matrix_game",
        params={"A": A},
    )


def build_linear_classification(A: np.ndarray, R: float = 1.0) -> SaddleProblem:
    """Margin maximization as a saddle point: phi(x, y) = -y^T A x.

    Rows of A are the (label-signed) data points; x ranges over the l2 ball
    of radius R, y over the simplex. min_x phi(x, y) = -R ||A^T y||_2 and
    max_y phi(x, y) = -min_i (A x)_i, both exact.
    """
    A = np.asarray(A, dtype=float)
    m, n = A.shape
    B = float(np.max(np.linalg.norm(A, axis=1)))
    return SaddleProblem(
        phi=lambda x, y: -float(y @ A @ x),
        grad_x=lambda x, y: -(A.T @ y),
        grad_y=lambda x, y: -(A @ x),
        setup_x=euclidean_ball_setup(n, R),
        setup_y=simplex_setup(m),
        inner_max=lambda x: -float(np.min(A @ x)),
        inner_min=lambda y: -R * float(np.linalg.norm(A.T @ y)),
        L_X=B, L_Y=B * R,
        betas=(0.0, B, 0.0, B),
        name="linear_classification",
        params={"A": A, "R": R},
    )


def build_max_smooth_saddle(fs, grads, betas_f, dim: int, R: float,
                            inner_min: Callable) -> SaddleProblem:
    """max-of-smooth via its saddle form: phi(x, y) = sum_i y_i f_i(x).

    fs/grads are the component functions and gradients (each beta_i-smooth,
    L_i-Lipschitz on the ball of radius R); y lives on the simplex. The
    caller supplies inner_min(y) = min_x sum_i y_i f_i(x) (closed form or a
    certified solve); inner_max is the exact vertex maximum max_i f_i(x).
    """
    mcomp = len(fs)
    beta = float(max(betas_f))

    def phi(x, y):
        return float(sum(y[i] * fs[i](x) for i in range(mcomp)))

    def grad_x(x, y):
        return sum(y[i] * grads[i](x) for i in range(mcomp))

    def grad_y(x, y):
        return np.array([fs[i](x) for i in range(mcomp)])

    L_components = [float(np.linalg.norm(g(np.zeros(dim)))) + b * R
                    for g, b in zip(grads, betas_f)]
    L_X = float(max(L_components))
    F_inf = max(abs(fs[i](np.zeros(dim))) + L_components[i] * R for i in range(mcomp))
    return SaddleProblem(
        phi=phi, grad_x=grad_x, grad_y=grad_y,
        setup_x=euclidean_ball_setup(dim, R),
        setup_y=simplex_setup(mcomp),
        inner_max=lambda x: float(max(fs[i](x) for i in range(mcomp))),
        inner_min=inner_min,
        L_X=L_X, L_Y=float(F_inf),
        betas=(beta, L_X, 0.0, L_X),
        name="max_smooth",
    )


class _GapOracle(FirstOrderOracle):
    """Shim so TraceRecorder can log saddle runs: value(point) = duality gap."""

    def __init__(self, problem: SaddleProblem):
        super().__init__(dim=0, value_fn=None, subgradient_fn=None, shape=())
        self._p = problem

    def peek_value(self, xy):
        x, y = xy
        return duality_gap(self._p, x, y)

    @property
    def counts(self):
        return {"zeroth": 0, "first": 0}


def _record_saddle(rec: TraceRecorder, s: int, pair) -> None:
    # the recorder's 'point' is the (x_bar, y_bar) pair; _GapOracle knows
    # how to score it, so the stock record() path applies unchanged
    rec.record(s, pair)


def run_sp_md(problem: SaddleProblem, horizon: int, record=None,
              enforce: bool = True) -> RunTrace:
    """Saddle-point mirror descent on the product space.

    Block weights a = L_X/R_X, b = L_Y/R_Y and eta = sqrt(2/t) give, for the
    uniform averages (x_bar_s, y_bar_s), the anytime duality-gap guarantee
      gap(s) <= (a R_X^2 + b R_Y^2)/(eta s)
                + (eta/2)(L_X^2/(a rho_X) + L_Y^2/(b rho_Y)),
    equal to (R_X L_X + R_Y L_Y) sqrt(2/t) at the horizon when rho = 1.
    """
    sx, sy = problem.setup_x, problem.setup_y
    RX, RY = math.sqrt(sx.R2), math.sqrt(sy.R2)
    a = problem.L_X / RX
    b = problem.L_Y / RY
    t = int(horizon)
    eta = math.sqrt(2.0 / t)
    const1 = a * sx.R2 + b * sy.R2
    const2 = 0.5 * (problem.L_X**2 / (a * sx.rho) + problem.L_Y**2 / (b * sy.rho))
    bound = BoundSpec("sp_md", lambda s: const1 / (eta * s) + eta * const2)
    rec = TraceRecorder(_GapOracle(problem), 0.0, bound, record or checkpoints(t),
                        enforce=enforce,
                        meta={"algorithm": "sp_md", "problem": problem.name, "eta": eta})
    x, y = sx.x1.copy(), sy.x1.copy()
    xsum, ysum = np.zeros_like(x), np.zeros_like(y)
    for s in range(1, t + 1):
        xsum += x
        ysum += y
        _record_saddle(rec, s, (xsum / s, ysum / s))
        gx = problem.grad_x(x, y)
        gy = -problem.grad_y(x, y)  # the y player ascends phi
        x = sx.md_step(x, gx, eta / a)
        y = sy.md_step(y, gy, eta / b)
    return rec.trace


def run_sp_mp(problem: SaddleProblem, horizon: int, record=None,
              enforce: bool = True) -> RunTrace:
    """Saddle-point mirror prox for smooth phi.

    Block weights a = 1/R_X^2, b = 1/R_Y^2 and
    eta = 1/(2 max(b11 R_X^2, b22 R_Y^2, b12 R_X R_Y, b21 R_X R_Y)) give the
    anytime guarantee gap(s) <= 4 max(...) / s on the averaged probe points.
    """
    sx, sy = problem.setup_x, problem.setup_y
    RX2, RY2 = sx.R2, sy.R2
    b11, b12, b22, b21 = problem.betas
    M = max(b11 * RX2, b22 * RY2, b12 * math.sqrt(RX2 * RY2),
            b21 * math.sqrt(RX2 * RY2))
    a = 1.0 / RX2
    b = 1.0 / RY2
    eta = 1.0 / (2.0 * M)
    t = int(horizon)
    bound = BoundSpec("sp_mp", lambda s: 4.0 * M / s)
    rec = TraceRecorder(_GapOracle(problem), 0.0, bound, record or checkpoints(t),
                        enforce=enforce,
                        meta={"algorithm": "sp_mp", "problem": problem.name, "eta": eta})
    x, y = sx.x1.copy(), sy.x1.copy()
    usum, vsum = np.zeros_like(x), np.zeros_like(y)
    for s in range(1, t + 1):
        u = sx.md_step(x, problem.grad_x(x, y), eta / a)
        v = sy.md_step(y, -problem.grad_y(x, y), eta / b)
        x = sx.md_step(x, problem.grad_x(u, v), eta / a)
        y = sy.md_step(y, -problem.grad_y(u, v), eta / b)
        usum += u
        vsum += v
        _record_saddle(rec, s, (usum / s, vsum / s))
    return rec.trace
