"""Self-concordant barriers, Newton's method with decrement control, and the
short-step path-following scheme with its backward initialization phase.

Conventions: polytopes are {x : A x >= b} with strictly positive slacks on
the interior; the standard log barrier F(x) = -sum_i log(a_i^T x - b_i) has
parameter nu = m. All Newton algebra goes through Cholesky factorizations of
the barrier Hessian (hand-rolled, see linalg).

The working invariant of the path-following scheme is that the Newton
decrement of the penalized objective stays at or below 1/4 after every outer
step; every runner here checks it on the spot and raises InvariantBroken the
moment it fails.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Callable, List, Optional

import numpy as np

from . import linalg

__all__ = [
    "NotStrictlyFeasible",
    "EmptyInterior",
    "MaxIterations",
    "InvariantBroken",
    "Barrier",
    "LinearizedBarrier",
    "CentralPathState",
    "log_barrier_polytope",
    "log_det_barrier_diagonal",
    "newton_decrement",
    "newton_direction",
    "damped_newton_minimize",
    "analytic_center",
    "exp_concavity_gap",
    "path_follow",
    "path_follow_init",
    "find_interior_point",
    "solve_lp",
    "lp_vertex_optimum",
]


class NotStrictlyFeasible(Exception):
    """Barrier algebra evaluated outside the domain interior."""


class EmptyInterior(Exception):
    """The polytope has no strictly interior point (or none was found)."""


class MaxIterations(Exception):
    """Newton minimization failed to reach the requested decrement."""


class InvariantBroken(Exception):
    """The decrement invariant (<= 1/4) failed along a path-following run."""


@dataclass(frozen=True)
class Barrier:
    """A nu-self-concordant barrier presented through closed forms.

    value/grad/hess are functions of x; in_domain is the strict membership
    test. The Hessian must be positive definite on the interior (Cholesky is
    how every consumer touches it, so a failure surfaces immediately).
    """

    dim: int
    nu: float
    value: Callable[[np.ndarray], float]
    grad: Callable[[np.ndarray], np.ndarray]
    hess: Callable[[np.ndarray], np.ndarray]
    in_domain: Callable[[np.ndarray], bool]
    name: str = "barrier"

    def with_linear(self, t: float, c: np.ndarray) -> "LinearizedBarrier":
        """The penalized objective t * <c, x> + F(x) (same Hessian as F)."""
        return LinearizedBarrier(self, float(t), np.asarray(c, dtype=float))


@dataclass(frozen=True)
class LinearizedBarrier:
    barrier: Barrier
    t: float
    c: np.ndarray

    @property
    def dim(self) -> int:
        return self.barrier.dim

    @property
    def nu(self) -> float:
        return self.barrier.nu

    def value(self, x):
        return self.t * float(self.c @ x) + self.barrier.value(x)

    def grad(self, x):
        return self.t * self.c + self.barrier.grad(x)

    def hess(self, x):
        return self.barrier.hess(x)

    def in_domain(self, x):
        return self.barrier.in_domain(x)


@dataclass(frozen=True)
class CentralPathState:
    t: float
    x: np.ndarray
    decrement: float


def log_barrier_polytope(A: np.ndarray, b: np.ndarray) -> Barrier:
    """F(x) = -sum_i log(a_i^T x - b_i) on {A x > b}, nu = number of rows."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    if A.ndim != 2 or b.shape != (A.shape[0],):
        raise ValueError("need A (m, n) and b (m,)")
    m, n = A.shape

    def slacks(x):
        return A @ x - b

    def value(x):
        s = slacks(x)
        if np.any(s <= 0.0):
            raise NotStrictlyFeasible("log barrier evaluated at a non-interior point")
        return -float(np.sum(np.log(s)))

    def grad(x):
        s = slacks(x)
        if np.any(s <= 0.0):
            raise NotStrictlyFeasible("log barrier evaluated at a non-interior point")
        return -(A.T @ (1.0 / s))

    def hess(x):
        s = slacks(x)
        if np.any(s <= 0.0):
            raise NotStrictlyFeasible("log barrier evaluated at a non-interior point")
        return (A / (s * s)[:, None]).T @ A

    def in_domain(x):
        return bool(np.all(slacks(x) > 0.0))

    return Barrier(n, float(m), value, grad, hess, in_domain, name="log_polytope")


def log_det_barrier_diagonal(n: int) -> Barrier:
    """-log det of diag(x), i.e. -sum log x_i on the positive orthant; nu = n.

    Serves spectrahedron problems whose data is diagonal; the general
    semidefinite cone is out of scope here.
    """
    n = int(n)

    def value(x):
        if np.any(x <= 0.0):
            raise NotStrictlyFeasible("log-det barrier needs positive diagonal entries")
        return -float(np.sum(np.log(x)))

    def grad(x):
        if np.any(x <= 0.0):
            raise NotStrictlyFeasible("log-det barrier needs positive diagonal entries")
        return -1.0 / x

    def hess(x):
        if np.any(x <= 0.0):
            raise NotStrictlyFeasible("log-det barrier needs positive diagonal entries")
        return np.diag(1.0 / (x * x))

    return Barrier(n, float(n), value, grad, hess,
                   lambda x: bool(np.all(x > 0.0)), name="log_det_diagonal")


def _factor(obj, x) -> np.ndarray:
    return linalg.cholesky(obj.hess(x))


def newton_direction(obj, x, L: Optional[np.ndarray] = None):
    """Return (direction H^{-1} g, decrement sqrt(g^T H^{-1} g)) at x."""
    if not obj.in_domain(x):
        raise NotStrictlyFeasible("Newton step requested outside the domain")
    if L is None:
        L = _factor(obj, x)
    g = obj.grad(x)
    d = linalg.solve_cholesky(L, g)
    lam2 = float(g @ d)
    return d, math.sqrt(max(lam2, 0.0))


def newton_decrement(obj, x) -> float:
    """lambda(x) = || grad ||_{H^{-1}}, the local dual norm of the gradient."""
    return newton_direction(obj, x)[1]


def damped_newton_minimize(obj, x0, tol: float = 1e-10, max_iters: int = 500,
                           return_decrements: bool = False):
    """Minimize a standard self-concordant objective by Newton steps.

    Inside the quadratic region (decrement <= 1/4) the step is pure and the
    decrement must contract as lambda' <= 2 lambda^2 (checked; InvariantBroken
    otherwise). Outside, the step is damped by 1/(1 + lambda), which keeps the
    iterate strictly feasible; a feasibility backtrack guards roundoff.
    """
    x = np.asarray(x0, dtype=float).copy()
    decs: List[float] = []
    for _ in range(int(max_iters)):
        d, lam = newton_direction(obj, x)
        decs.append(lam)
        if lam <= tol:
            if return_decrements:
                return x, decs
            return x
        factor = 1.0 if lam <= 0.25 else 1.0 / (1.0 + lam)
        cand = x - factor * d
        halvings = 0
        while not obj.in_domain(cand):
            factor *= 0.5
            cand = x - factor * d
            halvings += 1
            if halvings > 60:
                raise MaxIterations("Newton step could not stay strictly feasible")
        x = cand
        if lam <= 0.25 and factor == 1.0:
            lam_next = newton_decrement(obj, x)
            if lam_next > 2.0 * lam * lam + 1e-9:
                raise InvariantBroken(
                    f"pure Newton step failed quadratic decrement decay: "
                    f"{lam:.3e} -> {lam_next:.3e}")
    raise MaxIterations(f"decrement did not reach {tol} in {max_iters} Newton steps")


def analytic_center(barrier: Barrier, x0, tol: float = 1e-10) -> np.ndarray:
    """Minimizer of the bare barrier; EmptyInterior when Newton diverges."""
    x0 = np.asarray(x0, dtype=float)
    if not barrier.in_domain(x0):
        raise NotStrictlyFeasible("analytic center needs a strictly interior start")
    try:
        return damped_newton_minimize(barrier, x0, tol=tol)
    except MaxIterations as exc:
        raise EmptyInterior(f"analytic-center Newton diverged: {exc}") from exc


def exp_concavity_gap(barrier: Barrier, x) -> float:
    """Smallest eigenvalue of H - (1/nu) g g^T; >= 0 certifies the barrier
    parameter nu at x (checked on sampled points by the test suite)."""
    g = barrier.grad(x)
    H = barrier.hess(x)
    M = H - np.outer(g, g) / barrier.nu
    return float(np.min(linalg.sym_eig(M).eigenvalues))


def path_follow(barrier: Barrier, c, x0, t0: float, eps: float,
                enforce: bool = True, max_steps: int = 500000) -> List[CentralPathState]:
    """Short-step path following: grow t by (1 + 1/(13 sqrt(nu))) and take one
    pure Newton step on the new penalized objective per outer iteration.

    Stops when the certificate 2 nu / t_k <= eps. The per-step invariant
    (decrement <= 1/4) and the decrement shift inequality
    lambda_{t'}(x) <= (t'/t) lambda_t(x) + (t'/t - 1) sqrt(nu)
    are asserted along the run when enforce is set.
    """
    c = np.asarray(c, dtype=float)
    nu = barrier.nu
    ratio = 1.0 + 1.0 / (13.0 * math.sqrt(nu))
    t = float(t0)
    x = np.asarray(x0, dtype=float).copy()
    if not barrier.in_domain(x):
        raise NotStrictlyFeasible("path following needs a strictly interior start")
    L = _factor(barrier, x)
    gF = barrier.grad(x)

    def decr(tt, gg, LL):
        v = linalg.solve_cholesky(LL, tt * c + gg)
        return math.sqrt(max(float((tt * c + gg) @ v), 0.0))

    lam = decr(t, gF, L)
    if lam > 0.25 + 1e-9:
        raise InvariantBroken(f"starting decrement {lam:.4f} exceeds 1/4")
    states = [CentralPathState(t, x.copy(), lam)]
    for _ in range(int(max_steps)):
        if 2.0 * nu / t <= eps:
            return states
        t_next = ratio * t
        lam_shift = decr(t_next, gF, L)
        if enforce and lam_shift > ratio * lam + (ratio - 1.0) * math.sqrt(nu) + 1e-9:
            raise InvariantBroken(
                f"decrement shift bound failed: {lam_shift:.4e} > "
                f"{ratio * lam + (ratio - 1.0) * math.sqrt(nu):.4e}")
        step = linalg.solve_cholesky(L, t_next * c + gF)
        x = x - step
        if not barrier.in_domain(x):
            raise InvariantBroken("path-following iterate left the domain")
        t = t_next
        L = _factor(barrier, x)
        gF = barrier.grad(x)
        lam = decr(t, gF, L)
        if enforce and lam > 0.25 + 1e-12:
            raise InvariantBroken(f"decrement invariant failed: {lam:.6f} > 1/4 at t={t:.3e}")
        states.append(CentralPathState(t, x.copy(), lam))
    raise MaxIterations(f"path following did not certify eps={eps} in {max_steps} steps")


def path_follow_init(barrier: Barrier, c, y0, enforce: bool = True,
                     max_steps: int = 500000):
    """Backward phase: y0 sits on the central path (t=1) of the auxiliary
    objective -grad F(y0); shrink t by (1 - 1/(13 sqrt(nu))) per step until
    the decrement of the TRUE penalized objective drops to 1/4.

    Returns (t0, x0, states) ready to hand to path_follow.
    """
    c = np.asarray(c, dtype=float)
    nu = barrier.nu
    shrink = 1.0 - 1.0 / (13.0 * math.sqrt(nu))
    y = np.asarray(y0, dtype=float).copy()
    if not barrier.in_domain(y):
        raise NotStrictlyFeasible("backward phase needs a strictly interior start")
    g0 = barrier.grad(y)  # frozen: the auxiliary objective is  -<g0, y>
    t = 1.0
    states = []
    for _ in range(int(max_steps)):
        L = _factor(barrier, y)
        gF = barrier.grad(y)
        v_true = linalg.solve_cholesky(L, t * c + gF)
        lam_true = math.sqrt(max(float((t * c + gF) @ v_true), 0.0))
        states.append(CentralPathState(t, y.copy(), lam_true))
        if lam_true <= 0.25:
            return t, y, states
        t_next = shrink * t
        step = linalg.solve_cholesky(L, -t_next * g0 + gF)
        y = y - step
        if not barrier.in_domain(y):
            raise InvariantBroken("backward-phase iterate left the domain")
        if enforce:
            g_aux = -t_next * g0 + barrier.grad(y)
            L2 = _factor(barrier, y)
            v = linalg.solve_cholesky(L2, g_aux)
            lam_aux = math.sqrt(max(float(g_aux @ v), 0.0))
            if lam_aux > 0.25 + 1e-9:
                raise InvariantBroken(
                    f"auxiliary-path decrement {lam_aux:.4f} > 1/4 at t'={t_next:.3e}")
        t = t_next
        if t < 1e-300:
            break
    raise InvariantBroken("backward phase never reached the 1/4 handoff decrement")


def find_interior_point(A: np.ndarray, b: np.ndarray, margin_tol: float = 1e-7,
                        box: Optional[float] = None) -> np.ndarray:
    """Find x with A x > b strictly, or raise EmptyInterior.

    Phase-1 construction: maximize the worst normalized slack delta subject
    to a_i^T x - ||a_i|| delta >= b_i inside a large bounding box, which is a
    bounded LP that this module's own path following solves. Any x whose
    certified best margin stays below margin_tol is declared to have no
    usable interior.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    m, n = A.shape
    norms = np.linalg.norm(A, axis=1)
    if np.any(norms == 0.0):
        raise ValueError("zero row in constraint matrix")
    An = A / norms[:, None]
    bn = b / norms
    x_hat, *_ = np.linalg.lstsq(An, bn + 1.0, rcond=None)
    margin = float(np.min(An @ x_hat - bn))
    if margin > margin_tol:
        return x_hat
    M = float(box) if box is not None else max(1e3, 10.0 * float(np.max(np.abs(x_hat))),
                                               10.0 * abs(margin), 10.0 * float(np.max(np.abs(bn))))
    # rows over (x, delta): data rows, |x_i| <= M, -3M <= delta <= M; the
    # lower bound on delta keeps the domain bounded when the data rows are
    # infeasible, otherwise centering drifts delta to -infinity
    rows = [np.concatenate([An, -np.ones((m, 1))], axis=1),
            np.concatenate([np.eye(n), np.zeros((n, 1))], axis=1),
            np.concatenate([-np.eye(n), np.zeros((n, 1))], axis=1),
            np.concatenate([np.zeros((1, n)), -np.ones((1, 1))], axis=1),
            np.concatenate([np.zeros((1, n)), np.ones((1, 1))], axis=1)]
    A1 = np.concatenate(rows, axis=0)
    b1 = np.concatenate([bn, -M * np.ones(2 * n + 1), [-3.0 * M]])
    x0 = np.clip(x_hat, -0.9 * M, 0.9 * M)
    d0 = float(np.min(An @ x0 - bn)) - 1.0
    if d0 <= -M:
        d0 = -0.9 * M
    y0 = np.concatenate([x0, [d0]])
    barrier = log_barrier_polytope(A1, b1)
    cost = np.zeros(n + 1)
    cost[n] = -1.0  # maximize delta
    t0, z0, _ = path_follow_init(barrier, cost, y0)
    nu = barrier.nu
    ratio = 1.0 + 1.0 / (13.0 * math.sqrt(nu))
    # follow the path just far enough to either expose a positive margin or
    # certify that none exists
    z, t = z0, t0
    while True:
        delta = z[n]
        if delta > margin_tol:
            x = z[:n]
            if np.all(A @ x - b > 0.0):
                return x
        if 2.0 * nu / t <= 0.5 * margin_tol:
            raise EmptyInterior(
                f"certified best margin {delta:.3e} (+/- {2.0 * nu / t:.1e}) "
                f"below {margin_tol}")
        t_next = ratio * t
        step = linalg.solve_cholesky(_factor(barrier, z), t_next * cost + barrier.grad(z))
        z = z - step
        if not barrier.in_domain(z):
            raise InvariantBroken("phase-1 iterate left the domain")
        t = t_next


def solve_lp(A, b, c, eps: float = 1e-8, x0=None, enforce: bool = True) -> dict:
    """Minimize c^T x over {A x >= b} by backward init + path following.

    Returns the final point, its value, and the duality-gap certificate
    {t_final, gap_bound = 2 nu / t_final}.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    y0 = find_interior_point(A, b) if x0 is None else np.asarray(x0, dtype=float)
    barrier = log_barrier_polytope(A, b)
    t0, z0, init_states = path_follow_init(barrier, c, y0, enforce=enforce)
    states = path_follow(barrier, c, z0, t0, eps, enforce=enforce)
    xf = states[-1].x
    tf = states[-1].t
    return {
        "x": xf,
        "value": float(c @ xf),
        "certificate": {"t_final": tf, "gap_bound": 2.0 * barrier.nu / tf},
        "states": states,
        "init_states": init_states,
        "nu": barrier.nu,
    }


def lp_vertex_optimum(A, b, c, feas_tol: float = 1e-9):
    """Brute-force LP optimum by vertex enumeration (desk-scale oracle).

    Solves every n-row square subsystem, keeps feasible solutions, returns
    (x*, value). Guarded to m <= 20, n <= 8 because the enumeration is
    combinatorial; ValueError beyond that.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    m, n = A.shape
    if m > 20 or n > 8:
        raise ValueError("vertex enumeration is limited to m <= 20, n <= 8")
    best_x, best_v = None, math.inf
    for rows in itertools.combinations(range(m), n):
        sub = A[list(rows)]
        try:
            x = np.linalg.solve(sub, b[list(rows)])
        except np.linalg.LinAlgError:
            continue
        if np.all(A @ x - b >= -feas_tol):
            v = float(c @ x)
            if v < best_v:
                best_x, best_v = x, v
    if best_x is None:
        raise ValueError("no feasible vertex found (unbounded or empty polytope)")
    return best_x, best_v
