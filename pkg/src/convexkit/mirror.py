"""Mirror maps and the mirror-descent family (MD, dual averaging, mirror prox).

A MirrorSetup bundles a mirror map with its canonical feasible set, the norm
it is strongly convex against, the constant rho of that strong convexity, and
the potential range R^2 = sup_X Phi - min_X Phi. Three setups are provided:

  euclidean ball    Phi = ||x||^2/2, rho = 1 (l2), R^2 = radius^2/2
  simplex           Phi = sum x log x, rho = 1 (l1), R^2 = log n
  spectrahedron     Phi = tr(X log X), rho = 1/2 (Schatten-1), R^2 = log n

Updates are in closed form for all three (Euclidean step + projection,
multiplicative weights + renormalization, matrix exponential + trace
renormalization).
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from . import linalg, sets
from .harness import BoundSpec, RunTrace, TraceRecorder, checkpoints
from .problems import Problem

__all__ = [
    "MirrorSetup",
    "euclidean_ball_setup",
    "simplex_setup",
    "spectrahedron_setup",
    "run_mirror_descent",
    "run_dual_averaging",
    "run_mirror_prox",
]


def _sym_clamp_apply(X: np.ndarray, fn: Callable[[float], float],
                     floor: Optional[float] = None) -> np.ndarray:
    dec = linalg.sym_eig(X)
    lam = dec.eigenvalues
    if floor is not None:
        # multiplicative iterates keep eigenvalues positive in exact
        # arithmetic; the floor only absorbs -1e-17-size Jacobi noise
        lam = np.maximum(lam, floor)
    vals = np.array([fn(float(v)) for v in lam])
    V = dec.eigenvectors
    out = (V * vals) @ V.T
    return 0.5 * (out + out.T)


class MirrorSetup:
    """A mirror map tied to its feasible set, with closed-form updates."""

    def __init__(self, kind: str, x1: np.ndarray, rho: float, R2: float,
                 norm_name: str, potential, md_step, da_point, bregman,
                 dual_norm, cset=None):
        self.kind = kind
        self.x1 = x1
        self.rho = float(rho)
        self.R2 = float(R2)
        self.norm_name = norm_name
        self.potential = potential
        self.md_step = md_step        # (x, g, eta) -> next feasible point
        self.da_point = da_point      # (sum_g, eta) -> feasible point
        self.bregman = bregman        # (x, y) -> divergence
        self.dual_norm = dual_norm
        self.cset = cset

    @property
    def shape(self):
        return self.x1.shape


def euclidean_ball_setup(dim: int, R: float = 1.0) -> MirrorSetup:
    cset = sets.ball(dim, R)

    def potential(x):
        return 0.5 * float(x @ x)

    def md_step(x, g, eta):
        return cset.project(x - eta * g)

    def da_point(sum_g, eta):
        return cset.project(-eta * sum_g)

    def bregman(x, y):
        d = x - y
        return 0.5 * float(d @ d)

    def dual_norm(g):
        return float(np.linalg.norm(g))

    return MirrorSetup("euclidean_ball", np.zeros(dim), 1.0, 0.5 * R * R, "l2",
                       potential, md_step, da_point, bregman, dual_norm, cset)


def simplex_setup(dim: int) -> MirrorSetup:
    cset = sets.simplex(dim)

    def potential(x):
        xp = x[x > 0]
        return float(np.sum(xp * np.log(xp)))

    def md_step(x, g, eta):
        y = x * np.exp(-eta * g)
        return y / float(np.sum(y))

    def da_point(sum_g, eta):
        z = -eta * sum_g
        z = z - z.max()  # softmax, stabilized
        y = np.exp(z)
        return y / float(np.sum(y))

    def bregman(x, y):
        mask = x > 0
        with np.errstate(divide="ignore"):  # x > 0 = y gives KL = +inf
            return float(np.sum(x[mask] * np.log(x[mask] / y[mask]))
                         - np.sum(x) + np.sum(y))

    def dual_norm(g):
        return float(np.max(np.abs(g)))

    return MirrorSetup("simplex", np.full(dim, 1.0 / dim), 1.0, math.log(dim), "l1",
                       potential, md_step, da_point, bregman, dual_norm, cset)


def spectrahedron_setup(n: int) -> MirrorSetup:
    cset = sets.spectrahedron(n)

    def potential(X):
        lam = linalg.sym_eig(X).eigenvalues
        lam = lam[lam > 0]
        return float(np.sum(lam * np.log(lam)))

    def sym_log(X):
        return _sym_clamp_apply(X, math.log, floor=1e-250)

    def sym_exp(S):
        return _sym_clamp_apply(S, lambda v: math.exp(min(v, 700.0)))

    def md_step(X, G, eta):
        Y = sym_exp(sym_log(X) - eta * G)
        return Y / float(np.trace(Y))

    def da_point(sum_G, eta):
        lam_shift = linalg.sym_eig(-eta * sum_G)
        vals = lam_shift.eigenvalues - lam_shift.eigenvalues.max()
        w = np.exp(vals)
        V = lam_shift.eigenvectors
        Y = (V * w) @ V.T
        return 0.5 * (Y + Y.T) / float(np.sum(w))

    def bregman(X, Y):
        return float(np.trace(X @ (sym_log(X) - sym_log(Y))) - np.trace(X) + np.trace(Y))

    def dual_norm(G):
        return float(np.max(np.abs(linalg.sym_eig(G).eigenvalues)))

    return MirrorSetup("spectrahedron", np.eye(n) / n, 0.5, math.log(n), "schatten1",
                       potential, md_step, da_point, bregman, dual_norm, cset)


# ---------------------------------------------------------------------- runners

def _lipschitz(problem: Problem, L: Optional[float]) -> float:
    if L is not None:
        return float(L)
    if "L" not in problem.oracle.metadata:
        raise ValueError("need a Lipschitz constant (metadata['L'] or argument)")
    return float(problem.oracle.metadata["L"])


def run_mirror_descent(problem: Problem, setup: MirrorSetup, horizon: int,
                       L: Optional[float] = None, record=None,
                       enforce: bool = True) -> RunTrace:
    """Mirror descent with eta = (R/L) sqrt(2 rho / t), uniform averaging.

    Anytime guarantee on the running average:
        f(avg_s) - f* <= R^2/(eta s) + eta L^2/(2 rho),
    equal to R L sqrt(2/(rho t)) at the horizon.
    """
    f = problem.oracle
    L = _lipschitz(problem, L)
    t = int(horizon)
    R = math.sqrt(setup.R2)
    eta = (R / L) * math.sqrt(2.0 * setup.rho / t)
    bound = BoundSpec("mirror_descent",
                      lambda s: setup.R2 / (eta * s) + eta * L * L / (2.0 * setup.rho))
    rec = TraceRecorder(f, problem.f_star, bound, record or checkpoints(t), enforce=enforce,
                        meta={"algorithm": "mirror_descent", "setup": setup.kind, "eta": eta})
    x = setup.x1.copy()
    xsum = np.zeros_like(x)
    for s in range(1, t + 1):
        xsum += x
        if rec.wants(s):
            rec.record(s, x, reported=xsum / s)
        g = f.subgradient(x)
        x = setup.md_step(x, g, eta)
    return rec.trace


def run_dual_averaging(problem: Problem, setup: MirrorSetup, horizon: int,
                       L: Optional[float] = None, record=None,
                       enforce: bool = True) -> RunTrace:
    """Lazy mirror descent: x_{s+1} built from the raw gradient sum.

    eta = (R/L) sqrt(rho/(2 t)); anytime guarantee on the running average:
        f(avg_s) - f* <= R^2/(eta s) + 2 eta L^2 / rho,
    equal to 2 R L sqrt(2/(rho t)) at the horizon. The iterates depend on the
    gradient sum only, hence are invariant to reordering past gradients.
    """
    f = problem.oracle
    L = _lipschitz(problem, L)
    t = int(horizon)
    R = math.sqrt(setup.R2)
    eta = (R / L) * math.sqrt(setup.rho / (2.0 * t))
    bound = BoundSpec("dual_averaging",
                      lambda s: setup.R2 / (eta * s) + 2.0 * eta * L * L / setup.rho)
    rec = TraceRecorder(f, problem.f_star, bound, record or checkpoints(t), enforce=enforce,
                        meta={"algorithm": "dual_averaging", "setup": setup.kind, "eta": eta})
    x = setup.x1.copy()
    sum_g = np.zeros_like(x)
    xsum = np.zeros_like(x)
    for s in range(1, t + 1):
        xsum += x
        if rec.wants(s):
            rec.record(s, x, reported=xsum / s)
        sum_g = sum_g + f.subgradient(x)
        x = setup.da_point(sum_g, eta)
    return rec.trace


def run_mirror_prox(problem: Problem, setup: MirrorSetup, horizon: int,
                    beta: Optional[float] = None, record=None,
                    enforce: bool = True) -> RunTrace:
    """Mirror prox (extra-gradient) for beta-smooth f, eta = rho / beta.

    Each round takes a probe step from x_s to y_{s+1}, then re-steps from x_s
    using the gradient at y_{s+1}. Guarantee on the average of the probe
    points: f(avg of y_2..y_{s+1}) - f* <= beta R^2 / (rho s).
    """
    f = problem.oracle
    if beta is None:
        beta = float(f.metadata["beta"])
    t = int(horizon)
    eta = setup.rho / beta
    bound = BoundSpec("mirror_prox", lambda s: beta * setup.R2 / (setup.rho * s))
    rec = TraceRecorder(f, problem.f_star, bound, record or checkpoints(t), enforce=enforce,
                        meta={"algorithm": "mirror_prox", "setup": setup.kind, "eta": eta})
    x = setup.x1.copy()
    ysum = np.zeros_like(x)
    for s in range(1, t + 1):
        g_x = f.subgradient(x)
        y = setup.md_step(x, g_x, eta)
        g_y = f.subgradient(y)
        x = setup.md_step(x, g_y, eta)
        ysum += y
        if rec.wants(s):
            rec.record(s, y, reported=ysum / s)
    return rec.trace
