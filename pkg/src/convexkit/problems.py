"""Concrete test problems: builders, optima, and JSON config round-tripping.

Each builder returns a Problem bundling the oracle, an optional constraint
set, and whatever optimum information is known in closed form. Builders are
deterministic functions of (params, seed).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import sets
from .oracles import ConstraintSet, FirstOrderOracle

__all__ = [
    "UnknownProblemKind",
    "Problem",
    "make_quadratic",
    "make_diag_quadratic",
    "make_l1_on_ball",
    "make_max_plus_quadratic",
    "lower_bound_instance_nonsmooth",
    "make_smooth_hard_tridiag",
    "problem_from_config",
    "problem_to_config",
]


class UnknownProblemKind(Exception):
    """The config names a problem kind that is not registered."""


@dataclass
class Problem:
    kind: str
    oracle: FirstOrderOracle
    constraint: Optional[ConstraintSet]
    x_star: Optional[np.ndarray]
    f_star: Optional[float]
    params: dict = field(default_factory=dict)
    seed: Optional[int] = None

    def gap(self, x: np.ndarray) -> float:
        """Suboptimality f(x) - f*, computed without touching oracle counters."""
        if self.f_star is None:
            raise ValueError(f"problem {self.kind!r} has no known optimum value")
        return self.oracle.peek_value(x) - self.f_star

    @property
    def dim(self) -> int:
        return self.oracle.dim


def _rng(seed: Optional[int]) -> np.random.Generator:
    return np.random.default_rng(seed)


def make_quadratic(dim: int, alpha: float, beta: float, seed: Optional[int] = 0,
                   constraint: Optional[dict] = None) -> Problem:
    """f(x) = 1/2 (x-x*)^T Q (x-x*) with spectrum spread over [alpha, beta].

    The spectrum endpoints are hit exactly, so alpha and beta are the true
    strong-convexity and smoothness constants.
    """
    if not (0 < alpha <= beta):
        raise ValueError("need 0 < alpha <= beta")
    rng = _rng(seed)
    U = np.linalg.qr(rng.standard_normal((dim, dim)))[0]
    lam = np.linspace(alpha, beta, dim) if dim > 1 else np.array([beta])
    Q = (U * lam) @ U.T
    Q = 0.5 * (Q + Q.T)
    x_star = rng.standard_normal(dim)
    x_star *= 0.5 / max(np.linalg.norm(x_star), 1e-12)

    def value(x):
        d = x - x_star
        return 0.5 * d @ Q @ d

    def grad(x):
        return Q @ (x - x_star)

    oracle = FirstOrderOracle(dim, value, grad,
                              metadata={"alpha": float(lam[0]), "beta": float(lam[-1]),
                                        "norm": "l2", "Q": Q})
    cset = sets.set_from_config(constraint) if constraint else None
    params = {"dim": dim, "alpha": alpha, "beta": beta}
    if constraint:
        params["constraint"] = constraint
    return Problem("quadratic", oracle, cset, x_star, 0.0, params, seed)


def make_diag_quadratic(betas, x_star=None, seed: Optional[int] = 0) -> Problem:
    """f(x) = 1/2 sum_i betas[i] * (x_i - x*_i)^2.

    Directional smoothness along e_i is exactly betas[i]. For a start x1 the
    weighted level-set radius sup {||x - x*||_w : f(x) <= f(x1)} with weights
    w_i = betas[i]^p has the closed form sqrt(2 (f(x1)-f*) max_i betas[i]^(p-1)),
    which tests use as an exact reference.
    """
    betas = np.asarray(betas, dtype=float)
    n = betas.size
    if np.any(betas <= 0):
        raise ValueError("betas must be positive")
    if x_star is None:
        x_star = _rng(seed).standard_normal(n)
    x_star = np.asarray(x_star, dtype=float)

    def value(x):
        d = x - x_star
        return 0.5 * float(np.sum(betas * d * d))

    def grad(x):
        return betas * (x - x_star)

    oracle = FirstOrderOracle(n, value, grad,
                              metadata={"alpha": float(betas.min()), "beta": float(betas.max()),
                                        "betas": betas, "norm": "l2"})
    return Problem("diag_quadratic", oracle, None, x_star, 0.0,
                   {"betas": betas.tolist(), "x_star": x_star.tolist()}, seed)


def make_l1_on_ball(dim: int, R: float = 1.0) -> Problem:
    """f(x) = ||x||_1 over the Euclidean ball of radius R; optimum 0 at the origin."""

    def value(x):
        return float(np.sum(np.abs(x)))

    def grad(x):
        return np.sign(x)

    L = float(np.sqrt(dim))
    oracle = FirstOrderOracle(dim, value, grad,
                              metadata={"L": L, "B": R * L, "norm": "l2"})
    return Problem("l1_on_ball", oracle, sets.ball(dim, R), np.zeros(dim), 0.0,
                   {"dim": dim, "R": R}, None)


def make_max_plus_quadratic(dim: int, alpha: float, gamma: float) -> Problem:
    """f(x) = gamma * max_i x_i + alpha/2 ||x||^2, subgradient at the first argmax.

    Minimized at x = -(gamma/(alpha*dim)) * ones with value -gamma^2/(2*alpha*dim).
    This is the classic resisting instance: started at 0, any method that only
    ever moves inside the span of observed subgradients keeps f >= 0 for the
    first dim-1 steps.
    """

    def value(x):
        return gamma * float(np.max(x)) + 0.5 * alpha * float(x @ x)

    def grad(x):
        g = alpha * x.copy()
        g[int(np.argmax(x))] += gamma
        return g

    x_star = np.full(dim, -gamma / (alpha * dim))
    f_star = -gamma * gamma / (2.0 * alpha * dim)
    oracle = FirstOrderOracle(dim, value, grad,
                              metadata={"alpha": alpha, "gamma": gamma, "norm": "l2"})
    return Problem("max_plus_quadratic", oracle, None, x_star, f_star,
                   {"dim": dim, "alpha": alpha, "gamma": gamma}, None)


def lower_bound_instance_nonsmooth(t: int, R: float, L: float) -> Problem:
    """The t-step hard instance for Lipschitz optimization over a ball.

    Parameters alpha = (L/R)/(1+sqrt(t)) and gamma = L sqrt(t)/(1+sqrt(t))
    make every black-box method started at 0 suffer
    min_s f(x_s) - f* >= R L / (2 (1 + sqrt(t))) during the first t queries.
    """
    st = np.sqrt(t)
    alpha = (L / R) / (1.0 + st)
    gamma = L * st / (1.0 + st)
    prob = make_max_plus_quadratic(t, alpha, gamma)
    prob.constraint = sets.ball(t, R)
    prob.oracle.metadata.update({"L": L, "R": R, "floor": R * L / (2.0 * (1.0 + st))})
    prob.params.update({"t": t, "R": R, "L": L})
    prob.kind = "lower_bound_nonsmooth"
    return prob


def make_smooth_hard_tridiag(t: int, beta: float = 1.0) -> Problem:
    """The smooth lower-bound instance: a tridiagonal quadratic in dim 2t+1.

    f(x) = beta/8 * (x^T T x) - beta/4 * x_1 with T = tridiag(-1, 2, -1).
    Closed-form optimum: x*_i = 1 - i/(2t+2), f* = -beta/8 * (1 - 1/(2t+2)).
    Any method started at 0 whose iterates stay in the span of observed
    gradients has f(x_s) - f* >= 3 beta ||x*||^2 / (32 (s+1)(t+1)) for
    s <= t; at s = t this is the 3 beta ||x*||^2 / (32 (t+1)^2) floor,
    stored in metadata["floor"].
    """
    n = 2 * t + 1

    def apply_T(x):
        y = 2.0 * x
        y[:-1] -= x[1:]
        y[1:] -= x[:-1]
        return y

    def value(x):
        return beta / 8.0 * float(x @ apply_T(x)) - beta / 4.0 * x[0]

    def grad(x):
        g = beta / 4.0 * apply_T(x)
        g[0] -= beta / 4.0
        return g

    i = np.arange(1, n + 1, dtype=float)
    x_star = 1.0 - i / (n + 1.0)
    f_star = -beta / 8.0 * (1.0 - 1.0 / (n + 1.0))
    floor = 3.0 * beta * float(x_star @ x_star) / (32.0 * (t + 1.0) ** 2)
    oracle = FirstOrderOracle(n, value, grad,
                              metadata={"beta": beta, "norm": "l2", "floor": floor})
    return Problem("smooth_hard_tridiag", oracle, None, x_star, f_star,
                   {"t": t, "beta": beta}, None)


_PROBLEM_BUILDERS = {
    "quadratic": lambda p, s: make_quadratic(int(p["dim"]), float(p["alpha"]), float(p["beta"]),
                                             s, p.get("constraint")),
    "diag_quadratic": lambda p, s: make_diag_quadratic(p["betas"], p.get("x_star"), s),
    "l1_on_ball": lambda p, s: make_l1_on_ball(int(p["dim"]), float(p.get("R", 1.0))),
    "max_plus_quadratic": lambda p, s: make_max_plus_quadratic(int(p["dim"]), float(p["alpha"]),
                                                               float(p["gamma"])),
    "lower_bound_nonsmooth": lambda p, s: lower_bound_instance_nonsmooth(int(p["t"]),
                                                                         float(p["R"]),
                                                                         float(p["L"])),
    "smooth_hard_tridiag": lambda p, s: make_smooth_hard_tridiag(int(p["t"]),
                                                                 float(p.get("beta", 1.0))),
}


def problem_from_config(cfg: dict) -> Problem:
    """Build a problem from {"kind": ..., "params": {...}, "seed": int|null}."""
    if not isinstance(cfg, dict):
        raise UnknownProblemKind("problem config must be an object")
    kind = cfg.get("kind")
    if kind not in _PROBLEM_BUILDERS:
        raise UnknownProblemKind(f"unknown problem kind {kind!r}")
    extra = set(cfg) - {"kind", "params", "seed"}
    if extra:
        raise UnknownProblemKind(f"unexpected problem config keys {sorted(extra)}")
    return _PROBLEM_BUILDERS[kind](cfg.get("params", {}), cfg.get("seed"))


def problem_to_config(problem: Problem) -> dict:
    cfg = {"kind": problem.kind, "params": dict(problem.params)}
    if problem.seed is not None:
        cfg["seed"] = problem.seed
    return cfg
