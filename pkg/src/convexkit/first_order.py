"""First-order methods on the black-box oracle model.

Every runner returns a RunTrace whose avg_gap column carries the quantity its
guarantee controls (averaged-iterate gap, current-iterate gap, or squared
distance, stated per runner) together with the closed-form bound curve. With
enforce=True (default) a violated bound raises BoundViolation immediately.
"""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np

from .harness import BoundSpec, RunTrace, TraceRecorder, checkpoints
from .oracles import ConstraintSet, FirstOrderOracle
from .problems import Problem

__all__ = [
    "set_diameter",
    "golden_section",
    "bracket_minimum",
    "gradient_mapping",
    "run_pgd_lipschitz",
    "run_gd_smooth",
    "run_pgd_smooth_constrained",
    "run_pgd_strongly_convex",
    "run_gd_smooth_strongly_convex",
    "run_frank_wolfe",
    "run_agd_strongly_convex",
    "run_agd_smooth",
    "BreakdownZeroDirection",
    "run_cg_linear",
    "run_cg_nonlinear",
    "geometric_ball_update",
    "run_geometric_descent",
]


class BreakdownZeroDirection(RuntimeError):
    """A conjugate-gradient direction lost all A-energy before convergence."""


def set_diameter(cset: ConstraintSet) -> float:
    """Euclidean diameter, exact for the standard sets, 2R as a fallback."""
    if cset.kind == "simplex":
        return math.sqrt(2.0)
    if cset.R is None:
        raise ValueError("set has no enclosing radius to derive a diameter from")
    return 2.0 * cset.R


def _meta(oracle: FirstOrderOracle, key: str) -> float:
    if key not in oracle.metadata:
        raise ValueError(f"oracle metadata is missing {key!r}")
    return float(oracle.metadata[key])


def _start(problem: Problem, x1) -> np.ndarray:
    if x1 is not None:
        return np.asarray(x1, dtype=float)
    if problem.constraint is not None:
        return problem.constraint.center.copy()
    return np.zeros(problem.oracle.shape)


def _dist_bound(problem: Problem, x1: np.ndarray, R: Optional[float]) -> float:
    """An a-priori bound on ||x1 - x*||: explicit R, or the true distance."""
    if R is not None:
        return float(R)
    if problem.x_star is None:
        raise ValueError("need R explicitly when the optimum is unknown")
    return float(np.linalg.norm(x1 - problem.x_star))


# ---------------------------------------------------------------- line search

def bracket_minimum(phi: Callable[[float], float], a: float = 0.0, b: float = 1.0,
                    grow: float = 2.0, max_iter: int = 200):
    """Expand [a, b] until a strict interior minimum of convex phi is bracketed."""
    fa, fb = phi(a), phi(b)
    m = 0.5 * (a + b)
    fm = phi(m)
    it = 0
    while not (fm <= fa and fm <= fb):
        if fa < fb:
            a = a - grow * (b - a)
            fa = phi(a)
        else:
            b = b + grow * (b - a)
            fb = phi(b)
        m = 0.5 * (a + b)
        fm = phi(m)
        it += 1
        if it > max_iter:
            raise RuntimeError("bracketing failed; function may be unbounded below")
    return a, b


def golden_section(phi: Callable[[float], float], a: float, b: float,
                   tol: float = 1e-10) -> float:
    """Golden-section minimization of a unimodal phi on [a, b]."""
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = phi(c), phi(d)
    while abs(b - a) > tol * (1.0 + abs(a) + abs(b)):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = phi(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = phi(d)
    return 0.5 * (a + b)


# --------------------------------------------------------- projected subgradient

def run_pgd_lipschitz(problem: Problem, horizon: int, x1=None, R: Optional[float] = None,
                      record=None, enforce: bool = True) -> RunTrace:
    """Projected subgradient with eta = R/(L sqrt(t)) and uniform averaging.

    Guarantee on the running average x_bar_s, valid for every s <= horizon:
        f(x_bar_s) - f* <= R^2/(2 eta s) + eta L^2 / 2,
    which at s = horizon equals R L / sqrt(horizon).
    """
    f, cset = problem.oracle, problem.constraint
    if cset is None:
        raise ValueError("projected subgradient needs a constraint set")
    L = _meta(f, "L")
    x = _start(problem, x1)
    Rb = float(R) if R is not None else float(cset.R)
    t = int(horizon)
    eta = Rb / (L * math.sqrt(t))
    bound = BoundSpec(
        "pgd_lipschitz", lambda s: Rb * Rb / (2.0 * eta * s) + eta * L * L / 2.0,
        t_min=1, description=f"anytime averaged-gap curve, horizon value {Rb*L/math.sqrt(t):.3e}")
    rec = TraceRecorder(f, problem.f_star, bound, record or checkpoints(t),
                        enforce=enforce, meta={"algorithm": "pgd_lipschitz", "eta": eta})
    xsum = np.zeros_like(x)
    for s in range(1, t + 1):
        xsum += x
        if rec.wants(s):
            rec.record(s, x, reported=xsum / s)
            rec.set_dist(np.linalg.norm(x - problem.x_star) if problem.x_star is not None
                         else math.nan)
        g = f.subgradient(x)
        x = cset.project(x - eta * g)
    return rec.trace


# ----------------------------------------------------------- smooth gradient descent

def run_gd_smooth(problem: Problem, horizon: int, x1=None, record=None,
                  enforce: bool = True) -> RunTrace:
    """Gradient descent, eta = 1/beta, on an unconstrained smooth problem.

    Guarantee: f(x_s) - f* <= 2 beta ||x1 - x*||^2 / (s - 1) for s >= 2.
    Also asserts the two classical monotonicity facts: descent in f and
    non-increasing distance to the optimum.
    """
    f = problem.oracle
    beta = _meta(f, "beta")
    x = _start(problem, x1)
    R2 = _dist_bound(problem, x, None) ** 2
    t = int(horizon)
    bound = BoundSpec("gd_smooth", lambda s: 2.0 * beta * R2 / (s - 1) if s >= 2 else math.inf,
                      t_min=2)
    rec = TraceRecorder(f, problem.f_star, bound, record or checkpoints(t), enforce=enforce,
                        meta={"algorithm": "gd_smooth"})
    prev_f = math.inf
    prev_d = math.inf
    for s in range(1, t + 1):
        g = f.subgradient(x)
        fx = f.peek_value(x)
        if enforce and fx > prev_f + 1e-12 * max(1.0, abs(prev_f)):
            raise AssertionError(f"descent broken at s={s}: {fx} > {prev_f}")
        prev_f = fx
        if problem.x_star is not None:
            d = float(np.linalg.norm(x - problem.x_star))
            if enforce and d > prev_d + 1e-10 * max(1.0, prev_d):
                raise AssertionError(f"distance to optimum grew at s={s}")
            prev_d = d
        if rec.wants(s):
            rec.record(s, x, grad=g)
            if problem.x_star is not None:
                rec.set_dist(prev_d)
        x = x - g / beta
    return rec.trace


def gradient_mapping(oracle: FirstOrderOracle, cset: ConstraintSet, x: np.ndarray,
                     beta: float):
    """Projected-gradient mapping: x_plus = P(x - grad/beta), g = beta (x - x_plus).

    Returns (g, x_plus). g plays the role of the gradient in the constrained
    descent analysis: f(x_plus) <= f(y) + g^T (x - y) - ||g||^2/(2 beta) for
    all feasible y.
    """
    grad = oracle.peek_subgradient(x)
    x_plus = cset.project(x - grad / beta)
    return beta * (x - x_plus), x_plus


def run_pgd_smooth_constrained(problem: Problem, horizon: int, x1=None, record=None,
                               enforce: bool = True) -> RunTrace:
    """Projected gradient descent with eta = 1/beta over a convex set.

    Guarantee: f(x_s) - f* <= (3 beta ||x1 - x*||^2 + f(x1) - f*) / s.
    """
    f, cset = problem.oracle, problem.constraint
    if cset is None:
        raise ValueError("constrained runner needs a constraint set")
    beta = _meta(f, "beta")
    x = cset.project(_start(problem, x1))
    R2 = _dist_bound(problem, x, None) ** 2
    gap1 = problem.gap(x)
    t = int(horizon)
    bound = BoundSpec("pgd_smooth_constrained",
                      lambda s: (3.0 * beta * R2 + gap1) / s, t_min=1)
    rec = TraceRecorder(f, problem.f_star, bound, record or checkpoints(t), enforce=enforce,
                        meta={"algorithm": "pgd_smooth_constrained"})
    for s in range(1, t + 1):
        if rec.wants(s):
            rec.record(s, x)
        g = f.subgradient(x)
        x = cset.project(x - g / beta)
    return rec.trace


def run_pgd_strongly_convex(problem: Problem, horizon: int, x1=None, record=None,
                            enforce: bool = True) -> RunTrace:
    """Projected subgradient for alpha-strongly-convex Lipschitz f.

    Steps eta_s = 2/(alpha (s+1)); the guarantee is on the weighted average
    sum_s 2s/(t(t+1)) x_s:  gap <= 2 L^2 / (alpha (t+1)), for every t.
    """
    f, cset = problem.oracle, problem.constraint
    if cset is None:
        raise ValueError("projected subgradient needs a constraint set")
    L = _meta(f, "L")
    alpha = _meta(f, "alpha")
    x = cset.project(_start(problem, x1))
    t = int(horizon)
    bound = BoundSpec("pgd_strongly_convex", lambda s: 2.0 * L * L / (alpha * (s + 1)), t_min=1)
    rec = TraceRecorder(f, problem.f_star, bound, record or checkpoints(t), enforce=enforce,
                        meta={"algorithm": "pgd_strongly_convex"})
    wsum = np.zeros_like(x)
    for s in range(1, t + 1):
        wsum += s * x
        if rec.wants(s):
            rec.record(s, x, reported=2.0 * wsum / (s * (s + 1)))
        g = f.subgradient(x)
        x = cset.project(x - (2.0 / (alpha * (s + 1))) * g)
    return rec.trace


def run_gd_smooth_strongly_convex(problem: Problem, horizon: int, x1=None,
                                  step: str = "1/beta", record=None,
                                  enforce: bool = True) -> RunTrace:
    """Gradient descent on a beta-smooth alpha-strongly-convex function.

    step="1/beta": checked quantity (avg_gap column) is ||x_s - x*||^2 with
    curve (1 - alpha/beta)^(s-1) ||x1 - x*||^2, and the per-step contraction
    factor is asserted directly.
    step="2/(alpha+beta)": per-step distance contraction ((k-1)/(k+1))^2 with
    k = beta/alpha, checked the same way.
    """
    f = problem.oracle
    beta, alpha = _meta(f, "beta"), _meta(f, "alpha")
    if problem.x_star is None:
        raise ValueError("distance guarantees need a known optimum")
    kappa = beta / alpha
    x = _start(problem, x1)
    xs = problem.x_star
    d2_0 = float(np.linalg.norm(x - xs) ** 2)
    if step == "1/beta":
        eta = 1.0 / beta
        factor = 1.0 - alpha / beta
        bid = "gd_smooth_sc"
    elif step == "2/(alpha+beta)":
        eta = 2.0 / (alpha + beta)
        factor = ((kappa - 1.0) / (kappa + 1.0)) ** 2
        bid = "gd_smooth_sc_avg_step"
    else:
        raise ValueError(f"unknown step rule {step!r}")
    t = int(horizon)
    bound = BoundSpec(bid, lambda s: d2_0 * factor ** (s - 1), t_min=1,
                      description="squared distance to optimum")
    rec = TraceRecorder(f, problem.f_star, bound, record or checkpoints(t), enforce=enforce,
                        meta={"algorithm": bid, "step": step})
    d2_prev = d2_0
    # extreme eigencomponents attain the factor exactly, so the realized
    # one-step ratio sits on the bound up to float noise; assert at the
    # distance level with an absolute floor at the representation scale of x*
    noise_floor = 1e-13 * max(1.0, float(np.linalg.norm(xs)))
    rate = math.sqrt(factor)
    for s in range(1, t + 1):
        d2 = float(np.linalg.norm(x - xs) ** 2)
        if enforce and s > 1:
            d, d_prev = math.sqrt(d2), math.sqrt(d2_prev)
            if d > rate * d_prev * (1.0 + 1e-9) + noise_floor:
                raise AssertionError(f"one-step contraction {factor} broken at s={s}")
        d2_prev = d2
        if rec.wants(s):
            rec.record(s, x, checked=d2)
            rec.set_dist(math.sqrt(d2))
        g = f.subgradient(x)
        x = x - eta * g
    return rec.trace


# ----------------------------------------------------------------- Frank-Wolfe

def run_frank_wolfe(problem: Problem, horizon: int, x1=None, record=None,
                    enforce: bool = True) -> RunTrace:
    """Conditional gradient with gamma_s = 2/(s+1) over an lmo-equipped set.

    Guarantee: f(x_s) - f* <= 2 beta D^2 / (s + 1) for s >= 2, D the set
    diameter. Iterate x_s is a convex combination of x1 and at most s - 1
    vertices; the vertex count is recorded in trace.meta["n_vertices"].
    """
    f, cset = problem.oracle, problem.constraint
    if cset is None or not cset.has_lmo:
        raise ValueError("Frank-Wolfe needs a set with a linear minimization oracle")
    beta = _meta(f, "beta")
    D = set_diameter(cset)
    x = _start(problem, x1)
    t = int(horizon)
    bound = BoundSpec("frank_wolfe", lambda s: 2.0 * beta * D * D / (s + 1), t_min=2)
    rec = TraceRecorder(f, problem.f_star, bound, record or checkpoints(t), enforce=enforce,
                        meta={"algorithm": "frank_wolfe", "diameter": D})
    n_vertices = []
    seen = set()
    for s in range(1, t + 1):
        if rec.wants(s):
            rec.record(s, x)
            n_vertices.append(len(seen))
        g = f.subgradient(x)
        v = cset.lmo(g)
        seen.add(tuple(np.round(v, 12)))
        gamma = 2.0 / (s + 1.0)
        x = (1.0 - gamma) * x + gamma * v
    rec.trace.meta["n_vertices"] = n_vertices
    return rec.trace


# ------------------------------------------------------------------ acceleration

def run_agd_strongly_convex(problem: Problem, horizon: int, x1=None, record=None,
                            enforce: bool = True) -> RunTrace:
    """Accelerated gradient descent, strongly convex case.

    Momentum coefficient (sqrt(k)-1)/(sqrt(k)+1); guarantee on the gradient
    step points: f(y_s) - f* <= (alpha+beta)/2 ||x1-x*||^2 exp(-(s-1)/sqrt(k)).
    """
    f = problem.oracle
    beta, alpha = _meta(f, "beta"), _meta(f, "alpha")
    kappa = beta / alpha
    mom = (math.sqrt(kappa) - 1.0) / (math.sqrt(kappa) + 1.0)
    x = _start(problem, x1)
    R2 = _dist_bound(problem, x, None) ** 2
    y = x.copy()
    t = int(horizon)
    bound = BoundSpec(
        "agd_strongly_convex",
        lambda s: 0.5 * (alpha + beta) * R2 * math.exp(-(s - 1) / math.sqrt(kappa)), t_min=1)
    rec = TraceRecorder(f, problem.f_star, bound, record or checkpoints(t), enforce=enforce,
                        meta={"algorithm": "agd_strongly_convex", "momentum": mom})
    for s in range(1, t + 1):
        if rec.wants(s):
            rec.record(s, y)
        g = f.subgradient(x)
        y_next = x - g / beta
        x = (1.0 + mom) * y_next - mom * y
        y = y_next
    return rec.trace


def run_agd_smooth(problem: Problem, horizon: int, x1=None, record=None,
                   enforce: bool = True) -> RunTrace:
    """Accelerated gradient descent, smooth case, with the lambda recursion.

    lambda_0 = 0, lambda_s = (1 + sqrt(1 + 4 lambda_{s-1}^2))/2,
    gamma_s = (1 - lambda_s)/lambda_{s+1}. Guarantee:
    f(y_s) - f* <= 2 beta ||x1 - x*||^2 / s^2. Invariant lambda_{s} >= (s+1)/2.
    """
    f = problem.oracle
    beta = _meta(f, "beta")
    x = _start(problem, x1)
    R2 = _dist_bound(problem, x, None) ** 2
    y = x.copy()
    t = int(horizon)
    bound = BoundSpec("agd_smooth", lambda s: 2.0 * beta * R2 / (s * s), t_min=1)
    rec = TraceRecorder(f, problem.f_star, bound, record or checkpoints(t), enforce=enforce,
                        meta={"algorithm": "agd_smooth"})
    lam = 0.0
    for s in range(1, t + 1):
        if rec.wants(s):
            rec.record(s, y)
        lam_s = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * lam * lam))
        lam_next = 0.5 * (1.0 + math.sqrt(1.0 + 4.0 * lam_s * lam_s))
        if enforce and lam_s < (s + 1) / 2.0 - 1e-9:
            raise AssertionError(f"lambda growth invariant broken at s={s}")
        gamma = (1.0 - lam_s) / lam_next
        g = f.subgradient(x)
        y_next = x - g / beta
        x = (1.0 - gamma) * y_next + gamma * y
        y = y_next
        lam = lam_s
    return rec.trace


# ------------------------------------------------------------- conjugate gradient

def run_cg_linear(A: np.ndarray, b: np.ndarray, x0=None, max_iter: Optional[int] = None,
                  tol: float = 1e-12, reorthogonalize: bool = True):
    """Conjugate gradient for A x = b, A symmetric positive definite.

    Returns a dict with the solution, residual norms, A-energy errors is left
    to the caller (x* = A^{-1} b is not computed here), and the full list of
    search directions for orthogonality checks.

    reorthogonalize=True projects each new residual against the stored
    orthonormal residual basis (a no-op in exact arithmetic, where residuals
    are already mutually orthogonal); this keeps the finite-termination
    property usable in floating point.
    """
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = b.size
    x = np.zeros(n) if x0 is None else np.asarray(x0, dtype=float).copy()
    r = b - A @ x
    p = r.copy()
    rs = float(r @ r)
    res_norms = [math.sqrt(rs)]
    directions = []
    xs = [x.copy()]
    basis = [r / math.sqrt(rs)] if (reorthogonalize and rs > 0.0) else []
    it = max_iter if max_iter is not None else n
    for _ in range(it):
        if math.sqrt(rs) <= tol * (1.0 + np.linalg.norm(b)):
            break
        Ap = A @ p
        pAp = float(p @ Ap)
        if not pAp > 0.0:
            raise BreakdownZeroDirection(
                f"direction energy {pAp:.3e} is not positive; A may not be PD")
        alpha = rs / pAp
        directions.append(p.copy())
        x = x + alpha * p
        r = r - alpha * Ap
        if basis:
            Q = np.stack(basis)
            for _ in range(2):  # twice beats the single-pass rounding floor
                r = r - Q.T @ (Q @ r)
        rs_new = float(r @ r)
        p = r + (rs_new / rs) * p
        rs = rs_new
        res_norms.append(math.sqrt(rs))
        xs.append(x.copy())
        if reorthogonalize and rs > 0.0 and len(basis) < n:
            basis.append(r / math.sqrt(rs))
    return {"x": x, "residual_norms": res_norms, "directions": directions, "iterates": xs}


def run_cg_nonlinear(problem: Problem, horizon: int, x1=None, variant: str = "fr",
                     ls_tol: float = 1e-12):
    """Nonlinear conjugate gradient with exact (golden-section) line search.

    variant "fr" uses ||g_{s+1}||^2/||g_s||^2, "pr" uses
    <g_{s+1} - g_s, g_{s+1}>/||g_s||^2 for the direction mixing.
    Returns the list of iterates (for cross-checking against linear CG on
    quadratics) plus gaps when the optimum is known.
    """
    if variant not in ("fr", "pr"):
        raise ValueError(f"unknown variant {variant!r}")
    f = problem.oracle
    x = _start(problem, x1)
    g = f.subgradient(x)
    p = -g
    iterates = [x.copy()]
    gaps = []
    for _ in range(int(horizon)):
        if np.linalg.norm(g) <= 1e-14:
            break

        def phi(lam, x=x, p=p):
            return f.peek_value(x + lam * p)

        a, bb = bracket_minimum(phi, 0.0, 1.0)
        lam = golden_section(phi, a, bb, tol=ls_tol)
        x = x + lam * p
        g_new = f.subgradient(x)
        if variant == "fr":
            beta_mix = float(g_new @ g_new) / float(g @ g)
        else:
            beta_mix = float((g_new - g) @ g_new) / float(g @ g)
        p = -g_new + beta_mix * p
        g = g_new
        iterates.append(x.copy())
        if problem.f_star is not None:
            gaps.append(problem.gap(x))
    return {"x": x, "iterates": iterates, "gaps": gaps}


# ------------------------------------------------------------- geometric descent

def geometric_ball_update(c: np.ndarray, R2: float, x_new: np.ndarray,
                          grad: np.ndarray, alpha: float, kappa: float):
    """One enclosing-ball update of geometric descent.

    Given the current ball B(c, R2) (squared radius), the line-search point
    x_new with gradient grad, returns the center and squared radius of a ball
    containing the intersection of
        B(c, R2 - |g|^2/(alpha^2 kappa))  and
        B(x_new^{++}, |g|^2/alpha^2 (1 - 1/kappa)),
    where x^{++} = x - grad/alpha. The branch on |g|^2/alpha^2 vs R2/2 picks
    whichever closed form applies.
    """
    g2 = float(grad @ grad) / (alpha * alpha)
    x_pp = x_new - grad / alpha
    if g2 < R2 / 2.0:
        return x_pp, g2 * (1.0 - 1.0 / kappa)
    a = x_pp - c
    na2 = float(a @ a)
    if na2 <= 1e-300:
        return x_pp, min(R2 - g2 / kappa, g2 * (1.0 - 1.0 / kappa))
    num = R2 + float((x_new - c) @ (x_new - c))
    c_next = c + (num / (2.0 * na2)) * a
    R2_next = R2 - g2 / kappa - (num / (2.0 * math.sqrt(na2))) ** 2
    return c_next, R2_next


def run_geometric_descent(problem: Problem, horizon: int, x1=None, record=None,
                          enforce: bool = True) -> RunTrace:
    """Geometric descent for smooth strongly convex f.

    Maintains a ball certified to contain x*, shrinking its squared radius by
    at least (1 - 1/sqrt(kappa)) per iteration. Checked quantity (avg_gap):
    ||x* - c_s||^2 against R0^2 (1 - 1/sqrt(kappa))^(s-1); the containment
    ||x* - c_s||^2 <= R_s^2 and the contraction are asserted each step.
    """
    f = problem.oracle
    beta, alpha = _meta(f, "beta"), _meta(f, "alpha")
    kappa = beta / alpha
    if problem.x_star is None:
        raise ValueError("geometric descent checks need the true optimum")
    xs = problem.x_star
    x = _start(problem, x1)
    g = f.subgradient(x)
    c = x - g / alpha
    R2 = (1.0 - 1.0 / kappa) * float(g @ g) / (alpha * alpha)
    R2_0 = R2
    shrink = 1.0 - 1.0 / math.sqrt(kappa)
    t = int(horizon)
    bound = BoundSpec("geometric_descent", lambda s: R2_0 * shrink ** (s - 1), t_min=1,
                      description="squared distance of ball center to optimum")
    rec = TraceRecorder(f, problem.f_star, bound, record or checkpoints(t), enforce=enforce,
                        meta={"algorithm": "geometric_descent", "kappa": kappa})
    for s in range(1, t + 1):
        d2 = float(np.linalg.norm(c - xs) ** 2)
        if enforce and d2 > R2 + 1e-9 * max(1.0, R2):
            raise AssertionError(f"optimum escaped the certified ball at s={s}")
        if rec.wants(s):
            rec.record(s, c, checked=d2)
            rec.set_dist(math.sqrt(d2))
        x_plus = x - g / beta

        def phi(lam, c=c, x_plus=x_plus):
            return f.peek_value((1.0 - lam) * c + lam * x_plus)

        a, b = bracket_minimum(phi, 0.0, 1.0)
        lam = golden_section(phi, a, b, tol=1e-12)
        x = (1.0 - lam) * c + lam * x_plus
        g = f.subgradient(x)
        if np.linalg.norm(g) <= 1e-14:
            break
        c_next, R2_next = geometric_ball_update(c, R2, x, g, alpha, kappa)
        if enforce and R2_next > shrink * R2 + 1e-9 * max(1.0, R2):
            raise AssertionError(f"ball contraction broken at s={s}")
        c, R2 = c_next, max(R2_next, 0.0)
        if R2 <= 1e-28:
            break
    return rec.trace
