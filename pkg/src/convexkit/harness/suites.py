"""Acceptance suite: every advertised guarantee re-verified at desk scale.

Each criterion is a standalone callable returning (passed, detail); run_suite
wraps them with timing, a wall-clock budget, and optional thread parallelism
(capped by the CONVEXKIT_THREADS environment variable). The pytest acceptance
module and the CLI `suite` subcommand both drive this file, so the printed
pass/fail lines are the single source of truth for the toolkit's claims.
"""

from __future__ import annotations

import math
import os
import tempfile
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .. import composite, cutting_plane, first_order, interior_point, mirror
from .. import problems, sampling, sets, stochastic
from ..oracles import FirstOrderOracle
from ..problems import Problem
from ..stochastic import replicate_rng
from . import registry
from .core import check_bound, fit_rate
from .registry import bound_from_trace


@dataclass
class SuiteOutcome:
    index: int
    name: str
    tags: tuple
    passed: bool
    detail: str
    seconds: float
    budget_s: float

    @property
    def line(self) -> str:
        mark = "PASS" if self.passed else "FAIL"
        return (f"{mark} [{self.index:02d}] {self.name}: {self.detail} "
                f"({self.seconds:.2f}s, budget {self.budget_s:.0f}s)")


def _recheck(traces) -> bool:
    """Re-verify the bound a run recorded, from the trace alone."""
    return check_bound(traces, bound_from_trace(traces[0])).passed


# ---------------------------------------------------------------- criterion 1


def crit_ellipsoid_geometry():
    """Per-cut volume factor <= exp(-1/(2n)) over random ellipsoids, dims 2-20."""
    rng = np.random.default_rng(1)
    worst_margin = -math.inf
    violations = 0
    for _ in range(1000):
        n = int(rng.integers(2, 21))
        M = rng.standard_normal((n, n))
        H = M @ M.T + 0.5 * np.eye(n)
        c = rng.standard_normal(n)
        w = rng.standard_normal(n)
        w /= np.linalg.norm(w)
        c2, H2 = cutting_plane.ellipsoid_step(c, H, w)
        half_logdet = 0.5 * (np.linalg.slogdet(H2)[1] - np.linalg.slogdet(H)[1])
        margin = half_logdet - (-1.0 / (2.0 * n))
        worst_margin = max(worst_margin, margin)
        if margin > 1e-10:
            violations += 1
    ok = violations == 0
    return ok, (f"{violations}/1000 cuts broke the factor; worst log-margin "
                f"{worst_margin:.2e}")


# ---------------------------------------------------------------- criterion 2


def _box2d_problem(value, grad, B, x_star, name):
    oracle = FirstOrderOracle(2, value, grad, metadata={"B": B})
    cset = sets.box([-1.0, -1.0], [1.0, 1.0])
    return Problem(name, oracle, cset, np.asarray(x_star, dtype=float), 0.0,
                   {"B": B}, None)


def crit_center_of_gravity():
    """Exact 2-d centroid cuts: value bound pointwise plus the retained-area law."""
    p1 = _box2d_problem(lambda x: float(abs(x[0]) + abs(x[1])),
                        lambda x: np.sign(x), 2.0, [0.0, 0.0], "box_l1")

    def v2(x):
        return float(max(abs(x[0] - 0.3), abs(x[1] + 0.2)))

    def g2(x):
        a, b = abs(x[0] - 0.3), abs(x[1] + 0.2)
        if a >= b:
            return np.array([math.copysign(1.0, x[0] - 0.3), 0.0])
        return np.array([0.0, math.copysign(1.0, x[1] + 0.2)])

    p2 = _box2d_problem(v2, g2, 1.3, [0.3, -0.2], "box_linf_shift")

    checked = 0
    for prob in (p1, p2):
        tr = cutting_plane.run_center_of_gravity(prob, 60, mode="exact2d")
        B = tr.meta["B"]
        for s, best in zip(tr.iters, tr.best_values):
            if best > 2.0 * B * (1.0 - 1.0 / math.e) ** (s / 2.0) + 1e-12:
                return False, f"value bound broken at s={s} on {prob.kind}"
            checked += 1

    rng = np.random.default_rng(2)
    worst = math.inf
    for _ in range(100):
        poly = np.array([[-1.0, -1.0], [1.0, -1.0], [1.0, 1.0], [-1.0, 1.0]])
        for _ in range(int(rng.integers(0, 4))):
            wts = rng.random(len(poly))
            pt = (wts / wts.sum()) @ poly
            d = rng.standard_normal(2)
            d /= np.linalg.norm(d)
            cand = cutting_plane.clip_polygon(poly, d, pt)
            if len(cand) >= 3 and cutting_plane.polygon_area(cand) > 0.05:
                poly = cand
        z = cutting_plane.polygon_centroid(poly)
        w = rng.standard_normal(2)
        w /= np.linalg.norm(w)
        kept = cutting_plane.clip_polygon(poly, w, z)
        frac = cutting_plane.polygon_area(kept) / cutting_plane.polygon_area(poly)
        worst = min(worst, frac)
        if frac < 1.0 / math.e - 1e-9:
            return False, f"centroid cut kept only {frac:.4f} of the area"
    return True, (f"{checked} bound points on 2 problems; worst centroid-cut "
                  f"retention {worst:.4f} >= 1/e ~ {1/math.e:.4f}")


# ---------------------------------------------------------------- criterion 3


def crit_conjugate_gradient():
    """Finite termination on random PD systems and sqrt(kappa) iteration scaling."""
    rng = np.random.default_rng(3)
    for trial in range(50):
        n = int(rng.integers(2, 101))
        M = rng.standard_normal((n, n))
        A = M @ M.T / n + 0.2 * np.eye(n)
        b = rng.standard_normal(n)
        res = first_order.run_cg_linear(A, b, tol=1e-10)
        iters = len(res["residual_norms"]) - 1
        rel = res["residual_norms"][-1] / np.linalg.norm(b)
        if iters > n or rel > 1e-8:
            return False, (f"system {trial} (n={n}): {iters} iters, "
                           f"relative residual {rel:.2e}")

    kappas = [10.0, 100.0, 1000.0, 10000.0]
    counts = []
    n = 800
    for kappa in kappas:
        # cluster the spectrum's low end: an isolated smallest eigenvalue
        # deflates in a few Ritz steps and hides the sqrt(kappa) scaling
        A = np.diag(1.0 + (kappa - 1.0) * np.linspace(0.0, 1.0, n) ** 2)
        b = rng.standard_normal(n)
        res = first_order.run_cg_linear(A, b, max_iter=4 * n, tol=1e-6)
        counts.append(len(res["residual_norms"]) - 1)
    slope = float(np.polyfit(np.log(kappas), np.log(counts), 1)[0])
    ok = abs(slope - 0.5) <= 0.15
    return ok, (f"50/50 systems solved exactly within n iterations; iteration "
                f"counts {counts} vs kappa give log-log slope {slope:.3f}")


# ---------------------------------------------------------------- criterion 4


def _fw_problem(dim: int) -> Problem:
    rng = np.random.default_rng(44)
    p = rng.random(dim) + 0.2
    p /= p.sum()

    def value(x):
        return 0.5 * float(np.sum((x - p) ** 2))

    def grad(x):
        return x - p

    oracle = FirstOrderOracle(dim, value, grad, metadata={"beta": 1.0})
    return Problem("simplex_quadratic", oracle, sets.simplex(dim), p, 0.0,
                   {"dim": dim}, None)


def crit_first_order_suite():
    """Every basic gradient-method bound holds pointwise at slack 1.0."""
    ball = {"kind": "ball", "dim": 20, "R": 1.0}
    runs = []

    q = problems.make_l1_on_ball(20, R=1.0)
    runs.append(("pgd_lipschitz", first_order.run_pgd_lipschitz(q, 500)))

    q = problems.make_quadratic(20, 0.05, 5.0, seed=41)
    runs.append(("gd_smooth", first_order.run_gd_smooth(q, 300)))

    q = problems.make_quadratic(20, 0.05, 5.0, seed=42, constraint=ball)
    runs.append(("pgd_smooth_constrained",
                 first_order.run_pgd_smooth_constrained(q, 300)))

    ball15 = {"kind": "ball", "dim": 15, "R": 1.0}
    q = problems.make_quadratic(15, 0.5, 5.0, seed=43, constraint=ball15)
    q.oracle.metadata["L"] = 5.0 * 1.5  # sup ||grad|| over the ball
    runs.append(("pgd_strongly_convex",
                 first_order.run_pgd_strongly_convex(q, 400)))

    q = problems.make_quadratic(20, 0.5, 5.0, seed=44)
    runs.append(("gd_sc_1/beta",
                 first_order.run_gd_smooth_strongly_convex(q, 200)))
    runs.append(("gd_sc_2/(a+b)",
                 first_order.run_gd_smooth_strongly_convex(
                     q, 200, step="2/(alpha+beta)")))

    runs.append(("frank_wolfe", first_order.run_frank_wolfe(_fw_problem(25), 300)))

    q = problems.make_quadratic(20, 0.05, 5.0, seed=45)
    runs.append(("agd_smooth", first_order.run_agd_smooth(q, 300)))

    q = problems.make_quadratic(20, 0.05, 5.0, seed=46)
    runs.append(("agd_strongly_convex",
                 first_order.run_agd_strongly_convex(q, 150)))

    q = problems.make_quadratic(20, 0.05, 5.0, seed=47)
    runs.append(("geometric_descent",
                 first_order.run_geometric_descent(q, 120)))

    failed = [name for name, tr in runs if not _recheck([tr])]
    if failed:
        return False, f"bound re-check failed for {failed}"
    return True, f"{len(runs)}/{len(runs)} methods verified at slack 1.0"


# ---------------------------------------------------------------- criterion 5


def crit_lower_bounds():
    """Query-complexity floors hold for subgradient and gradient descent."""
    details = []
    for t in (4, 16, 64):
        prob = problems.lower_bound_instance_nonsmooth(t, R=1.0, L=1.0)
        floor = prob.oracle.metadata["floor"]
        tr = first_order.run_pgd_lipschitz(prob, t, record=range(1, t + 1))
        seen = min(tr.gaps)
        if seen < floor - 1e-12:
            return False, (f"nonsmooth floor broken at t={t}: min gap {seen:.6f} "
                           f"< {floor:.6f}")
        details.append(f"t={t}: {seen:.4f}>={floor:.4f}")

    t_deep = 24
    prob = problems.make_smooth_hard_tridiag(t_deep, beta=1.0)
    xs2 = float(np.linalg.norm(prob.x_star) ** 2)
    tr = first_order.run_gd_smooth(prob, t_deep, record=range(1, t_deep + 1))
    for s, gap in zip(tr.iters, tr.gaps):
        floor = 3.0 * 1.0 * xs2 / (32.0 * (s + 1) * (t_deep + 1))
        if gap < floor - 1e-12:
            return False, f"smooth floor broken at s={s}"
    if min(tr.gaps) < prob.oracle.metadata["floor"] - 1e-12:
        return False, "smooth floor broken at the horizon"
    return True, ("nonsmooth floors " + ", ".join(details) +
                  f"; smooth tridiag floor held for all s<=%d" % t_deep)


# ---------------------------------------------------------------- criterion 6


def crit_mirror_separation():
    """Negentropy mirror descent beats the Euclidean rate sqrt(n / (2 log n))."""
    n, horizon = 10_000, 1000
    rng = np.random.default_rng(6)
    c = rng.uniform(-1.0, 1.0, n)
    Linf = float(np.max(np.abs(c)))
    k = int(np.argmin(c))
    x_star = np.zeros(n)
    x_star[k] = 1.0
    oracle = FirstOrderOracle(n, lambda x: float(c @ x), lambda x: c,
                              metadata={"L": Linf})
    prob = Problem("linear_simplex", oracle, sets.simplex(n), x_star,
                   float(c[k]), {"dim": n}, None)
    tr = mirror.run_mirror_descent(prob, mirror.simplex_setup(n), horizon, L=Linf)
    if not _recheck([tr]):
        return False, "negentropy mirror descent bound failed its re-check"
    md_bound = Linf * math.sqrt(2.0 * math.log(n) / horizon)
    euclid_bound = Linf * math.sqrt(n / horizon)
    ratio = euclid_bound / md_bound
    ok = ratio >= 20.0
    return ok, (f"simplex n={n}: mirror bound {md_bound:.4f} vs Euclidean "
                f"{euclid_bound:.4f}, ratio {ratio:.1f} (need >= 20)")


# ---------------------------------------------------------------- criterion 7


def _polynomial_window(trace, lo=5, hi=150):
    """Recorded points inside [lo, hi] that sit above the float noise floor."""
    it = np.array(trace.iters)
    g = np.array(trace.avg_gaps)
    keep = (it >= lo) & (it <= hi) & (g > 1e-10 * g[0])
    return it[keep], g[keep]


def crit_composite_rates():
    """ISTA vs FISTA on a small instance: bounds, fitted rates, prox correctness."""
    # an ill-conditioned design keeps both methods in their sublinear decay
    # phase across the fit window; a well-conditioned one identifies the
    # support in a handful of steps and converges linearly from then on
    prob = composite.build_lasso(30, 10, lam=0.01, seed=7, cond=1e4)
    tr_i = composite.run_ista(prob, 300)
    tr_f = composite.run_fista(prob, 300)
    if not (_recheck([tr_i]) and _recheck([tr_f])):
        return False, "composite bound re-check failed"
    it_i, g_i = _polynomial_window(tr_i)
    it_f, g_f = _polynomial_window(tr_f)
    fit_i = fit_rate(it_i, g_i, window=len(it_i))
    fit_f = fit_rate(it_f, g_f, window=len(it_f))
    if not (-1.3 <= fit_i.slope <= -0.7):
        return False, f"ISTA slope {fit_i.slope:.2f} outside [-1.3, -0.7]"
    if fit_f.slope > -1.7:
        return False, f"FISTA slope {fit_f.slope:.2f} > -1.7"

    rng = np.random.default_rng(70)
    worst = 0.0
    for _ in range(200):
        v = float(rng.uniform(-3.0, 3.0))
        theta = float(rng.uniform(0.01, 2.0))
        direct = composite.prox_l1(np.array([v]), theta)[0]
        # scalar minimization by bisecting the monotone subgradient
        # z - v + theta sign(z); golden section cannot certify 1e-8 because
        # value comparisons on a quadratic floor out near sqrt(eps)
        lo, hi = -abs(v) - theta - 1.0, abs(v) + theta + 1.0
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            if mid - v + theta * np.sign(mid) < 0.0:
                lo = mid
            else:
                hi = mid
        ref = 0.5 * (lo + hi)
        worst = max(worst, abs(direct - ref))
    ok = worst <= 1e-8
    return ok, (f"ISTA slope {fit_i.slope:.2f}, FISTA slope {fit_f.slope:.2f}; "
                f"prox vs scalar minimization max error {worst:.1e}")


# ---------------------------------------------------------------- criterion 8


def crit_saddle_mirror_prox():
    """SP-MP closes random matrix games at the 4 M / t rate."""
    finals = []
    for seed in (80, 81, 82):
        rng = np.random.default_rng(seed)
        A = rng.uniform(-1.0, 1.0, (10, 10))
        A /= np.max(np.abs(A))
        prob = composite.build_matrix_game(A)
        tr = composite.run_sp_mp(prob, 1000)
        if not _recheck([tr]):
            return False, f"SP-MP bound re-check failed (seed {seed})"
        finals.append(tr.avg_gaps[-1])
    worst = max(finals)
    ok = worst < 1e-2
    return ok, (f"3 games, duality gap bound 4 Amax log(10)/t held pointwise; "
                f"worst final gap {worst:.2e} < 1e-2")


# ---------------------------------------------------------------- criterion 9


def crit_interior_point():
    """Path-following certificates dominate true gaps on random LPs."""
    worst_cert_slack = math.inf
    for seed in (90, 91, 92):
        lp = registry.build_problem({"kind": "lp",
                                     "params": {"n": 4, "extra_rows": 6},
                                     "seed": seed})
        res = interior_point.solve_lp(lp.A, lp.b, lp.c, eps=1e-7)
        opt = interior_point.lp_vertex_optimum(lp.A, lp.b, lp.c)[1]
        nu = res["nu"]
        for st in res["states"]:
            gap = float(lp.c @ st.x) - opt
            cert = 2.0 * nu / st.t
            if gap > cert + 1e-9:
                return False, (f"certificate beaten by the true gap at "
                               f"t={st.t:.3e} (seed {seed})")
            if gap < -1e-7 * max(1.0, abs(opt)):
                return False, f"point below the vertex optimum (seed {seed})"
            worst_cert_slack = min(worst_cert_slack, cert - gap)
        if abs(res["value"] - opt) > 1e-6:
            return False, (f"final value off by {abs(res['value'] - opt):.2e} "
                           f"(seed {seed})")
    return True, ("3 LPs: certificate >= true gap on every path point, final "
                  f"values within 1e-6 of vertex enumeration, decrement <= 1/4 "
                  f"asserted in-run; tightest certificate slack "
                  f"{worst_cert_slack:.2e}")


# --------------------------------------------------------------- criterion 10


def _quad_ball(dim, alpha, beta, seed, R=1.0):
    prob = problems.make_quadratic(dim, alpha, beta, seed=seed,
                                   constraint={"kind": "ball", "dim": dim,
                                               "R": R})
    # gradient norm bound over the ball: beta * (R + ||x*||)
    prob.oracle.metadata["L"] = beta * (R + float(np.linalg.norm(prob.x_star)))
    return prob


def _ridge_for_kappa(m, n, kappa, seed):
    raw = stochastic.make_ridge_regression(m, n, lam=0.0, seed=seed)
    c = raw.beta
    a0 = raw.alpha
    lam = (c - kappa * a0) / (kappa - 1.0)
    if lam <= 0:
        raise ValueError("instance is already better conditioned than kappa")
    fs = stochastic.make_ridge_regression(m, n, lam=lam, seed=seed)
    return fs


def crit_stochastic_ensembles():
    """Expectation bounds hold for seed-ensemble means (30 seeds, slack 1.1)."""
    parts = []

    prob = _quad_ball(10, 1.0, 4.0, seed=101)
    traces = []
    for k in range(30):
        oracle = stochastic.gaussian_noise_oracle(prob, sigma=1.0)
        traces.append(stochastic.run_sgd(prob, oracle, 2000,
                                         replicate_rng(101, k),
                                         mode="strongly_convex"))
    if not _recheck(traces):
        return False, "SGD strongly-convex ensemble bound failed"
    parts.append("sgd_sc")

    prob = _quad_ball(10, 1.0, 4.0, seed=102)
    traces = []
    for k in range(30):
        oracle = stochastic.gaussian_noise_oracle(prob, sigma=0.5)
        traces.append(stochastic.run_smd_smooth(prob, oracle, 2000,
                                                replicate_rng(102, k)))
    if not _recheck(traces):
        return False, "smooth stochastic mirror descent ensemble bound failed"
    parts.append("smd_smooth")

    prob = _quad_ball(10, 1.0, 4.0, seed=103)
    budget = 9000
    B = math.sqrt(prob.oracle.metadata["L"] ** 2 + 0.5 ** 2)
    R_phi = math.sqrt(0.5)  # potential range of the unit-ball setup
    beta = prob.oracle.metadata["beta"]
    m_opt = max(1, int((B / (R_phi * beta)) * math.sqrt(budget)))
    traces = []
    for k in range(30):
        oracle = stochastic.gaussian_noise_oracle(prob, sigma=0.5)
        traces.append(stochastic.run_minibatch_sgd(prob, oracle, m_opt, budget,
                                                   replicate_rng(103, k)))
    if not _recheck(traces):
        return False, "mini-batch ensemble bound failed"
    target = 1.1 * 3.0 * R_phi * B / math.sqrt(budget)
    mean_final = float(np.mean([tr.avg_gaps[-1] for tr in traces]))
    if mean_final > target:
        return False, (f"mini-batch mean final gap {mean_final:.4f} > "
                       f"1.1 * 3RB/sqrt(t) = {target:.4f}")
    parts.append(f"minibatch(m*={m_opt})")

    fs = _ridge_for_kappa(200, 20, kappa=50.0, seed=105)
    traces = [stochastic.run_svrg(fs, 8, replicate_rng(105, k))
              for k in range(10)]
    if not _recheck(traces):
        return False, "SVRG epoch envelope failed"
    parts.append(f"svrg(kappa={fs.kappa:.1f})")

    betas = np.logspace(0.0, 2.0, 30)
    prob = problems.make_diag_quadratic(betas, x_star=1.0 / np.sqrt(betas))
    for gamma in (0.0, 0.5, 1.0):
        traces = [stochastic.run_rcd(prob, 2000, gamma, replicate_rng(106, k))
                  for k in range(30)]
        if not _recheck(traces):
            return False, f"coordinate-descent ensemble failed at gamma={gamma}"
    parts.append("rcd(0,1/2,1)")
    return True, "ensemble means under 1.1x curves: " + ", ".join(parts)


# --------------------------------------------------------------- criterion 11


def crit_sublinear_games():
    """Sampled saddle-point play touches O(n+m) entries/iter yet closes the gap."""
    n = m = 100
    horizon = 10_000
    rng = np.random.default_rng(110)
    A = rng.uniform(-1.0, 1.0, (n, m))
    A /= np.max(np.abs(A))
    prob = composite.build_matrix_game(A)
    traces = []
    per_iter = None
    for k in range(30):
        oracle = stochastic.GameOracle(A)
        tr = stochastic.run_s_sp_md(prob, oracle, horizon, replicate_rng(110, k))
        per_iter = tr.meta["entry_accesses"] / horizon
        if tr.meta["entry_accesses"] > 4 * (n + m) * horizon:
            return False, "entry-access budget exceeded"
        traces.append(tr)
    if not _recheck(traces):
        return False, "sublinear saddle-point ensemble bound failed"
    mean_final = float(np.mean([tr.avg_gaps[-1] for tr in traces]))
    return True, (f"{per_iter:.0f} entries/iteration (vs n*m={n*m} for a full "
                  f"extragradient step); mean gap at t={horizon} is "
                  f"{mean_final:.4f}")


# --------------------------------------------------------------- criterion 12


def _gnp_adjacency(n, p, rng):
    U = rng.random((n, n))
    Adj = np.triu((U < p).astype(float), 1)
    return Adj + Adj.T


def crit_randomized_rounding():
    """Hyperplane rounding achieves the 0.878 factor; sign moments match arcsin."""
    rng = np.random.default_rng(12)
    graphs = []
    K = np.ones((10, 10)) - np.eye(10)
    graphs.append(("complete10", K))
    C = np.zeros((12, 12))
    for i in range(12):
        C[i, (i + 1) % 12] = C[(i + 1) % 12, i] = 1.0
    graphs.append(("cycle12", C))
    for g in range(10):
        graphs.append((f"gnp{g}", _gnp_adjacency(10, 0.5, rng)))

    ratios = []
    arcsin_checked = False
    for name, Adj in graphs:
        L = sampling.graph_laplacian(Adj)
        opt, _ = sampling.brute_force_maxcut(L)
        if opt <= 0:
            continue
        Sigma = sampling.sdp_relax_maxcut(L)
        sdp_val = float(np.sum(L * Sigma))
        if sdp_val < opt * (1.0 - 1e-3):
            return False, (f"{name}: relaxation value {sdp_val:.3f} below the "
                           f"brute-force optimum {opt:.3f}")
        out = sampling.gw_round(Sigma, L, 10_000, rng)
        se = float(np.std(out["values"])) / math.sqrt(len(out["values"]))
        if out["mean_value"] < 0.878 * opt - 3.0 * se:
            return False, (f"{name}: rounded mean {out['mean_value']:.3f} below "
                           f"0.878*{opt:.3f} - 3se")
        ratios.append(out["mean_value"] / opt)

        if not arcsin_checked and name == "gnp0":
            N = 10_000
            Z = sampling.gaussian_sample(Sigma, rng, size=N)
            S = np.where(Z >= 0.0, 1.0, -1.0)
            emp = S.T @ S / N
            closed = (2.0 / math.pi) * np.arcsin(np.clip(Sigma, -1.0, 1.0))
            se_mat = np.sqrt(np.maximum(1.0 - closed ** 2, 1e-12) / N)
            bad = np.abs(emp - closed) > 3.0 * se_mat + 1e-9
            np.fill_diagonal(bad, False)
            if bad.any():
                return False, (f"arcsin identity broken on {int(bad.sum())} "
                               f"entries of {name}")
            arcsin_checked = True

    V = rng.standard_normal((8, 8))
    B = V @ V.T
    W = rng.standard_normal((8, 8))
    S0 = W @ W.T
    d = 1.0 / np.sqrt(np.diag(S0))
    Sigma = S0 * np.outer(d, d)
    closed = sampling.expected_sign_quadratic(B, Sigma)
    lower = (2.0 / math.pi) * float(np.sum(B * Sigma))
    if closed < lower - 1e-9:
        return False, "sign-quadratic closed form fell below its 2/pi floor"
    out = sampling.gw_round(Sigma, B, 10_000, rng)
    se = float(np.std(out["values"])) / 100.0
    if abs(out["mean_value"] - closed) > 3.0 * se:
        return False, (f"PSD rounding mean {out['mean_value']:.4f} vs closed "
                       f"form {closed:.4f} beyond 3se")
    return True, (f"{len(ratios)} graphs rounded at ratios "
                  f"[{min(ratios):.3f}, {max(ratios):.3f}] of optimum; arcsin "
                  f"moments and the 2/pi quadratic floor verified")


# --------------------------------------------------------------- criterion 13


def crit_sampling_geometry():
    """Hit-and-run moment checks and covariance whitening at N = 50 n."""
    n = 3
    W = np.vstack([np.eye(n), -np.eye(n)])
    cvec = np.concatenate([np.ones(n), np.zeros(n)])
    walker = sampling.HitAndRun.for_halfplanes(W, cvec, x0=np.full(n, 0.5),
                                               seed=130)
    X = sampling.uniform_samples(walker, 4000)
    if np.max(np.abs(X.mean(axis=0) - 0.5)) > 0.02:
        return False, f"box mean off: {X.mean(axis=0)}"
    if np.max(np.abs((X ** 2).mean(axis=0) - 1.0 / 3.0)) > 0.02:
        return False, "box second moment off"

    walker = sampling.HitAndRun.for_ball(np.zeros(n), 1.0, seed=131)
    X = sampling.uniform_samples(walker, 4000)
    if np.max(np.abs(X.mean(axis=0))) > 0.02:
        return False, f"ball mean off: {X.mean(axis=0)}"
    if np.max(np.abs((X ** 2).mean(axis=0) - 1.0 / (n + 2.0))) > 0.02:
        return False, "ball second moment off"

    spans = []
    for dim in (2, 6, 10):
        # anisotropic box [0, s_i] whose exact covariance is diag(s_i^2/12);
        # the rounding map estimated from 50 dim samples must bring the TRUE
        # covariance within [0.5, 1.5] I, so the check carries one chain's
        # estimation noise, not two. Stride 10 dim pays for the chain's
        # autocorrelation along the long axes (width ratio 5).
        scales = np.linspace(0.6, 3.0, dim)
        Wd = np.vstack([np.eye(dim), -np.eye(dim)])
        cd = np.concatenate([scales, np.zeros(dim)])
        w1 = sampling.HitAndRun.for_halfplanes(Wd, cd, x0=scales / 2.0,
                                               seed=132 + dim)
        X = sampling.uniform_samples(w1, 50 * dim, stride=10 * dim)
        est = sampling.isotropic_whiten(X)
        M = est.transform @ np.diag(scales ** 2 / 12.0) @ est.transform.T
        eigs = np.linalg.eigvalsh(0.5 * (M + M.T))
        spans.append((dim, float(eigs.min()), float(eigs.max())))
        if eigs.min() < 0.5 or eigs.max() > 1.5:
            return False, (f"dim {dim}: whitened covariance spectrum "
                           f"[{eigs.min():.2f}, {eigs.max():.2f}] outside "
                           f"[0.5, 1.5]")
    detail = "; ".join(f"dim {d}: [{lo:.2f}, {hi:.2f}]" for d, lo, hi in spans)
    return True, f"moments within 0.02; whitened spectra {detail}"


# --------------------------------------------------------------- criterion 14


def crit_determinism():
    """Identical config + seed produce byte-identical trace CSVs."""
    cfgs = [
        {"problem": {"kind": "quadratic",
                     "params": {"dim": 8, "alpha": 1.0, "beta": 4.0,
                                "constraint": {"kind": "ball", "dim": 8,
                                               "R": 1.0}},
                     "seed": 7},
         "algorithm": {"id": "sgd",
                       "params": {"sigma": 0.5, "B": 7.0,
                                  "mode": "strongly_convex"}},
         "horizon": 300, "seeds": 3},
        {"problem": {"kind": "quadratic",
                     "params": {"dim": 8, "alpha": 0.5, "beta": 4.0},
                     "seed": 8},
         "algorithm": {"id": "gd_smooth", "params": {}},
         "horizon": 200},
    ]
    compared = 0
    for cfg in cfgs:
        blobs = []
        for _ in range(2):
            with tempfile.TemporaryDirectory() as tmp:
                result = registry.run_experiment(cfg)
                paths = registry.write_artifacts(result, tmp)
                blob = {}
                for path in paths:
                    with open(path, "rb") as fh:
                        blob[os.path.basename(path)] = fh.read()
                blobs.append(blob)
        if set(blobs[0]) != set(blobs[1]):
            return False, "reruns produced different artifact sets"
        for name in blobs[0]:
            if blobs[0][name] != blobs[1][name]:
                return False, f"{name} differs between identical reruns"
            compared += 1
    return True, f"{compared} artifacts byte-identical across reruns"


# ----------------------------------------------------------------- the runner


CRITERIA = [
    (1, "ellipsoid_geometry", ("geometry", "cutting_plane"), 5.0,
     crit_ellipsoid_geometry),
    (2, "center_of_gravity", ("geometry", "cutting_plane"), 5.0,
     crit_center_of_gravity),
    (3, "conjugate_gradient", ("first_order",), 10.0, crit_conjugate_gradient),
    (4, "first_order_suite", ("first_order",), 60.0, crit_first_order_suite),
    (5, "lower_bounds", ("first_order",), 10.0, crit_lower_bounds),
    (6, "mirror_separation", ("mirror",), 20.0, crit_mirror_separation),
    (7, "composite_rates", ("composite",), 10.0, crit_composite_rates),
    (8, "saddle_mirror_prox", ("saddle",), 10.0, crit_saddle_mirror_prox),
    (9, "interior_point", ("ipm",), 20.0, crit_interior_point),
    (10, "stochastic_ensembles", ("stochastic",), 180.0,
     crit_stochastic_ensembles),
    (11, "sublinear_games", ("stochastic", "saddle"), 60.0,
     crit_sublinear_games),
    (12, "randomized_rounding", ("rounding",), 60.0, crit_randomized_rounding),
    (13, "sampling_geometry", ("sampling",), 60.0, crit_sampling_geometry),
    (14, "determinism", ("cli",), 20.0, crit_determinism),
]


def _run_one(item) -> SuiteOutcome:
    index, name, tags, budget, fn = item
    start = time.perf_counter()
    try:
        ok, detail = fn()
    except Exception as exc:  # an invariant assertion inside a run counts as FAIL
        ok, detail = False, f"raised {type(exc).__name__}: {exc}"
    elapsed = time.perf_counter() - start
    if ok and elapsed > budget:
        ok = False
        detail += f" [budget exceeded: {elapsed:.1f}s > {budget:.0f}s]"
    return SuiteOutcome(index, name, tags, ok, detail, elapsed, budget)


def max_workers() -> int:
    env = os.environ.get("CONVEXKIT_THREADS", "").strip()
    if env:
        try:
            return max(1, int(env))
        except ValueError:
            pass
    return max(1, os.cpu_count() or 1)


def run_suite(filter_str: Optional[str] = None,
              threads: Optional[int] = None) -> list:
    """Run matching criteria; returns SuiteOutcome rows ordered by index."""
    items = CRITERIA
    if filter_str:
        needle = filter_str.lower()
        items = [it for it in CRITERIA
                 if needle in it[1] or any(needle in t for t in it[2])
                 or needle == str(it[0])]
    workers = threads if threads is not None else max_workers()
    if workers <= 1 or len(items) <= 1:
        outcomes = [_run_one(it) for it in items]
    else:
        with ThreadPoolExecutor(max_workers=min(workers, len(items))) as pool:
            outcomes = list(pool.map(_run_one, items))
    return sorted(outcomes, key=lambda o: o.index)
