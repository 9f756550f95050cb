"""Stochastic oracles and runners: stream splitting, unbiasedness, variance
accounting, and expectation bounds checked over seed ensembles."""

import numpy as np
import pytest

from convexkit import problems
from convexkit.composite import build_matrix_game
from convexkit.harness.core import check_bound
from convexkit.harness.registry import bound_from_trace
from convexkit.mirror import euclidean_ball_setup
from convexkit.stochastic import (
    ClassificationOracle,
    CoordinateSmoothness,
    GameOracle,
    StochasticOracle,
    finite_sum_oracle,
    gaussian_noise_oracle,
    make_ridge_regression,
    replicate_rng,
    run_minibatch_sgd,
    run_rcd,
    run_replicates,
    run_s_sp_md,
    run_sgd,
    run_smd_smooth,
    run_svrg,
)


def _ball_cfg(dim, R=1.0):
    return {"kind": "ball", "dim": dim, "R": R}


# ----------------------------------------------------------- stream splitting

def test_replicate_rng_is_bit_reproducible():
    a = replicate_rng(7, 3).standard_normal(16)
    b = replicate_rng(7, 3).standard_normal(16)
    assert np.array_equal(a, b)


def test_replicate_rng_streams_are_distinct():
    base = replicate_rng(7, 0).standard_normal(16)
    assert not np.array_equal(base, replicate_rng(7, 1).standard_normal(16))
    assert not np.array_equal(base, replicate_rng(8, 0).standard_normal(16))


# ---------------------------------------------------------- gaussian sampling

def test_gaussian_noise_oracle_unbiased():
    p = problems.make_l1_on_ball(4)
    oracle = gaussian_noise_oracle(p, sigma=1.0)
    # auto second-moment bound from the declared Lipschitz constant
    assert oracle.B == pytest.approx(np.sqrt(4.0 + 1.0))
    assert oracle.sigma == 1.0

    x = np.full(4, 0.3)
    exact = oracle.peek_subgradient(x)
    rng = replicate_rng(0, 0)
    n_draws = 20000
    total = np.zeros(4)
    for _ in range(n_draws):
        total += oracle.sample(x, rng)
    mean = total / n_draws
    # per-coordinate noise scale sigma/sqrt(n); 5 standard errors
    tol = 5.0 * (1.0 / 2.0) / np.sqrt(n_draws)
    assert np.max(np.abs(mean - exact)) <= tol
    assert oracle.n_samples == n_draws
    assert oracle.counts == {"zeroth": 0, "first": n_draws}


def test_gaussian_noise_second_moment_matches_declared_bound():
    # at a point where ||grad|| = L exactly, E||g~||^2 = L^2 + sigma^2 = B^2
    p = problems.make_l1_on_ball(4)
    oracle = gaussian_noise_oracle(p, sigma=1.0)
    x = np.full(4, 0.3)
    rng = replicate_rng(1, 0)
    sq = 0.0
    n_draws = 20000
    for _ in range(n_draws):
        g = oracle.sample(x, rng)
        sq += float(g @ g)
    mean_sq = sq / n_draws
    assert 0.95 * oracle.B**2 <= mean_sq <= 1.05 * oracle.B**2


def test_minibatch_averaging_scales_variance():
    p = problems.make_l1_on_ball(4)
    oracle = gaussian_noise_oracle(p, sigma=1.0)
    x = np.full(4, 0.3)
    exact = oracle.peek_subgradient(x)
    rng = replicate_rng(2, 0)
    m = 4
    n_draws = 20000
    total = 0.0
    for _ in range(n_draws):
        g = sum(oracle.sample(x, rng) for _ in range(m)) / m
        d = g - exact
        total += float(d @ d)
    mean_sq = total / n_draws
    target = 1.0 / m  # sigma^2 / m
    assert 0.8 * target <= mean_sq <= 1.2 * target


def test_zero_noise_run_is_deterministic():
    p = problems.make_l1_on_ball(6)
    tr1 = run_sgd(p, gaussian_noise_oracle(p, 0.0), 50, 1)
    tr2 = run_sgd(p, gaussian_noise_oracle(p, 0.0), 50, 2)
    assert tr1.iters == tr2.iters
    assert np.array_equal(tr1.f_values, tr2.f_values)
    assert np.array_equal(tr1.avg_gaps, tr2.avg_gaps)


# ------------------------------------------------------------------------ SGD

def test_sgd_lipschitz_ensemble_respects_expected_gap():
    p = problems.make_l1_on_ball(8)
    traces = run_replicates(
        lambda rng: run_sgd(p, gaussian_noise_oracle(p, 1.0), 300, rng),
        25, base_seed=5)
    res = check_bound(traces, bound_from_trace(traces[0]))
    assert res.passed, f"first violation at t={res.first_violation}"
    assert res.n_checked > 0
    # last ensemble point should be close to the horizon value R B sqrt(2/t)
    final = np.mean([tr.avg_gaps[-1] for tr in traces])
    assert final <= 1.1 * traces[0].bound_values[-1]


def test_sgd_strongly_convex_ensemble():
    p = problems.make_quadratic(6, 1.0, 3.0, seed=11, constraint=_ball_cfg(6))
    B = np.sqrt((3.0 * 1.5) ** 2 + 1.0)
    traces = run_replicates(
        lambda rng: run_sgd(p, gaussian_noise_oracle(p, 1.0, B=B), 400, rng,
                            mode="strongly_convex"),
        25, base_seed=6)
    res = check_bound(traces, bound_from_trace(traces[0]))
    assert res.passed, f"first violation at t={res.first_violation}"
    assert traces[0].meta["mode"] == "strongly_convex"


def test_sgd_rejects_missing_declarations():
    p = problems.make_l1_on_ball(5)
    bare = StochasticOracle(5, lambda x, rng: np.zeros(5), p.oracle)
    with pytest.raises(ValueError):
        run_sgd(p, bare, 10, 0)  # no B
    with pytest.raises(ValueError):
        run_sgd(p, gaussian_noise_oracle(p, 0.5), 10, 0, mode="nope")
    with pytest.raises(ValueError):
        # no strong convexity constant on a piecewise-linear objective
        run_sgd(p, gaussian_noise_oracle(p, 0.5), 10, 0, mode="strongly_convex")
    q = problems.make_l1_on_ball(5)
    q.f_star = None
    with pytest.raises(ValueError):
        run_sgd(q, gaussian_noise_oracle(q, 0.5), 10, 0)


# ------------------------------------------------------- smooth stochastic MD

def test_smd_smooth_ensemble():
    p = problems.make_quadratic(5, 0.5, 2.0, seed=12, constraint=_ball_cfg(5))
    traces = run_replicates(
        lambda rng: run_smd_smooth(p, gaussian_noise_oracle(p, 0.5, B=4.0),
                                   300, rng),
        25, base_seed=7)
    res = check_bound(traces, bound_from_trace(traces[0]))
    assert res.passed, f"first violation at t={res.first_violation}"


def test_smd_smooth_rejects_bad_setup():
    p = problems.make_quadratic(5, 0.5, 2.0, seed=12, constraint=_ball_cfg(5))
    oracle = gaussian_noise_oracle(p, 0.5, B=4.0)
    lopsided = euclidean_ball_setup(5, 1.0)
    lopsided.rho = 0.5
    with pytest.raises(ValueError):
        run_smd_smooth(p, oracle, 10, 0, setup=lopsided)
    no_sigma = StochasticOracle(5, lambda x, rng: np.zeros(5), p.oracle, B=1.0)
    with pytest.raises(ValueError):
        run_smd_smooth(p, no_sigma, 10, 0)
    rough = problems.make_l1_on_ball(5)  # no smoothness constant
    with pytest.raises(ValueError):
        run_smd_smooth(rough, gaussian_noise_oracle(rough, 0.5), 10, 0)


def test_minibatch_accounting():
    p = problems.make_quadratic(5, 0.5, 2.0, seed=13, constraint=_ball_cfg(5))
    inner = gaussian_noise_oracle(p, 1.0, B=5.0)
    tr = run_minibatch_sgd(p, inner, batch=5, oracle_budget=1000, rng_or_seed=3)
    assert tr.meta["algorithm"] == "minibatch_sgd"
    assert tr.meta["batch"] == 5
    assert tr.meta["outer_steps"] == 200
    assert tr.meta["oracle_calls"] == 1000
    assert inner.n_samples == 1000
    assert tr.iters[-1] == 200
    with pytest.raises(ValueError):
        run_minibatch_sgd(p, inner, batch=0, oracle_budget=1000, rng_or_seed=3)
    with pytest.raises(ValueError):
        run_minibatch_sgd(p, inner, batch=50, oracle_budget=10, rng_or_seed=3)


# ----------------------------------------------------------------- finite sums

def test_finite_sum_oracle_counts_component_queries():
    fs = make_ridge_regression(12, 3, 0.5, seed=18)
    so = finite_sum_oracle(fs)
    rng = replicate_rng(4, 0)
    x = np.zeros(3)
    for _ in range(7):
        so.sample(x, rng)
    assert so.n_samples == 7
    assert fs.grad_calls == 7
    so.peek_value(x)
    so.peek_subgradient(x)
    assert fs.grad_calls == 7  # peeks use the uncounted full gradient
    so.reset_counts()
    assert so.n_samples == 0


def test_ridge_shares_data_across_regularizers():
    # same seed draws the same data matrix regardless of lam, so the
    # regularizer shifts both curvature constants by exactly lam
    base = make_ridge_regression(30, 6, 0.0, seed=9)
    reg = make_ridge_regression(30, 6, 0.7, seed=9)
    assert reg.alpha == pytest.approx(base.alpha + 0.7, abs=1e-9)
    assert reg.beta == pytest.approx(base.beta + 0.7, abs=1e-9)
    assert reg.kappa == pytest.approx(reg.beta / reg.alpha)
    # optimum satisfies the normal equations
    g = reg.peek_full_grad(reg.x_star)
    assert np.linalg.norm(g) <= 1e-8
    assert reg.f_star == pytest.approx(reg.value(reg.x_star))


def test_svrg_variance_transfer_inequality():
    # the centered second moment at any x is controlled by the suboptimality:
    # (1/m) sum_i ||grad f_i(x) - grad f_i(x*)||^2 <= 2 beta (f(x) - f*)
    fs = make_ridge_regression(40, 8, 0.3, seed=19)
    rng = replicate_rng(5, 0)
    for _ in range(5):
        x = fs.x_star + rng.standard_normal(8)
        second = np.mean([
            float(np.sum((np.asarray(fs.component_grads[i](x))
                          - np.asarray(fs.component_grads[i](fs.x_star))) ** 2))
            for i in range(fs.m)
        ])
        assert second <= 2.0 * fs.beta * (fs.value(x) - fs.f_star) + 1e-9


def test_svrg_oracle_accounting():
    fs = make_ridge_regression(30, 5, 0.5, seed=20)
    tr = run_svrg(fs, epochs=4, rng_or_seed=21)
    k = tr.meta["k"]
    assert k == int(np.ceil(20.0 * fs.kappa))
    assert tr.meta["eta"] == pytest.approx(1.0 / (10.0 * fs.beta))
    # one full pass plus two component queries per inner step, every epoch
    assert fs.grad_calls == 4 * (fs.m + 2 * k)
    assert tr.meta["component_grad_calls"] == fs.grad_calls
    assert tr.iters == [1, 2, 3, 4]


def test_svrg_ensemble_contracts_geometrically():
    traces = run_replicates(
        lambda rng: run_svrg(make_ridge_regression(60, 6, 1.0, seed=22),
                             epochs=6, rng_or_seed=rng),
        8, base_seed=8)
    res = check_bound(traces, bound_from_trace(traces[0]))
    assert res.passed, f"first violation at epoch {res.first_violation}"
    final = np.mean([tr.avg_gaps[-1] for tr in traces])
    first = np.mean([tr.avg_gaps[0] for tr in traces])
    assert final < first


def test_svrg_needs_regularity():
    fs = make_ridge_regression(10, 3, 0.5, seed=23)
    fs.alpha = 0.0
    from convexkit.stochastic import MissingRegularity
    with pytest.raises(MissingRegularity):
        run_svrg(fs, epochs=2, rng_or_seed=0)


# ----------------------------------------------------- coordinate descent

def test_coordinate_sampling_distribution():
    cs = CoordinateSmoothness(np.array([1.0, 4.0]), 0.5)
    assert np.allclose(cs.p, [1.0 / 3.0, 2.0 / 3.0], atol=1e-15)
    rng = replicate_rng(0, 1)
    n_draws = 30000
    hits = sum(cs.sample(rng) for _ in range(n_draws))
    assert abs(hits / n_draws - 2.0 / 3.0) <= 0.012
    with pytest.raises(ValueError):
        CoordinateSmoothness(np.array([1.0, 0.0]), 0.5)


def test_rcd_convex_ensemble():
    betas = np.linspace(1.0, 3.0, 6)
    p = problems.make_diag_quadratic(betas, x_star=1.0 / np.sqrt(betas))
    traces = run_replicates(
        lambda rng: run_rcd(p, 200, 0.5, rng), 30, base_seed=15)
    res = check_bound(traces, bound_from_trace(traces[0]))
    assert res.passed, f"first violation at t={res.first_violation}"


def test_rcd_strongly_convex_uniform_sampling():
    # gamma = 0 makes the geometric envelope an exact equality in expectation
    # for separable quadratics, so the horizon stays short and the ensemble
    # large to keep the empirical mean tight
    betas = np.linspace(1.0, 3.0, 6)
    p = problems.make_diag_quadratic(betas, x_star=1.0 / np.sqrt(betas))
    traces = run_replicates(
        lambda rng: run_rcd(p, 12, 0.0, rng, bound_kind="strongly_convex",
                            record=range(1, 13)),
        400, base_seed=17)
    res = check_bound(traces, bound_from_trace(traces[0]))
    assert res.passed, f"first violation at t={res.first_violation}"


def test_rcd_strongly_convex_weighted_sampling():
    betas = np.linspace(1.0, 3.0, 6)
    p = problems.make_diag_quadratic(betas, x_star=1.0 / np.sqrt(betas))
    traces = run_replicates(
        lambda rng: run_rcd(p, 30, 1.0, rng, bound_kind="strongly_convex",
                            record=range(1, 31)),
        120, base_seed=18)
    res = check_bound(traces, bound_from_trace(traces[0]))
    assert res.passed, f"first violation at t={res.first_violation}"


def test_rcd_requires_coordinate_data():
    p = problems.make_l1_on_ball(4)
    with pytest.raises(ValueError):
        run_rcd(p, 10, 0.5, 0)
    betas = np.array([1.0, 2.0])
    q = problems.make_diag_quadratic(betas)
    with pytest.raises(ValueError):
        run_rcd(q, 10, 0.5, 0, bound_kind="nope")


# ------------------------------------------------------- sampling saddle points

def test_game_oracle_unbiased_and_metered():
    rng = replicate_rng(23, 0)
    A = rng.uniform(-1.0, 1.0, size=(3, 5))
    oracle = GameOracle(A)
    assert oracle.B_X == oracle.B_Y == np.max(np.abs(A))

    y = rng.uniform(0.1, 1.0, size=5)
    y /= y.sum()
    x = rng.uniform(0.1, 1.0, size=3)
    x /= x.sum()

    n_draws = 20000
    total = np.zeros(3)
    for _ in range(n_draws):
        total += oracle.sample_x(x, y, rng)
    assert oracle.entry_accesses == n_draws * 3
    tol = 5.0 * np.max(np.abs(A)) / np.sqrt(n_draws)
    assert np.max(np.abs(total / n_draws - A @ y)) <= tol

    for _ in range(100):
        oracle.sample_y(x, y, rng)
    assert oracle.entry_accesses == n_draws * 3 + 100 * 5


def test_classification_oracle_norms_and_zero_point():
    A = np.array([[3.0, 0.0], [0.0, 4.0], [1.0, 1.0]])
    oracle = ClassificationOracle(A)
    assert oracle.B_X == pytest.approx(np.sqrt(17.0))  # largest column norm
    assert oracle.B_Y == pytest.approx(np.sqrt(9.0 + 16.0 + 1.0))

    rng = replicate_rng(24, 0)
    out = oracle.sample_y(np.zeros(3), None, rng)
    assert np.array_equal(out, np.zeros(2))
    assert oracle.entry_accesses == 0  # the zero gradient is free

    x = np.array([0.6, -0.8, 0.2])
    n_draws = 20000
    total = np.zeros(2)
    for _ in range(n_draws):
        total += oracle.sample_y(x, None, rng)
    assert oracle.entry_accesses == n_draws * 2
    # importance-weighted row sampling is unbiased for A^T x
    assert np.max(np.abs(total / n_draws - A.T @ x)) <= 0.1


def test_stochastic_saddle_ensemble_and_budget():
    rng = replicate_rng(25, 0)
    A = rng.uniform(-1.0, 1.0, size=(4, 6))
    sp = build_matrix_game(A)

    def one(run_rng):
        oracle = GameOracle(A)
        tr = run_s_sp_md(sp, oracle, 200, run_rng)
        assert tr.meta["entry_accesses"] == (4 + 6) * 200
        assert tr.meta["entry_budget"] == 4 * (4 + 6) * 200
        return tr

    traces = run_replicates(one, 30, base_seed=26)
    assert all(g >= -1e-12 for tr in traces for g in tr.avg_gaps)
    res = check_bound(traces, bound_from_trace(traces[0]))
    assert res.passed, f"first violation at t={res.first_violation}"
