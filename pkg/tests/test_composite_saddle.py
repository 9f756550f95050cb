"""Proximal methods on composite objectives and saddle-point runners."""

import math

import numpy as np
import pytest

from convexkit import composite
from convexkit.harness import check_bound
from convexkit.harness.registry import bound_from_trace


def test_prox_l1_frozen():
    assert composite.prox_l1(np.array([1.2]), 0.5)[0] == pytest.approx(0.7)
    assert composite.prox_l1(np.array([-0.3]), 0.5)[0] == 0.0
    out = composite.prox_l1(np.array([2.0, -2.0, 0.1]), 1.0)
    assert np.allclose(out, [1.0, -1.0, 0.0])


def test_prox_l1_matches_scalar_minimization():
    from convexkit.first_order import golden_section
    rng = np.random.default_rng(20)
    for _ in range(40):
        v = float(rng.uniform(-3, 3))
        theta = float(rng.uniform(0.05, 2.0))
        direct = composite.prox_l1(np.array([v]), theta)[0]
        ref = golden_section(lambda z: theta * abs(z) + 0.5 * (z - v) ** 2,
                             -abs(v) - theta - 1, abs(v) + theta + 1, tol=1e-13)
        # comparison search localizes a quadratic min only to ~sqrt(eps)
        assert abs(direct - ref) <= 1e-7


def test_build_lasso_reference_quality():
    p = composite.build_lasso(20, 8, lam=0.4, seed=21)
    # the certified reference beats the all-zeros point and satisfies KKT
    assert p.F_star <= p.oracle.peek_value(np.zeros(8)) + 1e-12
    g = p.oracle.peek_subgradient(p.x_star)
    on = np.abs(p.x_star) > 1e-10
    if np.any(on):
        assert np.max(np.abs(g[on] + 0.4 * np.sign(p.x_star[on]))) <= 1e-5
    assert np.max(np.abs(g[~on])) <= 0.4 + 1e-5


def test_ista_monotone_and_bounded():
    p = composite.build_lasso(25, 10, lam=0.5, seed=22)
    tr = composite.run_ista(p, 200, record=range(1, 201))
    assert check_bound([tr], bound_from_trace(tr)).passed
    F = tr.f_values
    assert all(b <= a + 1e-10 for a, b in zip(F, F[1:]))


def test_fista_bound_and_speed():
    p = composite.build_lasso(25, 10, lam=0.5, seed=22)
    t = 200
    tr_f = composite.run_fista(p, t, record=[t])
    tr_i = composite.run_ista(p, t, record=[t])
    assert check_bound([tr_f], bound_from_trace(tr_f)).passed
    assert tr_f.gaps[-1] <= tr_i.gaps[-1] + 1e-15


def test_matching_pennies_equilibrium():
    A = np.array([[1.0, -1.0], [-1.0, 1.0]])
    prob = composite.build_matrix_game(A)
    uniform = np.array([0.5, 0.5])
    assert composite.duality_gap(prob, uniform, uniform) == pytest.approx(0.0)
    assert prob.inner_max(uniform) == pytest.approx(0.0)
    assert prob.inner_min(uniform) == pytest.approx(0.0)


def test_weak_duality_between_inner_forms():
    rng = np.random.default_rng(23)
    A = rng.uniform(-1, 1, (6, 4))
    game = composite.build_matrix_game(A)
    cls = composite.build_linear_classification(A, R=1.5)
    for _ in range(20):
        xg = rng.random(6)
        xg /= xg.sum()
        yg = rng.random(4)
        yg /= yg.sum()
        assert game.inner_max(xg) >= game.phi(xg, yg) - 1e-12
        assert game.inner_min(yg) <= game.phi(xg, yg) + 1e-12
        xc = rng.standard_normal(4)
        xc *= 1.5 / max(np.linalg.norm(xc), 1.5)
        yc = rng.random(6)
        yc /= yc.sum()
        assert cls.inner_max(xc) >= cls.phi(xc, yc) - 1e-12
        assert cls.inner_min(yc) <= cls.phi(xc, yc) + 1e-12


def test_classification_inner_min_closed_form():
    rng = np.random.default_rng(24)
    A = rng.standard_normal((5, 3))
    cls = composite.build_linear_classification(A, R=2.0)
    y = np.array([0.1, 0.2, 0.3, 0.25, 0.15])
    # min over the ball of -y^T A x is attained at x = R * A^T y / ||A^T y||
    v = A.T @ y
    x_opt = 2.0 * v / np.linalg.norm(v)
    assert cls.inner_min(y) == pytest.approx(cls.phi(x_opt, y), abs=1e-12)


def test_sp_md_bound_on_game():
    rng = np.random.default_rng(25)
    A = rng.uniform(-1, 1, (5, 7))
    prob = composite.build_matrix_game(A)
    tr = composite.run_sp_md(prob, 400)
    assert check_bound([tr], bound_from_trace(tr)).passed
    assert tr.avg_gaps[-1] <= tr.avg_gaps[0]


def test_sp_mp_bound_on_game():
    rng = np.random.default_rng(26)
    A = rng.uniform(-1, 1, (5, 7))
    prob = composite.build_matrix_game(A)
    tr = composite.run_sp_mp(prob, 400)
    assert check_bound([tr], bound_from_trace(tr)).passed
    # mirror prox closes the gap at the fast 1/t rate
    assert tr.avg_gaps[-1] <= 4.0 * np.max(np.abs(A)) * math.log(7) / 400 + 1e-12


def test_sp_md_on_classification():
    rng = np.random.default_rng(27)
    A = rng.standard_normal((8, 4))
    prob = composite.build_linear_classification(A, R=1.0)
    tr = composite.run_sp_md(prob, 300)
    assert check_bound([tr], bound_from_trace(tr)).passed


def test_saddle_gap_never_negative():
    rng = np.random.default_rng(28)
    A = rng.uniform(-1, 1, (4, 4))
    prob = composite.build_matrix_game(A)
    tr = composite.run_sp_mp(prob, 100, record=range(1, 101))
    assert all(g >= -1e-12 for g in tr.avg_gaps)
