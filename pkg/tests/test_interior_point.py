"""Barriers, Newton machinery, and LP path-following certificates."""

import math

import numpy as np
import pytest

from convexkit import interior_point as ipm


def _box1d():
    # {x : 0 < x < 1} as A x > b rows
    A = np.array([[1.0], [-1.0]])
    b = np.array([0.0, -1.0])
    return ipm.log_barrier_polytope(A, b)


def test_box_barrier_frozen_values():
    bar = _box1d()
    assert bar.nu == 2
    x = np.array([0.5])
    assert bar.value(x) == pytest.approx(2.0 * math.log(2.0))
    assert np.allclose(bar.grad(x), [0.0], atol=1e-12)
    center = ipm.analytic_center(bar, np.array([0.3]))
    assert center[0] == pytest.approx(0.5, abs=1e-8)


def test_neg_log_decrement_is_one():
    # barrier -log(x) on x > 0: lambda(x) = |f'|/sqrt(f'') = 1 everywhere
    bar = ipm.log_barrier_polytope(np.array([[1.0]]), np.array([0.0]))
    for x0 in (0.1, 1.0, 7.3):
        assert ipm.newton_decrement(bar, np.array([x0])) == pytest.approx(1.0)


def test_barrier_blows_up_at_boundary():
    bar = _box1d()
    assert bar.value(np.array([1e-9])) > bar.value(np.array([0.5])) + 10.0
    assert not bar.in_domain(np.array([1.0]))
    assert not bar.in_domain(np.array([-0.2]))


def test_hessian_matches_finite_differences():
    A = np.array([[1.0, 0.3], [-0.5, 1.0], [0.2, -1.0], [-1.0, -0.4]])
    b = np.array([-1.0, -1.2, -0.9, -1.1])
    bar = ipm.log_barrier_polytope(A, b)
    x = np.array([0.05, -0.1])
    H = bar.hess(x)
    eps = 1e-6
    for j in range(2):
        e = np.zeros(2)
        e[j] = eps
        fd = (bar.grad(x + e) - bar.grad(x - e)) / (2 * eps)
        assert np.allclose(fd, H[:, j], rtol=1e-5, atol=1e-5)


def test_quadratic_decrement_decay():
    # inside the quadratic region the decrement obeys lambda' <= 2 lambda^2,
    # so from 0.25 it at least halves, then quarters
    A = np.vstack([np.eye(3), -np.eye(3)])
    b = -np.ones(6)  # the box (-1, 1)^3 in the A x > b convention
    bar = ipm.log_barrier_polytope(A, b)
    x0 = np.array([0.12, -0.08, 0.04])
    lam0 = ipm.newton_decrement(bar, x0)
    assert lam0 <= 0.25  # the start sits inside the quadratic region
    _, decs = ipm.damped_newton_minimize(bar, x0, tol=1e-10,
                                         return_decrements=True)
    for a, bb in zip(decs, decs[1:]):
        if a >= 1e-6:  # below this the measured decrement is float noise
            assert bb <= 2.0 * a * a + 1e-9
    if len(decs) >= 3 and decs[0] <= 0.25:
        assert decs[1] <= 0.5 * decs[0] + 1e-9
        assert decs[2] <= 0.25 * decs[1] + 1e-9


def test_exp_concavity_certificate():
    A = np.vstack([np.eye(2), -np.eye(2), [[1.0, 1.0]]])
    b = np.array([-1.0, -1.0, -1.0, -1.0, -1.5])
    bar = ipm.log_barrier_polytope(A, b)
    rng = np.random.default_rng(30)
    for _ in range(15):
        x = rng.uniform(-0.5, 0.5, 2)
        if bar.in_domain(x):
            assert ipm.exp_concavity_gap(bar, x) >= -1e-8


def test_path_follow_invariants_and_certificate():
    A = np.vstack([np.eye(2), -np.eye(2)])
    b = -np.ones(4)  # the box (-1, 1)^2
    bar = ipm.log_barrier_polytope(A, b)
    c = np.array([1.0, 0.25])
    t0, x0, _ = ipm.path_follow_init(bar, c, np.zeros(2))
    states = ipm.path_follow(bar, c, x0, t0, eps=1e-6, enforce=True)
    opt = -1.25  # vertex (-1, -1)
    for st in states:
        assert st.decrement <= 0.25 + 1e-9
        assert float(c @ st.x) - opt <= 2.0 * bar.nu / st.t + 1e-9
    assert float(c @ states[-1].x) - opt <= 1e-6


def test_find_interior_point_and_empty_interior():
    A = np.vstack([np.eye(2), -np.eye(2)])
    b = -np.ones(4)  # A x >= b: the box [-1, 1]^2
    x = ipm.find_interior_point(A, b)
    assert np.all(A @ x > b + 1e-9)
    # x <= -1 and x >= 1 simultaneously: empty
    A_bad = np.array([[1.0], [-1.0]])
    b_bad = np.array([1.0, 1.0])
    with pytest.raises(ipm.EmptyInterior):
        ipm.find_interior_point(A_bad, b_bad)


def test_solve_lp_box_frozen():
    # minimize x1 + 0.5 x2 over [0,1]^2, optimum at (0,0)
    A = np.vstack([np.eye(2), -np.eye(2)])
    b = np.array([0.0, 0.0, -1.0, -1.0])
    c = np.array([1.0, 0.5])
    res = ipm.solve_lp(A, b, c, eps=1e-8)
    assert abs(res["value"]) <= 1e-6
    assert np.all(np.abs(res["x"]) <= 1e-4)
    assert res["certificate"]["gap_bound"] <= 1e-8
    assert res["nu"] == 4


def test_lp_vertex_optimum_box():
    A = np.vstack([np.eye(2), -np.eye(2)])
    b = np.array([0.0, 0.0, -1.0, -1.0])
    x, val = ipm.lp_vertex_optimum(A, b, np.array([1.0, 0.5]))
    assert val == pytest.approx(0.0, abs=1e-12)
    assert np.allclose(x, [0.0, 0.0], atol=1e-12)


def test_solve_lp_certificates_dominate_gap():
    rng = np.random.default_rng(31)
    n = 3
    A = np.vstack([np.eye(n), -np.eye(n), rng.standard_normal((4, n))])
    A[2 * n:] /= np.linalg.norm(A[2 * n:], axis=1, keepdims=True)
    b = np.concatenate([-np.ones(2 * n), -rng.uniform(0.3, 1.0, 4)])
    c = rng.standard_normal(n)
    res = ipm.solve_lp(A, b, c, eps=1e-7)
    opt = ipm.lp_vertex_optimum(A, b, c)[1]
    assert abs(res["value"] - opt) <= 1e-6
    for st in res["states"]:
        gap = float(c @ st.x) - opt
        assert gap <= 2.0 * res["nu"] / st.t + 1e-9
        assert gap >= -1e-8
