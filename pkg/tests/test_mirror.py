"""Mirror maps and their runners: exact divergence identities, invariances."""

import math

import numpy as np
import pytest

from convexkit import mirror, problems, sets, linalg
from convexkit.harness import check_bound
from convexkit.harness.registry import bound_from_trace
from convexkit.oracles import FirstOrderOracle
from convexkit.problems import Problem


def test_kl_divergence_frozen():
    su = mirror.simplex_setup(2)
    # KL((.5,.5) || (.25,.75)) = .5 log 2 + .5 log(2/3) = .5 log(4/3)
    val = su.bregman(np.array([0.5, 0.5]), np.array([0.25, 0.75]))
    assert abs(val - 0.5 * math.log(4.0 / 3.0)) <= 1e-12


def test_euclidean_bregman_is_half_square():
    su = mirror.euclidean_ball_setup(4, R=2.0)
    x, y = np.array([1.0, 0.0, -1.0, 0.5]), np.zeros(4)
    assert su.bregman(x, y) == pytest.approx(0.5 * float(x @ x))
    assert su.R2 == pytest.approx(2.0)  # sup of the potential over the ball


def test_simplex_md_step_frozen():
    su = mirror.simplex_setup(2)
    out = su.md_step(np.array([0.5, 0.5]), np.array([1.0, 0.0]), math.log(2.0))
    assert np.allclose(out, [1.0 / 3.0, 2.0 / 3.0], atol=1e-12)


def test_three_point_identity_negentropy():
    # D(x,z) = D(x,y) + D(y,z) + <gradPhi(y) - gradPhi(z), x - y>
    # normalized draws, not projections: the identity needs interior points
    su = mirror.simplex_setup(5)
    rng = np.random.default_rng(11)
    for _ in range(25):
        x, y, z = ((v := rng.random(5) + 0.05) / v.sum() for _ in range(3))
        lhs = su.bregman(x, z)
        link = (np.log(y) - np.log(z)) @ (x - y)
        rhs = su.bregman(x, y) + su.bregman(y, z) + link
        assert abs(lhs - rhs) <= 1e-10


def test_bregman_nonnegative_zero_at_equal():
    rng = np.random.default_rng(12)
    for su in (mirror.simplex_setup(6), mirror.euclidean_ball_setup(6)):
        for _ in range(20):
            x = sets.project_simplex(rng.random(6) + 0.01)
            y = sets.project_simplex(rng.random(6) + 0.01)
            assert su.bregman(x, y) >= -1e-12
        x = sets.project_simplex(rng.random(6))
        assert abs(su.bregman(x, x)) <= 1e-12


def test_dual_averaging_point_permutation_invariance():
    su = mirror.simplex_setup(5)
    g = np.array([0.4, -1.0, 0.2, 0.9, 0.0])
    perm = np.array([3, 0, 4, 1, 2])
    a = su.da_point(g, 0.7)
    b = su.da_point(g[perm], 0.7)
    assert np.allclose(a[perm], b, atol=1e-12)
    assert abs(a.sum() - 1.0) <= 1e-12


def _simplex_linear(n, seed):
    rng = np.random.default_rng(seed)
    c = rng.uniform(-1.0, 1.0, n)
    k = int(np.argmin(c))
    x_star = np.zeros(n)
    x_star[k] = 1.0
    oracle = FirstOrderOracle(n, lambda x: float(c @ x), lambda x: c,
                              metadata={"L": float(np.max(np.abs(c)))})
    return Problem("linear_simplex", oracle, sets.simplex(n), x_star,
                   float(c[k]), {"dim": n}, None)


def test_mirror_descent_bound_on_simplex():
    p = _simplex_linear(50, 13)
    tr = mirror.run_mirror_descent(p, mirror.simplex_setup(50), 300)
    res = check_bound([tr], bound_from_trace(tr))
    assert res.passed


def test_dual_averaging_bound_on_simplex():
    p = _simplex_linear(50, 14)
    tr = mirror.run_dual_averaging(p, mirror.simplex_setup(50), 300)
    assert check_bound([tr], bound_from_trace(tr)).passed


def test_mirror_descent_needs_lipschitz_constant():
    p = _simplex_linear(10, 15)
    del p.oracle.metadata["L"]
    with pytest.raises(ValueError):
        mirror.run_mirror_descent(p, mirror.simplex_setup(10), 20)


def test_mirror_prox_smooth_on_simplex():
    n = 20
    rng = np.random.default_rng(16)
    target = sets.project_simplex(rng.random(n))
    oracle = FirstOrderOracle(n, lambda x: 0.5 * float(np.sum((x - target) ** 2)),
                              lambda x: x - target, metadata={"beta": 1.0})
    p = Problem("simplex_quadratic", oracle, sets.simplex(n), target, 0.0,
                {"dim": n}, None)
    tr = mirror.run_mirror_prox(p, mirror.simplex_setup(n), 200)
    assert check_bound([tr], bound_from_trace(tr)).passed
    assert tr.avg_gaps[-1] <= 0.02  # the theorem curve at the horizon


def test_spectrahedron_setup_geometry():
    su = mirror.spectrahedron_setup(3)
    X = np.eye(3) / 3.0
    G = np.diag([1.0, 0.0, -1.0])
    Y = su.md_step(X, G, 0.5)
    assert abs(np.trace(Y) - 1.0) <= 1e-9
    assert np.min(linalg.sym_eig(Y).eigenvalues) >= -1e-10
    # matrix negentropy divergence of the uniform state from itself is zero
    assert abs(su.bregman(X, X)) <= 1e-10
    assert su.rho == pytest.approx(0.5)


def test_mirror_descent_on_spectrahedron():
    C = np.diag([1.0, 0.4, -0.2])
    oracle = FirstOrderOracle(3, lambda X: float(np.sum(C * X)), lambda X: C,
                              metadata={"L": 1.0}, shape=(3, 3))
    # optimum: rank-one projector on the smallest eigenvalue of C
    x_star = np.zeros((3, 3))
    x_star[2, 2] = 1.0
    p = Problem("linear_spectrahedron", oracle, sets.spectrahedron(3), x_star,
                -0.2, {"dim": 3}, None)
    tr = mirror.run_mirror_descent(p, mirror.spectrahedron_setup(3), 250)
    assert check_bound([tr], bound_from_trace(tr)).passed
    assert tr.avg_gaps[-1] <= 0.4
