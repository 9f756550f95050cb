"""Oracle counters, constraint sets, and the problem builders' invariants."""

import numpy as np
import pytest

from convexkit import problems, sets
from convexkit.oracles import (ConstraintSet, DimensionMismatch,
                               FirstOrderOracle, MissingOracle)
from convexkit.sets import project_simplex


def _quad_oracle():
    return FirstOrderOracle(2, lambda x: float(x @ x), lambda x: 2.0 * x)


def test_counters_move_only_on_counted_queries():
    f = _quad_oracle()
    x = np.ones(2)
    f.value(x)
    f.subgradient(x)
    f.subgradient(x)
    assert f.counts == {"zeroth": 1, "first": 2}
    f.peek_value(x)
    f.peek_subgradient(x)
    assert f.counts == {"zeroth": 1, "first": 2}
    f.reset_counts()
    assert f.counts == {"zeroth": 0, "first": 0}


def test_dimension_mismatch():
    f = _quad_oracle()
    with pytest.raises(DimensionMismatch):
        f.value(np.ones(3))


def test_project_simplex_frozen():
    # tau = (1.2 - 1)/2 = 0.1, so (0.4, 0.8) -> (0.3, 0.7)
    out = project_simplex(np.array([0.4, 0.8]))
    assert np.allclose(out, [0.3, 0.7], atol=1e-12)


def test_project_simplex_properties():
    rng = np.random.default_rng(3)
    for _ in range(50):
        y = rng.standard_normal(7) * 3
        p = project_simplex(y)
        assert abs(p.sum() - 1.0) <= 1e-10
        assert np.all(p >= -1e-12)
        # projection optimality: no feasible direction improves the distance
        q = project_simplex(rng.standard_normal(7))
        assert np.linalg.norm(y - p) <= np.linalg.norm(y - q) + 1e-10


def test_ball_projection_and_separation():
    s = sets.ball(3, R=2.0)
    outside = np.array([3.0, 0.0, 0.0])
    assert np.allclose(s.project(outside), [2.0, 0.0, 0.0])
    assert s.contains(np.zeros(3))
    w = s.separate(outside)
    assert abs(np.linalg.norm(w) - 1.0) <= 1e-12
    # the set must lie in the non-positive half-space of w anchored at x
    for _ in range(20):
        z = s.project(np.random.default_rng(0).standard_normal(3))
        assert w @ (z - outside) <= 1e-9
    assert s.separate(np.zeros(3)) is None


def test_box_and_l1_ball():
    b = sets.box([-1.0, 0.0], [1.0, 2.0])
    assert np.allclose(b.project([5.0, -3.0]), [1.0, 0.0])
    assert b.contains(np.array([0.0, 1.0]))
    l1 = sets.l1_ball(4, R=1.0)
    p = l1.project(np.array([2.0, 0.0, 0.0, 0.0]))
    assert abs(np.abs(p).sum() - 1.0) <= 1e-10
    v = l1.lmo(np.array([0.5, -2.0, 1.0, 0.0]))
    assert np.allclose(v, [0.0, 1.0, 0.0, 0.0])  # vertex opposite the largest |g|


def test_simplex_lmo_is_vertex():
    s = sets.simplex(5)
    g = np.array([0.3, -0.2, 0.9, -0.5, 0.0])
    v = s.lmo(g)
    assert np.allclose(v, np.eye(5)[3])


def test_missing_oracle_raises():
    s = ConstraintSet(2, project=None, kind="bare")
    with pytest.raises(MissingOracle):
        s.project(np.zeros(2))
    with pytest.raises(MissingOracle):
        s.lmo(np.zeros(2))


def test_set_config_round_trip():
    for cfg in ({"kind": "ball", "dim": 4, "R": 2.0},
                {"kind": "simplex", "dim": 6},
                {"kind": "l1_ball", "dim": 3, "R": 0.5}):
        s = sets.set_from_config(cfg)
        back = sets.set_to_config(s)
        assert back["kind"] == cfg["kind"]
        s2 = sets.set_from_config(back)
        assert s2.dim == s.dim and s2.kind == s.kind


def test_make_quadratic_spectrum_and_optimum():
    p = problems.make_quadratic(12, 0.5, 4.0, seed=9)
    Q = p.oracle.metadata["Q"]
    eigs = np.linalg.eigvalsh(Q)
    assert eigs.min() >= 0.5 - 1e-9 and eigs.max() <= 4.0 + 1e-9
    # alpha and beta are attained exactly by construction
    assert abs(eigs.min() - 0.5) <= 1e-9 and abs(eigs.max() - 4.0) <= 1e-9
    assert abs(p.oracle.peek_value(p.x_star) - p.f_star) <= 1e-12
    assert np.linalg.norm(p.oracle.peek_subgradient(p.x_star)) <= 1e-10
    assert abs(np.linalg.norm(p.x_star) - 0.5) <= 1e-9


def test_make_quadratic_with_constraint_config():
    p = problems.make_quadratic(6, 1.0, 3.0, seed=2,
                                constraint={"kind": "ball", "dim": 6, "R": 1.0})
    assert p.constraint is not None and p.constraint.kind == "ball"
    assert p.constraint.contains(p.x_star)  # ||x*|| = 1/2 < R


def test_make_diag_quadratic_coordinates():
    betas = np.array([1.0, 4.0, 9.0])
    p = problems.make_diag_quadratic(betas, x_star=np.array([1.0, -1.0, 0.5]))
    assert p.kind == "diag_quadratic"
    assert np.allclose(p.params["betas"], betas)
    x = np.zeros(3)
    # f(0) = sum beta_i x*_i^2 / 2 = (1 + 4 + 9/4)/2
    assert abs(p.oracle.peek_value(x) - p.f_star - (1 + 4 + 2.25) / 2) <= 1e-12


def test_make_l1_on_ball_constants():
    p = problems.make_l1_on_ball(9, R=2.0)
    assert abs(p.oracle.metadata["L"] - 3.0) <= 1e-12  # sqrt(9)
    assert p.f_star == 0.0
    g = p.oracle.peek_subgradient(np.array([1.0, -2.0, 0.0] * 3))
    assert np.max(np.abs(g)) <= 1.0 + 1e-12  # signs, l-infinity bounded by 1


def test_lower_bound_instance_floor_metadata():
    p = problems.lower_bound_instance_nonsmooth(16, R=1.0, L=2.0)
    floor = p.oracle.metadata["floor"]
    assert abs(floor - 2.0 * 1.0 / (2.0 * (1.0 + 4.0))) <= 1e-12
    assert p.constraint.R == 1.0


def test_smooth_hard_tridiag_consistency():
    t = 8
    p = problems.make_smooth_hard_tridiag(t, beta=2.0)
    assert p.dim == 2 * t + 1
    assert abs(p.oracle.peek_value(p.x_star) - p.f_star) <= 1e-12
    assert np.linalg.norm(p.oracle.peek_subgradient(p.x_star)) <= 1e-9
    # harmonic-profile optimum: first coordinate 1 - 1/(2t+2)
    assert abs(p.x_star[0] - (1.0 - 1.0 / (2 * t + 2))) <= 1e-12


def test_problem_config_round_trip():
    p = problems.make_quadratic(5, 0.5, 2.0, seed=11,
                                constraint={"kind": "ball", "dim": 5, "R": 1.0})
    cfg = problems.problem_to_config(p)
    q = problems.problem_from_config(cfg)
    assert q.kind == p.kind
    assert np.allclose(q.x_star, p.x_star)
    assert q.constraint.kind == "ball"


def test_unknown_problem_kind():
    with pytest.raises(problems.UnknownProblemKind):
        problems.problem_from_config({"kind": "no_such_family"})
