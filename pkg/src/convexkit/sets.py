"""Builders for the standard constraint sets used across the package."""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from .oracles import ConstraintSet

__all__ = [
    "ball",
    "box",
    "simplex",
    "l1_ball",
    "polytope_geq",
    "spectrahedron",
    "project_simplex",
    "set_from_config",
    "set_to_config",
]


def project_simplex(y: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex (sort-based)."""
    y = np.asarray(y, dtype=float)
    u = np.sort(y)[::-1]
    css = np.cumsum(u) - 1.0
    idx = np.arange(1, y.size + 1)
    rho = np.nonzero(u - css / idx > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(y - theta, 0.0)


def ball(dim: int, R: float = 1.0, center: Optional[Sequence[float]] = None) -> ConstraintSet:
    c = np.zeros(dim) if center is None else np.asarray(center, dtype=float)

    def project(x):
        d = x - c
        n = np.linalg.norm(d)
        return x if n <= R else c + (R / n) * d

    def contains(x, tol):
        return np.linalg.norm(x - c) <= R + tol

    def separate(x):
        d = x - c
        n = np.linalg.norm(d)
        return None if n <= R else d / n

    def lmo(g):
        n = np.linalg.norm(g)
        return c.copy() if n == 0 else c - (R / n) * g

    return ConstraintSet(dim, project, contains, separate, lmo, R=R, r=R, center=c, kind="ball")


def box(lo, hi, dim: Optional[int] = None) -> ConstraintSet:
    if np.isscalar(lo):
        if dim is None:
            raise ValueError("scalar bounds need an explicit dim")
        lo = np.full(dim, float(lo))
        hi = np.full(dim, float(hi))
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = lo.size
    c = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)

    def project(x):
        return np.clip(x, lo, hi)

    def contains(x, tol):
        return bool(np.all(x >= lo - tol) and np.all(x <= hi + tol))

    def separate(x):
        over = x - hi
        under = lo - x
        i_over = int(np.argmax(over))
        i_under = int(np.argmax(under))
        if over[i_over] <= 0 and under[i_under] <= 0:
            return None
        w = np.zeros(n)
        if over[i_over] >= under[i_under]:
            w[i_over] = 1.0
        else:
            w[i_under] = -1.0
        return w

    def lmo(g):
        return np.where(g > 0, lo, hi)

    return ConstraintSet(
        dim=n, project=project, contains=contains, separate=separate, lmo=lmo,
        R=float(np.linalg.norm(half)), r=float(np.min(half)), center=c, kind="box",
    )


def simplex(dim: int) -> ConstraintSet:
    c = np.full(dim, 1.0 / dim)

    def contains(x, tol):
        return bool(np.all(x >= -tol) and abs(float(np.sum(x)) - 1.0) <= tol)

    def lmo(g):
        v = np.zeros(dim)
        v[int(np.argmin(g))] = 1.0
        return v

    # enclosing ball around the barycenter through the vertices
    R = float(np.sqrt(1.0 - 1.0 / dim))
    return ConstraintSet(
        dim=dim, project=project_simplex, contains=contains, separate=None, lmo=lmo,
        R=R, r=None, center=c, kind="simplex",
    )


def l1_ball(dim: int, R: float = 1.0) -> ConstraintSet:
    def contains(x, tol):
        return float(np.sum(np.abs(x))) <= R + tol

    def lmo(g):
        i = int(np.argmax(np.abs(g)))
        v = np.zeros(dim)
        v[i] = -R * np.sign(g[i]) if g[i] != 0 else R
        return v

    def project(x):
        if np.sum(np.abs(x)) <= R:
            return x.copy()
        w = project_simplex(np.abs(x) / R) * R
        return np.sign(x) * w

    return ConstraintSet(
        dim=dim, project=project, contains=contains, separate=None, lmo=lmo,
        R=R, r=None, center=np.zeros(dim), kind="l1_ball",
    )


def polytope_geq(A, b, R: Optional[float] = None, r: Optional[float] = None,
                 center: Optional[Sequence[float]] = None) -> ConstraintSet:
    """The set {x : A x >= b} with a most-violated-row separation oracle."""
    A = np.asarray(A, dtype=float)
    b = np.asarray(b, dtype=float)
    n = A.shape[1]

    def contains(x, tol):
        return bool(np.all(A @ x - b >= -tol))

    def separate(x):
        viol = b - A @ x
        i = int(np.argmax(viol))
        if viol[i] <= 0:
            return None
        return -A[i]

    return ConstraintSet(
        dim=n, project=None, contains=contains, separate=separate, lmo=None,
        R=R, r=r, center=center, kind="polytope_geq",
    )


def spectrahedron(n: int) -> ConstraintSet:
    """Unit-trace positive semidefinite n x n matrices (matrix-shaped points)."""

    def contains(X, tol):
        if not np.allclose(X, X.T, atol=tol):
            return False
        if abs(float(np.trace(X)) - 1.0) > tol:
            return False
        return float(np.linalg.eigvalsh(0.5 * (X + X.T)).min()) >= -tol

    c = np.eye(n) / n
    return ConstraintSet(
        dim=n * n, contains=contains, R=1.0, center=c, kind="spectrahedron",
        shape=(n, n),
    )


_SET_BUILDERS = {
    "ball": lambda p: ball(int(p["dim"]), float(p.get("R", 1.0)), p.get("center")),
    "box": lambda p: box(p["lo"], p["hi"], p.get("dim")),
    "simplex": lambda p: simplex(int(p["dim"])),
    "l1_ball": lambda p: l1_ball(int(p["dim"]), float(p.get("R", 1.0))),
    "polytope_geq": lambda p: polytope_geq(p["A"], p["b"], p.get("R"), p.get("r"), p.get("center")),
    "spectrahedron": lambda p: spectrahedron(int(p["dim"])),
}


def set_from_config(cfg: dict) -> ConstraintSet:
    kind = cfg.get("kind")
    if kind not in _SET_BUILDERS:
        raise ValueError(f"unknown set kind {kind!r}")
    params = {k: v for k, v in cfg.items() if k != "kind"}
    return _SET_BUILDERS[kind](params)


def set_to_config(s: ConstraintSet) -> dict:
    if s.kind == "ball":
        return {"kind": "ball", "dim": s.dim, "R": s.R, "center": s.center.tolist()}
    if s.kind == "simplex":
        return {"kind": "simplex", "dim": s.dim}
    if s.kind == "l1_ball":
        return {"kind": "l1_ball", "dim": s.dim, "R": s.R}
    raise ValueError(f"set kind {s.kind!r} has no config form")
