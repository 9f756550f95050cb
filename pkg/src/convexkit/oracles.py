"""Black-box oracle wrappers and constraint-set objects.

Algorithms in this package only ever touch a problem through these two
surfaces: a FirstOrderOracle (values and subgradients, with query counters)
and a ConstraintSet (projection, membership, separation, linear minimization).
"""

from __future__ import annotations

from typing import Callable, Optional

import numpy as np

__all__ = [
    "DimensionMismatch",
    "MissingOracle",
    "FirstOrderOracle",
    "ConstraintSet",
]


class DimensionMismatch(Exception):
    """Input vector shape does not match the declared dimension."""


class MissingOracle(Exception):
    """The requested oracle (lmo, separation, projection) is not available."""


class FirstOrderOracle:
    """Value / subgradient access to f with monotone query counters.

    metadata carries declared problem constants, any of:
      L: Lipschitz constant of f (w.r.t. metadata["norm"]),
      beta: smoothness, alpha: strong convexity, B: value bound sup|f|,
      norm: name of the reference norm ("l2", "l1", "linf", "schatten1").
    Counters only move through value()/subgradient(); peek_value and
    peek_subgradient are for diagnostics (gap curves) and leave them alone.
    """

    def __init__(
        self,
        dim: int,
        value_fn: Callable[[np.ndarray], float],
        subgradient_fn: Callable[[np.ndarray], np.ndarray],
        metadata: Optional[dict] = None,
        shape: Optional[tuple] = None,
    ):
        self.dim = int(dim)
        self.shape = shape if shape is not None else (self.dim,)
        self._value_fn = value_fn
        self._subgradient_fn = subgradient_fn
        self.metadata = dict(metadata or {})
        self._zeroth = 0
        self._first = 0

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != self.shape:
            raise DimensionMismatch(f"expected shape {self.shape}, got {x.shape}")
        return x

    def value(self, x: np.ndarray) -> float:
        self._zeroth += 1
        return float(self._value_fn(self._check(x)))

    def subgradient(self, x: np.ndarray) -> np.ndarray:
        self._first += 1
        return np.asarray(self._subgradient_fn(self._check(x)), dtype=float)

    gradient = subgradient

    def peek_value(self, x: np.ndarray) -> float:
        return float(self._value_fn(self._check(x)))

    def peek_subgradient(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._subgradient_fn(self._check(x)), dtype=float)

    @property
    def counts(self) -> dict:
        return {"zeroth": self._zeroth, "first": self._first}

    def reset_counts(self) -> None:
        self._zeroth = 0
        self._first = 0


class ConstraintSet:
    """A closed convex set presented through callables.

    Any of the callables may be absent; using a missing one raises
    MissingOracle. separate(x) must return a unit-normalized w with the set
    contained in {y : w^T (y - x) <= 0}, or None when x is a member.
    R is the radius of a known enclosing ball around `center`; r the radius
    of a ball around `center` contained in the set (when known).
    """

    def __init__(
        self,
        dim: int,
        project: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        contains: Optional[Callable[[np.ndarray, float], bool]] = None,
        separate: Optional[Callable[[np.ndarray], Optional[np.ndarray]]] = None,
        lmo: Optional[Callable[[np.ndarray], np.ndarray]] = None,
        R: Optional[float] = None,
        r: Optional[float] = None,
        center: Optional[np.ndarray] = None,
        kind: str = "custom",
        shape: Optional[tuple] = None,
    ):
        self.dim = int(dim)
        self.shape = shape if shape is not None else (self.dim,)
        self._project = project
        self._contains = contains
        self._separate = separate
        self._lmo = lmo
        self.R = None if R is None else float(R)
        self.r = None if r is None else float(r)
        self.center = np.zeros(self.shape) if center is None else np.asarray(center, dtype=float)
        self.kind = kind

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != self.shape:
            raise DimensionMismatch(f"expected shape {self.shape}, got {x.shape}")
        return x

    def project(self, x: np.ndarray) -> np.ndarray:
        if self._project is None:
            raise MissingOracle(f"{self.kind} set has no projection oracle")
        return np.asarray(self._project(self._check(x)), dtype=float)

    def contains(self, x: np.ndarray, tol: float = 1e-9) -> bool:
        if self._contains is None:
            raise MissingOracle(f"{self.kind} set has no membership oracle")
        return bool(self._contains(self._check(x), tol))

    def separate(self, x: np.ndarray) -> Optional[np.ndarray]:
        if self._separate is None:
            raise MissingOracle(f"{self.kind} set has no separation oracle")
        w = self._separate(self._check(x))
        if w is None:
            return None
        w = np.asarray(w, dtype=float)
        nw = float(np.linalg.norm(w.ravel()))
        if nw == 0.0:
            raise ValueError("separation oracle returned a zero vector")
        return w / nw

    def lmo(self, g: np.ndarray) -> np.ndarray:
        """argmin over the set of <g, x> (a vertex for polytopes)."""
        if self._lmo is None:
            raise MissingOracle(f"{self.kind} set has no linear minimization oracle")
        return np.asarray(self._lmo(self._check(g)), dtype=float)

    @property
    def has_lmo(self) -> bool:
        return self._lmo is not None

    @property
    def has_projection(self) -> bool:
        return self._project is not None
