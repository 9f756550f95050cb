"""Run traces, convergence-bound checking, and rate fitting.

The contract every runner in this package honors: a run produces a RunTrace
whose avg_gap column holds the suboptimality of the point the method's
guarantee actually speaks about (running average, best-so-far, weighted
average, or the current iterate), and whose bound_value column holds the
closed-form theorem curve evaluated at the recorded iteration. check_bound
then verifies avg_gap <= slack * bound_value at every recorded iteration at
or past the bound's t_min, either per-trace (deterministic, slack 1.0) or on
the seed-mean (stochastic, slack 1.1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "MissingOptimum",
    "NonPositiveGap",
    "BoundViolation",
    "BoundSpec",
    "RunTrace",
    "TraceRecorder",
    "CheckResult",
    "check_bound",
    "RateFit",
    "fit_rate",
    "checkpoints",
    "write_trace_csv",
    "write_first_order_csv",
    "write_cut_trace_csv",
]


class MissingOptimum(Exception):
    """Gap-based checking needs a problem with a known optimal value."""


class NonPositiveGap(Exception):
    """Rate fitting needs strictly positive gaps (log scale)."""


class BoundViolation(Exception):
    """A runner's convergence guarantee failed as a runtime invariant."""


@dataclass
class BoundSpec:
    """A closed-form guarantee curve t -> bound(t).

    slack 1.0 for deterministic guarantees, 1.1 for expectation guarantees
    checked on a seed-mean. t_min is the first iteration the theorem covers.
    """

    bound_id: str
    curve: Callable[[int], float]
    t_min: int = 1
    slack: float = 1.0
    expectation: bool = False
    description: str = ""

    def value(self, t: int) -> float:
        return float(self.curve(int(t)))

    def holds_at(self, t: int, gap: float) -> bool:
        if t < self.t_min:
            return True
        return gap <= self.slack * self.value(t)


@dataclass
class RunTrace:
    iters: list = field(default_factory=list)
    f_values: list = field(default_factory=list)
    gaps: list = field(default_factory=list)
    avg_gaps: list = field(default_factory=list)
    dist_to_opt: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    bound_values: list = field(default_factory=list)
    bound_satisfied: list = field(default_factory=list)
    oracle_zeroth: list = field(default_factory=list)
    oracle_first: list = field(default_factory=list)
    meta: dict = field(default_factory=dict)

    def __len__(self) -> int:
        return len(self.iters)


class TraceRecorder:
    """Collects trace rows at chosen iterations and enforces the bound.

    enforce=True raises BoundViolation on the spot (deterministic
    guarantees); expectation bounds are left to check_bound on the ensemble.
    """

    def __init__(self, oracle, f_star: Optional[float], bound: Optional[BoundSpec] = None,
                 record_iters: Optional[Sequence[int]] = None, enforce: bool = False,
                 meta: Optional[dict] = None):
        if f_star is None:
            raise MissingOptimum("recorder needs f_star to compute gaps")
        self.oracle = oracle
        self.f_star = float(f_star)
        self.bound = bound
        self._record_set = None if record_iters is None else set(int(i) for i in record_iters)
        self.enforce = enforce
        self.trace = RunTrace(meta=dict(meta or {}))
        if bound is not None:
            self.trace.meta.setdefault("bound_id", bound.bound_id)
            self.trace.meta.setdefault("slack", bound.slack)
            self.trace.meta.setdefault("t_min", bound.t_min)
            self.trace.meta.setdefault("expectation", bound.expectation)

    def wants(self, t: int) -> bool:
        return self._record_set is None or int(t) in self._record_set

    def record(self, t: int, x, reported=None, grad=None, checked=None) -> None:
        """Append a row at iteration t.

        reported: the point the guarantee speaks about (defaults to x).
        checked: overrides the checked quantity entirely, for guarantees that
        control something other than a value gap (e.g. squared distance).
        """
        if not self.wants(t):
            return
        tr = self.trace
        fx = self.oracle.peek_value(x)
        gap = fx - self.f_star
        if checked is not None:
            agg = float(checked)
        elif reported is None:
            agg = gap
        else:
            agg = self.oracle.peek_value(reported) - self.f_star
        tr.iters.append(int(t))
        tr.f_values.append(fx)
        tr.gaps.append(gap)
        tr.avg_gaps.append(agg)
        tr.dist_to_opt.append(math.nan)
        tr.grad_norms.append(math.nan if grad is None
                             else float(np.linalg.norm(np.asarray(grad).ravel())))
        counts = self.oracle.counts
        tr.oracle_zeroth.append(counts["zeroth"])
        tr.oracle_first.append(counts["first"])
        if self.bound is None:
            tr.bound_values.append(math.nan)
            tr.bound_satisfied.append(True)
        else:
            bv = self.bound.value(t)
            ok = self.bound.holds_at(t, agg)
            tr.bound_values.append(bv)
            tr.bound_satisfied.append(bool(ok))
            if self.enforce and not ok:
                raise BoundViolation(
                    f"{self.bound.bound_id}: gap {agg:.6e} > "
                    f"{self.bound.slack} * bound {bv:.6e} at t={t}")

    def set_dist(self, d: float) -> None:
        self.trace.dist_to_opt[-1] = float(d)


@dataclass
class CheckResult:
    passed: bool
    bound_id: str
    n_checked: int
    first_violation: Optional[int]
    max_ratio: float

    def __bool__(self) -> bool:
        return self.passed


def check_bound(traces, bound: BoundSpec) -> CheckResult:
    """Verify avg_gap <= slack * bound(t) on a trace or a list of traces.

    A list is treated as an ensemble over seeds: gaps are averaged pointwise
    (the iteration grids must agree), which is how expectation guarantees are
    checked.
    """
    if isinstance(traces, RunTrace):
        traces = [traces]
    if not traces:
        raise ValueError("no traces to check")
    iters = np.asarray(traces[0].iters, dtype=int)
    gaps = np.zeros(len(iters))
    for tr in traces:
        if not np.array_equal(np.asarray(tr.iters, dtype=int), iters):
            raise ValueError("ensemble traces must share the same iteration grid")
        g = np.asarray(tr.avg_gaps, dtype=float)
        if np.any(np.isnan(g)):
            raise MissingOptimum("trace has NaN gaps; problem optimum unknown")
        gaps += g
    gaps /= len(traces)

    passed = True
    first_violation = None
    max_ratio = 0.0
    n_checked = 0
    for t, g in zip(iters, gaps):
        if t < bound.t_min:
            continue
        n_checked += 1
        bv = bound.value(int(t))
        ratio = g / bv if bv > 0 else math.inf if g > 0 else 0.0
        max_ratio = max(max_ratio, ratio)
        if g > bound.slack * bv and passed:
            passed = False
            first_violation = int(t)
    return CheckResult(passed, bound.bound_id, n_checked, first_violation, max_ratio)


@dataclass
class RateFit:
    slope: float
    intercept: float
    stderr: float
    ci_low: float
    ci_high: float
    kind: str
    window: int

    @property
    def contraction(self) -> float:
        """Per-iteration factor for kind='linear' fits: exp(slope)."""
        return math.exp(self.slope)


def fit_rate(iters, gaps, window: Optional[int] = None, kind: str = "power") -> RateFit:
    """Least-squares rate estimate on the trailing window of a gap curve.

    kind='power': slope of log(gap) against log(t) (so gap ~ t^slope).
    kind='linear': slope of log(gap) against t (so gap ~ exp(slope * t)).
    The CI is slope +/- 1.96 standard errors. Needs >= 10 trailing points.
    """
    iters = np.asarray(iters, dtype=float)
    gaps = np.asarray(gaps, dtype=float)
    if window is None:
        window = max(10, len(iters) // 3)
    window = min(window, len(iters))
    if window < 10:
        raise ValueError(f"need a trailing window of at least 10 points, got {window}")
    t = iters[-window:]
    g = gaps[-window:]
    if np.any(g <= 0):
        raise NonPositiveGap("gap curve touches zero or below inside the fit window")
    if kind == "power":
        xs = np.log(t)
    elif kind == "linear":
        xs = t
    else:
        raise ValueError(f"unknown fit kind {kind!r}")
    ys = np.log(g)
    xm, ym = xs.mean(), ys.mean()
    sxx = float(np.sum((xs - xm) ** 2))
    slope = float(np.sum((xs - xm) * (ys - ym)) / sxx)
    intercept = ym - slope * xm
    resid = ys - (intercept + slope * xs)
    dof = max(window - 2, 1)
    se = math.sqrt(float(np.sum(resid**2)) / dof / sxx)
    return RateFit(slope, intercept, se, slope - 1.96 * se, slope + 1.96 * se, kind, window)


def checkpoints(horizon: int, max_points: int = 200) -> list:
    """1..horizon, thinned to roughly log-spaced recording points."""
    horizon = int(horizon)
    if horizon <= max_points:
        return list(range(1, horizon + 1))
    pts = np.unique(np.round(np.geomspace(1, horizon, max_points)).astype(int))
    return [int(p) for p in pts]


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "1" if v else "0"
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    x = float(v)
    if math.isnan(x):
        return "nan"
    return repr(x)


def _write_rows(path, header, rows) -> None:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(_fmt(v) for v in row))
    with open(path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def write_trace_csv(path, trace: RunTrace) -> None:
    header = ["iter", "f_value", "gap", "avg_gap", "bound_value", "bound_satisfied",
              "oracle_zeroth", "oracle_first"]
    rows = zip(trace.iters, trace.f_values, trace.gaps, trace.avg_gaps,
               trace.bound_values, trace.bound_satisfied,
               trace.oracle_zeroth, trace.oracle_first)
    _write_rows(path, header, rows)


def write_first_order_csv(path, trace: RunTrace) -> None:
    header = ["iter", "f_value", "gap", "avg_gap", "dist_to_opt", "grad_norm",
              "bound_value", "bound_satisfied"]
    rows = zip(trace.iters, trace.f_values, trace.gaps, trace.avg_gaps,
               trace.dist_to_opt, trace.grad_norms,
               trace.bound_values, trace.bound_satisfied)
    _write_rows(path, header, rows)


def write_cut_trace_csv(path, cut_trace) -> None:
    header = ["iter", "feasible_flag", "best_value", "log_volume_proxy", "oracle_calls"]
    rows = zip(cut_trace.iters, cut_trace.feasible_flags, cut_trace.best_values,
               cut_trace.log_volume_proxy, cut_trace.oracle_calls)
    _write_rows(path, header, rows)
