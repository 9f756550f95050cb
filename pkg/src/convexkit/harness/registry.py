"""Config-driven experiment registry: problems, algorithms, bound re-checks.

The CLI (and the acceptance suite) drive everything through run_experiment,
which takes a plain-dict config of the form

    {"problem":   {"kind": str, "params": {...}, "seed": int},
     "algorithm": {"id": str, "params": {...}},
     "horizon":   int,
     "seeds":     int,            # optional, replicate count
     "bound":     {"id": str, "slack": float}}   # optional override

Unknown keys anywhere in that skeleton are rejected with ConfigError (the
CLI maps that to exit code 2). Horizon means iterations for most entries,
total base-oracle calls for minibatch_sgd, and epochs for svrg.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .. import composite, cutting_plane, first_order, interior_point, mirror
from .. import problems as problems_mod
from .. import stochastic
from ..composite import CompositeProblem, SaddleProblem
from ..cutting_plane import CutTrace
from ..problems import Problem
from ..stochastic import FiniteSum, replicate_rng
from .core import (
    BoundSpec,
    CheckResult,
    MissingOptimum,
    RunTrace,
    check_bound,
    write_cut_trace_csv,
    write_trace_csv,
)


class ConfigError(Exception):
    """Malformed experiment config (unknown key, bad kind, type mismatch)."""


# ------------------------------------------------------------------- problems


@dataclass
class LinearProgram:
    """min c^T x over {A x >= b}, the interior-point entry's problem type."""

    A: np.ndarray
    b: np.ndarray
    c: np.ndarray
    name: str = "lp"

    @property
    def dim(self) -> int:
        return int(self.A.shape[1])


def _require_params(params: dict, required: tuple, kind: str) -> None:
    missing = [k for k in required if k not in params]
    if missing:
        raise ConfigError(f"problem kind {kind!r} needs params {missing}")


def _build_lasso(params: dict, seed: int):
    _require_params(params, ("m", "n", "lam"), "lasso")
    return composite.build_lasso(
        int(params["m"]), int(params["n"]), float(params["lam"]), seed=seed,
        noise=float(params.get("noise", 0.1)),
        sparsity=int(params.get("sparsity", 5)),
        ref_iters=int(params.get("ref_iters", 20000)))


def _build_ridge(params: dict, seed: int):
    _require_params(params, ("m", "n", "lam"), "ridge")
    return stochastic.make_ridge_regression(
        int(params["m"]), int(params["n"]), float(params["lam"]), seed=seed,
        noise=float(params.get("noise", 0.5)))


def _game_matrix(params: dict, seed: int) -> np.ndarray:
    if "A" in params:
        return np.asarray(params["A"], dtype=float)
    _require_params(params, ("n", "m"), "matrix_game/classification")
    rng = np.random.default_rng(seed)
    A = rng.uniform(-1.0, 1.0, size=(int(params["n"]), int(params["m"])))
    scale = float(params.get("scale", 1.0))
    top = float(np.max(np.abs(A)))
    return A * (scale / top) if top > 0 else A


def _build_matrix_game(params: dict, seed: int):
    return composite.build_matrix_game(_game_matrix(params, seed))


def _build_classification(params: dict, seed: int):
    # Data matrix with one signed example per column; the saddle problem
    # stores the row-per-example orientation its own builder expects.
    A_cols = _game_matrix(params, seed)
    R = float(params.get("R", 1.0))
    return composite.build_linear_classification(-A_cols.T, R)


def _build_lp(params: dict, seed: int):
    if "A" in params:
        _require_params(params, ("A", "b", "c"), "lp")
        return LinearProgram(np.asarray(params["A"], dtype=float),
                             np.asarray(params["b"], dtype=float),
                             np.asarray(params["c"], dtype=float))
    # random bounded-polytope instance: box plus extra random rows, cost
    # direction drawn last so the optimum sits at a nondegenerate vertex
    n = int(params.get("n", 4))
    extra = int(params.get("extra_rows", 6))
    rng = np.random.default_rng(seed)
    A_box = np.vstack([np.eye(n), -np.eye(n)])
    b_box = np.full(2 * n, -1.0)
    Arand = rng.normal(size=(extra, n))
    Arand /= np.linalg.norm(Arand, axis=1, keepdims=True)
    brand = -rng.uniform(0.2, 1.0, size=extra)
    c = rng.normal(size=n)
    return LinearProgram(np.vstack([A_box, Arand]),
                         np.concatenate([b_box, brand]), c)


PROBLEM_KINDS: dict = {}
for _k in problems_mod._PROBLEM_BUILDERS:
    PROBLEM_KINDS[_k] = None  # handled by problems.problem_from_config
PROBLEM_KINDS.update({
    "lasso": _build_lasso,
    "ridge": _build_ridge,
    "matrix_game": _build_matrix_game,
    "classification": _build_classification,
    "lp": _build_lp,
})


def build_problem(spec: dict):
    """Instantiate the problem block of a config. Raises ConfigError."""
    if not isinstance(spec, dict):
        raise ConfigError("problem block must be an object")
    extra = set(spec) - {"kind", "params", "seed"}
    if extra:
        raise ConfigError(f"unknown problem keys: {sorted(extra)}")
    kind = spec.get("kind")
    if kind not in PROBLEM_KINDS:
        raise ConfigError(f"unknown problem kind {kind!r}; "
                          f"known: {sorted(PROBLEM_KINDS)}")
    params = spec.get("params", {})
    if not isinstance(params, dict):
        raise ConfigError("problem params must be an object")
    seed = int(spec.get("seed", 0))
    builder = PROBLEM_KINDS[kind]
    if builder is None:
        try:
            return problems_mod.problem_from_config(
                {"kind": kind, "params": params, "seed": seed})
        except (ValueError, KeyError, TypeError) as exc:
            raise ConfigError(f"bad problem config: {exc}") from exc
    try:
        return builder(params, seed)
    except ConfigError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise ConfigError(f"bad problem config: {exc}") from exc


def problem_tag(problem) -> str:
    """Dispatch tag used to match algorithms to problem objects."""
    if isinstance(problem, Problem):
        return problem.kind
    if isinstance(problem, CompositeProblem):
        return "lasso"
    if isinstance(problem, SaddleProblem):
        return problem.name
    if isinstance(problem, FiniteSum):
        return "ridge"
    if isinstance(problem, LinearProgram):
        return "lp"
    return type(problem).__name__


# ----------------------------------------------------------------- algorithms


@dataclass(frozen=True)
class AlgorithmEntry:
    id: str
    run: Callable  # (problem, horizon, params, rng) -> RunTrace | CutTrace
    bound_id: str
    description: str
    accepts: tuple = ()      # problem tags; () = any problems.Problem
    stochastic: bool = False
    trace_kind: str = "trace"  # "trace" or "cut"

    def check_problem(self, problem) -> None:
        tag = problem_tag(problem)
        if self.accepts:
            if tag not in self.accepts:
                raise ConfigError(
                    f"algorithm {self.id!r} accepts problems {self.accepts}, "
                    f"got {tag!r}")
        elif not isinstance(problem, Problem):
            raise ConfigError(
                f"algorithm {self.id!r} needs a first-order problem, got {tag!r}")


def _mirror_setup(problem: Problem, params: dict) -> mirror.MirrorSetup:
    name = params.get("setup")
    if name is None:
        shape = problem.oracle.shape
        cset = problem.constraint
        if len(shape) == 2:
            name = "spectrahedron"
        elif cset is not None and cset.kind == "simplex":
            name = "simplex"
        elif cset is not None and cset.kind == "ball":
            name = "ball"
        else:
            raise ConfigError("mirror entries need params['setup'] "
                              "('simplex' | 'ball' | 'spectrahedron')")
    if name == "simplex":
        return mirror.simplex_setup(problem.dim)
    if name == "ball":
        R = params.get("R")
        if R is None:
            if problem.constraint is None:
                raise ConfigError("ball setup needs params['R'] or a ball constraint")
            R = problem.constraint.R
        return mirror.euclidean_ball_setup(problem.dim, float(R))
    if name == "spectrahedron":
        return mirror.spectrahedron_setup(problem.oracle.shape[0])
    raise ConfigError(f"unknown mirror setup {name!r}")


def _noise_oracle(problem: Problem, params: dict) -> stochastic.StochasticOracle:
    sigma = float(params.get("sigma", 1.0))
    B = params.get("B")
    return stochastic.gaussian_noise_oracle(problem, sigma,
                                            B=None if B is None else float(B))


def _s_sp_md_oracle(problem: SaddleProblem):
    if problem.name == "matrix_game":
        return stochastic.GameOracle(problem.params["A"])
    if problem.name == "linear_classification":
        # the sampling oracle works on the x^T A y orientation; the saddle
        # problem stores rows-as-examples, so transpose back with the sign
        return stochastic.ClassificationOracle(-problem.params["A"].T)
    raise ConfigError(f"no sampling oracle for saddle problem {problem.name!r}")


def _run_lp(problem: LinearProgram, horizon: int, params: dict, rng) -> RunTrace:
    res = interior_point.solve_lp(problem.A, problem.b, problem.c,
                                  eps=float(params.get("eps", 1e-8)))
    m, n = problem.A.shape
    opt = None
    if bool(params.get("certify_against_vertices", True)) and m <= 20 and n <= 8:
        try:
            opt = interior_point.lp_vertex_optimum(problem.A, problem.b,
                                                   problem.c)[1]
        except ValueError:
            opt = None
    nu = float(res["nu"])
    trace = RunTrace(meta={
        "algorithm": "lp_path_follow", "problem": "lp",
        "bound_id": "ipm_certificate", "slack": 1.0, "t_min": 1,
        "expectation": False, "nu": nu,
        "t_final": res["certificate"]["t_final"],
        "value": res["value"],
        "init_steps": len(res["init_states"]),
    })
    if opt is not None:
        trace.meta["optimum"] = float(opt)
    for k, st in enumerate(res["states"], start=1):
        val = float(problem.c @ st.x)
        cert = 2.0 * nu / st.t
        gap = val - float(opt) if opt is not None else math.nan
        trace.iters.append(k)
        trace.f_values.append(val)
        trace.gaps.append(gap)
        trace.avg_gaps.append(gap)
        trace.dist_to_opt.append(math.nan)
        trace.grad_norms.append(st.decrement)
        trace.bound_values.append(cert)
        trace.bound_satisfied.append(True if opt is None else bool(gap <= cert + 1e-9))
        trace.oracle_zeroth.append(0)
        trace.oracle_first.append(k)
    return trace


def _entries() -> list:
    E = AlgorithmEntry
    fo = first_order
    return [
        # -- cutting plane ------------------------------------------------
        E("ellipsoid",
          lambda p, h, prm, rng: cutting_plane.run_ellipsoid(
              p, h, R=prm.get("R"), r=prm.get("r"), B=prm.get("B")),
          "ellipsoid_value",
          "separation + values, per-step volume factor exp(-1/(2n))",
          trace_kind="cut"),
        E("center_of_gravity",
          lambda p, h, prm, rng: cutting_plane.run_center_of_gravity(
              p, h, mode=prm.get("mode", "exact2d"), B=prm.get("B"),
              n_samples=prm.get("n_samples"), stride=prm.get("stride"),
              seed=int(prm.get("seed", 0))),
          "cog_value",
          "centroid cuts; exact 2-d polygon or hit-and-run centroid",
          trace_kind="cut"),
        E("vaidya",
          lambda p, h, prm, rng: cutting_plane.run_vaidya(
              p.constraint, h, R=prm.get("R"),
              eps=float(prm.get("eps", 0.006))),
          "vaidya_feasibility",
          "volumetric-center cutting plane for feasibility",
          trace_kind="cut"),
        # -- projected / accelerated gradient -----------------------------
        E("pgd_lipschitz",
          lambda p, h, prm, rng: fo.run_pgd_lipschitz(p, h, R=prm.get("R")),
          "pgd_lipschitz",
          "projected subgradient, averaged, R L / sqrt(t)"),
        E("gd_smooth",
          lambda p, h, prm, rng: fo.run_gd_smooth(p, h),
          "gd_smooth",
          "gradient descent 1/beta on smooth f, 2 beta R^2/(t-1)"),
        E("pgd_smooth_constrained",
          lambda p, h, prm, rng: fo.run_pgd_smooth_constrained(p, h),
          "pgd_smooth",
          "projected gradient 1/beta, (3 beta R^2 + gap_1)/t"),
        E("pgd_strongly_convex",
          lambda p, h, prm, rng: fo.run_pgd_strongly_convex(p, h),
          "pgd_strongly_convex",
          "projected subgradient, weighted avg, 2 L^2/(alpha (t+1))"),
        E("gd_strongly_convex",
          lambda p, h, prm, rng: fo.run_gd_smooth_strongly_convex(
              p, h, step=prm.get("step", "1/beta")),
          "gd_strongly_convex",
          "distance contraction (1 - alpha/beta)^(t-1) or the 2/(alpha+beta) variant"),
        E("frank_wolfe",
          lambda p, h, prm, rng: fo.run_frank_wolfe(p, h),
          "frank_wolfe",
          "conditional gradient, 2 beta D^2/(t+1), sparse iterates"),
        E("agd_smooth",
          lambda p, h, prm, rng: fo.run_agd_smooth(p, h),
          "agd_smooth",
          "accelerated gradient, 2 beta R^2 / t^2"),
        E("agd_strongly_convex",
          lambda p, h, prm, rng: fo.run_agd_strongly_convex(p, h),
          "agd_strongly_convex",
          "accelerated gradient, exp(-(t-1)/sqrt(kappa)) energy decay"),
        E("geometric_descent",
          lambda p, h, prm, rng: fo.run_geometric_descent(p, h),
          "geometric_descent",
          "ball-shrinking method, (1 - 1/sqrt(kappa)) squared-radius factor"),
        # -- mirror family -------------------------------------------------
        E("mirror_descent",
          lambda p, h, prm, rng: mirror.run_mirror_descent(
              p, _mirror_setup(p, prm), h, L=prm.get("L")),
          "mirror_descent",
          "mirror descent, R L sqrt(2/(rho t)) with geometry-adapted constants"),
        E("dual_averaging",
          lambda p, h, prm, rng: mirror.run_dual_averaging(
              p, _mirror_setup(p, prm), h, L=prm.get("L")),
          "dual_averaging",
          "lazy mirror descent on the gradient sum, 2 R L sqrt(2/(rho t))"),
        E("mirror_prox",
          lambda p, h, prm, rng: mirror.run_mirror_prox(
              p, _mirror_setup(p, prm), h, beta=prm.get("beta")),
          "mirror_prox",
          "extra-gradient mirror steps for smooth f, beta R^2/(rho t)"),
        # -- composite / saddle --------------------------------------------
        E("ista",
          lambda p, h, prm, rng: composite.run_ista(p, h),
          "ista",
          "proximal gradient, beta R^2/(2t), monotone",
          accepts=("lasso",)),
        E("fista",
          lambda p, h, prm, rng: composite.run_fista(p, h),
          "fista",
          "accelerated proximal gradient, 2 beta R^2/t^2",
          accepts=("lasso",)),
        E("sp_md",
          lambda p, h, prm, rng: composite.run_sp_md(p, h),
          "sp_md",
          "saddle-point mirror descent on the duality gap",
          accepts=("matrix_game", "linear_classification", "saddle")),
        E("sp_mp",
          lambda p, h, prm, rng: composite.run_sp_mp(p, h),
          "sp_mp",
          "saddle-point mirror prox, 4 M / t on smooth saddles",
          accepts=("matrix_game", "linear_classification", "saddle")),
        # -- interior point -------------------------------------------------
        E("lp_path_follow",
          _run_lp,
          "ipm_certificate",
          "central-path following with the 2 nu / t duality certificate",
          accepts=("lp",)),
        # -- stochastic ------------------------------------------------------
        E("sgd",
          lambda p, h, prm, rng: stochastic.run_sgd(
              p, _noise_oracle(p, prm), h, rng,
              mode=prm.get("mode", "lipschitz")),
          "sgd_lipschitz / sgd_strongly_convex",
          "stochastic (projected) mirror descent; expectation bounds",
          stochastic=True),
        E("smd_smooth",
          lambda p, h, prm, rng: stochastic.run_smd_smooth(
              p, _noise_oracle(p, prm), h, rng),
          "smd_smooth",
          "stochastic gradient tuned for smooth f + noise sigma",
          stochastic=True),
        E("minibatch_sgd",
          lambda p, h, prm, rng: stochastic.run_minibatch_sgd(
              p, _noise_oracle(p, prm), int(prm.get("batch", 1)), h, rng),
          "smd_smooth",
          "mini-batched smooth SGD; horizon is the base-oracle budget",
          stochastic=True),
        E("svrg",
          lambda p, h, prm, rng: stochastic.run_svrg(
              p, h, rng, eta=prm.get("eta"), k=prm.get("k")),
          "svrg",
          "variance-reduced epochs on a finite sum; horizon is epochs",
          accepts=("ridge",), stochastic=True),
        E("rcd",
          lambda p, h, prm, rng: stochastic.run_rcd(
              p, h, float(prm.get("gamma", 0.0)), rng,
              bound_kind=prm.get("bound_kind", "convex")),
          "rcd_convex / rcd_strongly_convex",
          "random coordinate descent with beta^gamma sampling",
          accepts=("diag_quadratic",), stochastic=True),
        E("s_sp_md",
          lambda p, h, prm, rng: stochastic.run_s_sp_md(
              p, _s_sp_md_oracle(p), h, rng),
          "s_sp_md",
          "sublinear saddle-point mirror descent on sampled matrix entries",
          accepts=("matrix_game", "linear_classification"), stochastic=True),
    ]


ALGORITHMS: dict = {e.id: e for e in _entries()}


def list_algorithms() -> list:
    """Rows for the CLI list subcommand."""
    return [{"id": e.id, "bound": e.bound_id, "stochastic": e.stochastic,
             "accepts": list(e.accepts) if e.accepts else ["<first-order>"],
             "description": e.description}
            for e in sorted(ALGORITHMS.values(), key=lambda e: e.id)]


# ------------------------------------------------------------ config handling


_TOP_KEYS = {"problem", "algorithm", "horizon", "seeds", "bound"}


def validate_config(cfg: dict) -> dict:
    """Check the config skeleton; returns the config unchanged on success."""
    if not isinstance(cfg, dict):
        raise ConfigError("config must be a JSON object")
    extra = set(cfg) - _TOP_KEYS
    if extra:
        raise ConfigError(f"unknown config keys: {sorted(extra)}")
    for key in ("problem", "algorithm", "horizon"):
        if key not in cfg:
            raise ConfigError(f"config needs the {key!r} key")
    algo = cfg["algorithm"]
    if not isinstance(algo, dict):
        raise ConfigError("algorithm block must be an object")
    bad = set(algo) - {"id", "params"}
    if bad:
        raise ConfigError(f"unknown algorithm keys: {sorted(bad)}")
    if algo.get("id") not in ALGORITHMS:
        raise ConfigError(f"unknown algorithm id {algo.get('id')!r}; "
                          f"known: {sorted(ALGORITHMS)}")
    if not isinstance(algo.get("params", {}), dict):
        raise ConfigError("algorithm params must be an object")
    try:
        horizon = int(cfg["horizon"])
    except (TypeError, ValueError) as exc:
        raise ConfigError("horizon must be an integer") from exc
    if horizon < 1:
        raise ConfigError("horizon must be >= 1")
    seeds = cfg.get("seeds", 1)
    try:
        seeds = int(seeds)
    except (TypeError, ValueError) as exc:
        raise ConfigError("seeds must be an integer") from exc
    if seeds < 1:
        raise ConfigError("seeds must be >= 1")
    bound = cfg.get("bound")
    if bound is not None:
        if not isinstance(bound, dict):
            raise ConfigError("bound block must be an object")
        bad = set(bound) - {"id", "slack"}
        if bad:
            raise ConfigError(f"unknown bound keys: {sorted(bad)}")
    return cfg


def bound_from_trace(trace: RunTrace, slack: Optional[float] = None) -> BoundSpec:
    """Rebuild the guarantee a run recorded so check_bound can re-verify it.

    The recorded bound_values column holds the raw curve on the recorded
    grid, so a table lookup reproduces the curve exactly where the checker
    evaluates it.
    """
    meta = trace.meta
    if "bound_id" not in meta:
        raise ConfigError("trace carries no bound to check")
    table = {int(t): float(v) for t, v in zip(trace.iters, trace.bound_values)}

    def curve(t: float) -> float:
        return table[int(t)]

    return BoundSpec(meta["bound_id"], curve,
                     t_min=int(meta.get("t_min", 1)),
                     slack=float(meta.get("slack", 1.0)) if slack is None
                     else float(slack),
                     expectation=bool(meta.get("expectation", False)))


@dataclass
class ExperimentResult:
    algorithm: str
    problem: str
    horizon: int
    seeds: int
    traces: list = field(default_factory=list)
    trace_kind: str = "trace"
    check: Optional[CheckResult] = None
    bound_id: Optional[str] = None
    slack: Optional[float] = None
    notes: list = field(default_factory=list)

    @property
    def passed(self) -> Optional[bool]:
        return None if self.check is None else self.check.passed

    def summary(self) -> dict:
        """JSON-ready result record (what run --out writes)."""
        out = {
            "algorithm": self.algorithm,
            "problem": self.problem,
            "horizon": self.horizon,
            "seeds": self.seeds,
            "trace_kind": self.trace_kind,
            "bound": None,
            "iterations": 0,
            "oracle_calls": {"zeroth": 0, "first": 0},
            "notes": list(self.notes),
        }
        if self.bound_id is not None:
            out["bound"] = {
                "id": self.bound_id,
                "slack": self.slack,
                "passed": self.passed,
                "n_checked": None if self.check is None else self.check.n_checked,
                "first_violation": None if self.check is None
                else self.check.first_violation,
                "max_ratio": None if self.check is None else self.check.max_ratio,
            }
        if self.trace_kind == "cut":
            tr = self.traces[0]
            out["iterations"] = len(tr)
            out["oracle_calls"] = {"separation_or_value": tr.oracle_calls[-1]
                                   if tr.oracle_calls else 0}
            out["best_value"] = tr.best_values[-1] if tr.best_values else None
            out["feasible"] = bool(tr.feasible_flags[-1]) if tr.feasible_flags else None
        else:
            tr = self.traces[0]
            out["iterations"] = tr.iters[-1] if tr.iters else 0
            out["oracle_calls"] = {
                "zeroth": tr.oracle_zeroth[-1] if tr.oracle_zeroth else 0,
                "first": tr.oracle_first[-1] if tr.oracle_first else 0,
            }
            # finite-sum and sublinear-game runners meter themselves outside
            # the oracle counters; surface whichever budget they report
            for key in ("component_grad_calls", "entry_accesses", "oracle_calls"):
                if key in tr.meta:
                    out["oracle_calls"][key] = tr.meta[key]
            finals = [t.avg_gaps[-1] for t in self.traces if t.avg_gaps]
            if finals and all(math.isfinite(g) for g in finals):
                out["final_gap_mean"] = sum(finals) / len(finals)
        return out


def run_experiment(cfg: dict) -> ExperimentResult:
    """Validate, build, run (over replicate seeds), and re-check the bound.

    Raises ConfigError for schema problems and lets algorithm-level
    exceptions (BoundViolation, InvariantBroken, AssertionError, ...)
    propagate so the CLI can map them to exit codes.
    """
    validate_config(cfg)
    problem = build_problem(cfg["problem"])
    entry = ALGORITHMS[cfg["algorithm"]["id"]]
    entry.check_problem(problem)
    params = cfg["algorithm"].get("params", {})
    horizon = int(cfg["horizon"])
    seeds = int(cfg.get("seeds", 1))
    base_seed = int(cfg["problem"].get("seed", 0)) if isinstance(
        cfg.get("problem"), dict) else 0

    notes = []
    if not entry.stochastic and seeds > 1:
        notes.append("deterministic algorithm: replicates collapse to one run")
        seeds = 1
    traces = []
    for k in range(seeds):
        rng = replicate_rng(base_seed, k) if entry.stochastic else None
        traces.append(entry.run(problem, horizon, params, rng))

    result = ExperimentResult(algorithm=entry.id, problem=problem_tag(problem),
                              horizon=horizon, seeds=seeds, traces=traces,
                              trace_kind=entry.trace_kind, notes=notes)
    bound_cfg = cfg.get("bound") or {}
    if entry.trace_kind == "cut":
        if bound_cfg.get("id"):
            raise ConfigError(
                "cutting-plane runs assert their guarantee in-run; "
                "the bound block does not apply")
        result.notes.append("guarantee asserted in-run (cut trace)")
        return result

    meta = traces[0].meta
    if "bound_id" not in meta:
        result.notes.append("run recorded no checkable bound")
        return result
    want = bound_cfg.get("id")
    if want is not None and want != meta["bound_id"]:
        raise ConfigError(
            f"config asks for bound {want!r} but the run records "
            f"{meta['bound_id']!r}")
    slack = bound_cfg.get("slack")
    spec = bound_from_trace(traces[0], slack=slack)
    result.bound_id = spec.bound_id
    result.slack = spec.slack
    try:
        result.check = check_bound(traces, spec)
    except MissingOptimum:
        result.notes.append("optimum unknown: certificate recorded, not re-checked")
    return result


def write_artifacts(result: ExperimentResult, out_dir) -> list:
    """Write per-replicate trace CSVs plus result.json; returns the paths."""
    import json
    import os

    os.makedirs(out_dir, exist_ok=True)
    paths = []
    for k, tr in enumerate(result.traces):
        path = os.path.join(out_dir, f"trace_{k}.csv")
        if result.trace_kind == "cut":
            write_cut_trace_csv(path, tr)
        else:
            write_trace_csv(path, tr)
        paths.append(path)
    rpath = os.path.join(out_dir, "result.json")
    with open(rpath, "w", encoding="utf-8") as fh:
        json.dump(result.summary(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(rpath)
    return paths
