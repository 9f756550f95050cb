"""convexkit: convex optimization algorithms with checkable convergence rates.

Every solver in this package carries its non-asymptotic guarantee as a
runtime object (a BoundSpec) and records enough of its trajectory that the
guarantee can be re-verified after the fact. The harness subpackage holds
the recording/checking machinery and the config-driven CLI; the remaining
modules are grouped by oracle model: cutting-plane methods, projected and
accelerated gradient methods, mirror methods, proximal/saddle methods,
interior-point methods, and stochastic methods.
"""

from .harness import (
    BoundSpec,
    BoundViolation,
    CheckResult,
    MissingOptimum,
    RateFit,
    RunTrace,
    TraceRecorder,
    check_bound,
    checkpoints,
    fit_rate,
)
from .oracles import ConstraintSet, DimensionMismatch, FirstOrderOracle, MissingOracle
from .problems import Problem, problem_from_config, problem_to_config

__version__ = "0.1.0"

__all__ = [
    "BoundSpec",
    "BoundViolation",
    "CheckResult",
    "ConstraintSet",
    "DimensionMismatch",
    "FirstOrderOracle",
    "MissingOptimum",
    "MissingOracle",
    "Problem",
    "RateFit",
    "RunTrace",
    "TraceRecorder",
    "check_bound",
    "checkpoints",
    "fit_rate",
    "problem_from_config",
    "problem_to_config",
    "__version__",
]
