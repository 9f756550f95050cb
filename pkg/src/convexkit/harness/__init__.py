from .core import (
    BoundSpec,
    BoundViolation,
    CheckResult,
    MissingOptimum,
    NonPositiveGap,
    RateFit,
    RunTrace,
    TraceRecorder,
    check_bound,
    checkpoints,
    fit_rate,
    write_cut_trace_csv,
    write_first_order_csv,
    write_trace_csv,
)

__all__ = [
    "BoundSpec",
    "BoundViolation",
    "CheckResult",
    "MissingOptimum",
    "NonPositiveGap",
    "RateFit",
    "RunTrace",
    "TraceRecorder",
    "check_bound",
    "checkpoints",
    "fit_rate",
    "write_cut_trace_csv",
    "write_first_order_csv",
    "write_trace_csv",
]
