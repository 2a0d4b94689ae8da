"""Stability metrics and the paired benchmark."""

from steady_arm.eval.benchmark import (
    BenchmarkRow,
    BenchmarkTable,
    benchmark,
    build_controller,
    emit_markdown,
    read_benchmark_csv,
    write_benchmark_csv,
)
from steady_arm.eval.metrics import (
    AggregateMetrics,
    StabilityMetrics,
    aggregate,
    compute_metrics,
    double_diff_accel,
)

__all__ = [
    "AggregateMetrics",
    "BenchmarkRow",
    "BenchmarkTable",
    "StabilityMetrics",
    "aggregate",
    "benchmark",
    "build_controller",
    "compute_metrics",
    "double_diff_accel",
    "emit_markdown",
    "read_benchmark_csv",
    "write_benchmark_csv",
]
