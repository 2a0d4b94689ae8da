"""
Paired multi-method benchmark.

Every method runs on the same profiles with the same per-rollout seeds; a
cell is one (method, profile, rollout) triple. Results are reported as a
table with one row per method: mean and standard deviation, over all cells,
of the per-rollout mean and max accelerations.
"""

import csv
import logging
from collections.abc import Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path

import numpy as np
from pydantic import BaseModel

from steady_arm.chain.models import ChainModel
from steady_arm.control.controllers import (
    AnalyticController,
    Controller,
    PDHoldController,
)
from steady_arm.control.models import Gains, TaskCommand
from steady_arm.disturbance.models import DisturbanceProfile
from steady_arm.disturbance.profile import make_rng
from steady_arm.errors import MetricsError, SimulationError, SteadyArmError
from steady_arm.eval.metrics import StabilityMetrics, aggregate, compute_metrics
from steady_arm.policy.checkpoint import load_checkpoint
from steady_arm.policy.network import GaussianPolicy
from steady_arm.policy.train import PolicyController
from steady_arm.sim.engine import rollout
from steady_arm.sim.models import SimConfig
from steady_arm.textformat import format_float

logger = logging.getLogger(__name__)

BUILTIN_METHODS = ("pd_hold", "task_only", "ideal")
POLICY_PREFIX = "policy:"
CSV_COLUMNS = (
    "method",
    "mean_lin",
    "std",
    "max_lin",
    "std",
    "mean_ang",
    "std",
    "max_ang",
    "std",
)
FAILED = "--"


class BenchmarkRow(BaseModel):
    """One method's aggregate; ``None`` values mark a failed method."""

    method: str
    mean_lin: float | None = None
    mean_lin_std: float | None = None
    max_lin: float | None = None
    max_lin_std: float | None = None
    mean_ang: float | None = None
    mean_ang_std: float | None = None
    max_ang: float | None = None
    max_ang_std: float | None = None

    @property
    def failed(self) -> bool:
        """Whether any rollout of the method aborted."""
        return self.mean_lin is None

    def values(self) -> list[float | None]:
        """Numeric columns in table order."""
        return [
            self.mean_lin,
            self.mean_lin_std,
            self.max_lin,
            self.max_lin_std,
            self.mean_ang,
            self.mean_ang_std,
            self.max_ang,
            self.max_ang_std,
        ]


class BenchmarkTable(BaseModel):
    """Rows in the order the methods were requested."""

    rows: list[BenchmarkRow]

    def row(self, method: str) -> BenchmarkRow:
        """Row of ``method``."""
        for row in self.rows:
            if row.method == method:
                return row
        raise KeyError(method)


@dataclass(frozen=True)
class Cell:
    """One rollout of the benchmark grid."""

    method: str
    profile_index: int
    rollout_index: int
    seed: int


@lru_cache(maxsize=8)
def _cached_policy(path: str, modified: int) -> GaussianPolicy:
    return load_checkpoint(Path(path))


def _load_policy(path: str) -> GaussianPolicy:
    try:
        modified = Path(path).stat().st_mtime_ns
    except OSError:
        modified = 0
    return _cached_policy(path, modified)


def build_controller(
    method: str, gains: Gains, gravity: Sequence[float] | None = None
) -> Controller:
    """
    Controller for a method name.

    Args:
        method: ``pd_hold``, ``task_only``, ``ideal`` or ``policy:<checkpoint>``.
        gains: Feedback gains shared by all methods.
        gravity: Gravity vector the model-based terms assume.

    Raises:
        ValueError: For an unknown method name.
        CheckpointError: If a policy checkpoint cannot be loaded.

    """
    g = None if gravity is None else np.asarray(gravity, dtype=float)
    if method == "pd_hold":
        return PDHoldController(gains, gravity=g)
    if method == "task_only":
        return AnalyticController(gains, use_compensation=False, gravity=g)
    if method == "ideal":
        return AnalyticController(gains, use_compensation=True, gravity=g)
    if method.startswith(POLICY_PREFIX):
        policy = _load_policy(method.removeprefix(POLICY_PREFIX))
        return PolicyController(policy.copy(), gains, gravity=g, name=method)
    raise ValueError(
        f"unknown method '{method}'; expected one of {', '.join(BUILTIN_METHODS)} "
        f"or {POLICY_PREFIX}<checkpoint>"
    )


def _run_cell(
    args: tuple[
        ChainModel, Cell, DisturbanceProfile, TaskCommand | None, SimConfig, Gains
    ],
) -> tuple[Cell, StabilityMetrics | None]:
    model, cell, profile, cmd, config, gains = args
    controller = build_controller(cell.method, gains, config.gravity)
    try:
        seeded = config.model_copy(update={"seed": cell.seed})
        log = rollout(model, controller, profile, cmd, seeded)
        return cell, compute_metrics(log)
    except (SimulationError, MetricsError) as e:
        logger.warning(
            f"Benchmark cell {cell.method} / profile {cell.profile_index} / "
            f"rollout {cell.rollout_index} failed: {e}"
        )
        return cell, None


def benchmark(
    model: ChainModel,
    methods: Sequence[str],
    profiles: Sequence[DisturbanceProfile],
    rollouts: int,
    cmd: TaskCommand | None,
    config: SimConfig,
    gains: Gains | None = None,
    workers: int = 1,
) -> BenchmarkTable:
    """
    Run every method on every profile ``rollouts`` times.

    Rollout ``r`` of profile ``k`` uses the same simulator seed for every
    method, so observation noise is paired too.

    Args:
        model: The arm.
        methods: Method names (see ``build_controller``).
        profiles: Disturbance profiles.
        rollouts: Rollouts per (method, profile) cell, at least 1.
        cmd: Task command; holds the initial pose when ``None``.
        config: Simulation settings; its seed roots the rollout seeds.
        gains: Feedback gains shared by all methods.
        workers: Parallel processes.

    Returns:
        One row per method; a method with any failed rollout is marked failed.

    Raises:
        ValueError: If ``rollouts`` < 1, or no methods or profiles are given.

    """
    if rollouts < 1:
        raise ValueError(f"rollouts per cell must be at least 1, got {rollouts}")
    if not methods or not profiles:
        raise ValueError("benchmark needs at least one method and one profile")
    gains = gains or Gains()
    for method in methods:
        build_controller(method, gains, config.gravity)

    seeds = make_rng(config.seed).integers(0, 2**31 - 1, size=(len(profiles), rollouts))
    cells = [
        Cell(method, k, r, int(seeds[k, r]))
        for method in methods
        for k in range(len(profiles))
        for r in range(rollouts)
    ]
    jobs = [
        (model, cell, profiles[cell.profile_index], cmd, config, gains)
        for cell in cells
    ]
    logger.info(
        f"Benchmarking {len(methods)} method(s) x {len(profiles)} profile(s) x "
        f"{rollouts} rollout(s) on '{model.name}'"
    )
    if workers > 1:
        with ProcessPoolExecutor(workers) as executor:
            results = dict(executor.map(_run_cell, jobs))
    else:
        results = dict(_run_cell(job) for job in jobs)

    rows = []
    for method in methods:
        scored = [results[cell] for cell in cells if cell.method == method]
        if any(metrics is None for metrics in scored):
            rows.append(BenchmarkRow(method=method))
            continue
        summary = aggregate([metrics for metrics in scored if metrics is not None])
        rows.append(
            BenchmarkRow(
                method=method,
                **summary.model_dump(exclude={"rollouts"}),
            )
        )
        logger.info(
            f"{method}: mean lin {summary.mean_lin:.4f} +- {summary.mean_lin_std:.4f}"
        )
    return BenchmarkTable(rows=rows)


def _fmt(value: float | None, decimals: int = 3) -> str:
    return FAILED if value is None else f"{value:.{decimals}f}"


def emit_markdown(table: BenchmarkTable) -> str:
    """Markdown table with ``mean +- std`` cells and ``--`` for failures."""
    lines = [
        "| Method | LinAcc mean (m/s^2) | LinAcc max (m/s^2) "
        "| AngAcc mean (rad/s^2) | AngAcc max (rad/s^2) |",
        "| --- | --- | --- | --- | --- |",
    ]
    for row in table.rows:
        values = row.values()
        cells = [
            FAILED if value is None else f"{_fmt(value)} ± {_fmt(spread)}"
            for value, spread in zip(values[::2], values[1::2], strict=True)
        ]
        lines.append("| " + " | ".join([row.method, *cells]) + " |")
    return "\n".join(lines) + "\n"


def write_benchmark_csv(table: BenchmarkTable, path: Path) -> None:
    """Write the table with round-trip float precision."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in table.rows:
            writer.writerow(
                [
                    row.method,
                    *(
                        FAILED if value is None else format_float(value)
                        for value in row.values()
                    ),
                ]
            )
    logger.info(f"Wrote benchmark table to {path}")


def read_benchmark_csv(path: Path) -> BenchmarkTable:
    """
    Read a table written by ``write_benchmark_csv``.

    Raises:
        SteadyArmError: If the file is unreadable or not a benchmark table.

    """
    try:
        with path.open(newline="", encoding="utf-8") as handle:
            lines = list(csv.reader(handle))
    except OSError as e:
        raise SteadyArmError(f"cannot read benchmark table {path}: {e}") from e
    if not lines or tuple(lines[0]) != CSV_COLUMNS:
        raise SteadyArmError(f"{path} does not have a benchmark header")
    names = list(BenchmarkRow.model_fields)[1:]
    rows = []
    for line in lines[1:]:
        if len(line) != len(CSV_COLUMNS):
            raise SteadyArmError(f"{path}: malformed row {line}")
        try:
            values = [None if cell == FAILED else float(cell) for cell in line[1:]]
        except ValueError as e:
            raise SteadyArmError(f"{path}: {e}") from e
        fields = dict(zip(names, values, strict=True))
        rows.append(BenchmarkRow(method=line[0], **fields))
    return BenchmarkTable(rows=rows)
