"""Command running the paired benchmark."""

import logging
from pathlib import Path

from pydantic import BaseModel

from steady_arm.commands.profile import experiment_profiles
from steady_arm.config import ExperimentConfig
from steady_arm.eval.benchmark import (
    BenchmarkTable,
    benchmark,
    emit_markdown,
    write_benchmark_csv,
)
from steady_arm.utils import ResponseWithMessage

logger = logging.getLogger(__name__)


class BenchSummary(BaseModel):
    """The written report files and the table."""

    markdown: Path
    csv: Path
    table: BenchmarkTable


def write_report(
    table: BenchmarkTable, directory: Path, stem: str
) -> tuple[Path, Path]:
    """Write ``<stem>.md`` and ``<stem>.csv`` into ``directory``."""
    markdown = directory / f"{stem}.md"
    csv = directory / f"{stem}.csv"
    directory.mkdir(parents=True, exist_ok=True)
    markdown.write_text(emit_markdown(table), encoding="utf-8")
    write_benchmark_csv(table, csv)
    return markdown, csv


def bench_logic(
    config: ExperimentConfig, out: Path | None = None
) -> ResponseWithMessage[BenchSummary]:
    """
    Benchmark ``[bench] methods`` on the experiment profiles.

    Args:
        config: The experiment.
        out: Output directory override.

    Raises:
        ValueError: For an unknown method.
        CheckpointError: If a policy method's checkpoint cannot be loaded.

    """
    model = config.load_model()
    cmd = config.task_command(model)
    profiles = experiment_profiles(config, config.bench.profiles)
    table = benchmark(
        model,
        config.bench.methods,
        profiles,
        config.bench.rollouts,
        cmd,
        config.sim,
        config.gains,
        config.bench.workers,
    )
    markdown, csv = write_report(table, config.out_dir(out), "bench")
    failed = [row.method for row in table.rows if row.failed]
    message = f"benchmarked {len(table.rows)} method(s) on {len(profiles)} profile(s)"
    if failed:
        message += "; failed: " + ", ".join(failed)
    logger.info(f"Wrote benchmark report to {markdown}")
    return ResponseWithMessage(
        message=message, data=BenchSummary(markdown=markdown, csv=csv, table=table)
    )
