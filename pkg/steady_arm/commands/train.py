"""Command training the residual policy."""

import logging
from pathlib import Path

from pydantic import BaseModel

from steady_arm.commands.bench import write_report
from steady_arm.commands.profile import HELD_OUT_STREAM, experiment_profiles
from steady_arm.config import ExperimentConfig
from steady_arm.errors import TrainingError
from steady_arm.eval.benchmark import POLICY_PREFIX, BenchmarkTable, benchmark
from steady_arm.policy.checkpoint import save_checkpoint
from steady_arm.policy.models import IterationStats
from steady_arm.policy.train import (
    TREND_WINDOW,
    TrainingSetup,
    torque_guide_trend,
    train,
    write_curve_csv,
)
from steady_arm.utils import ResponseWithMessage

logger = logging.getLogger(__name__)

CHECKPOINT_FILE = "policy.ckpt"
CURVE_FILE = "curve.csv"
HELD_OUT_STEM = "held_out"
BASELINE = "pd_hold"


class TrainSummary(BaseModel):
    """Training artifacts."""

    checkpoint: Path
    curve: Path
    iterations: int
    final: IterationStats | None = None
    torque_guide_trend: float | None = None
    held_out: BenchmarkTable | None = None
    held_out_report: Path | None = None


def training_setup(config: ExperimentConfig) -> TrainingSetup:
    """Episode configuration of ``config``, training-only plant settings applied."""
    model = config.load_model()
    return TrainingSetup(
        sim=config.sim.model_copy(update=config.train.sim_overrides()),
        ranges=config.disturbance.ranges(),
        gains=config.gains,
        weights=config.reward,
        switches=config.train.switches(),
        cmd=config.task_command(model),
    )


def train_logic(
    config: ExperimentConfig,
    out: Path | None = None,
    iterations: int | None = None,
) -> ResponseWithMessage[TrainSummary]:
    """
    Train a policy, then compare it with PD-hold on held-out profiles.

    Held-out profiles come from a seed stream the experiment profiles never
    use, drawn from ``[train] held_out_scenario`` (the experiment scenario
    when unset), and are evaluated without training noise.

    Args:
        config: The experiment.
        out: Output directory override.
        iterations: Overrides ``[ppo] iterations``.

    Raises:
        ValueError: If ``iterations`` is not positive.
        TrainingError: If an update produces a non-finite loss.

    """
    ppo = config.ppo
    if iterations is not None:
        if iterations < 1:
            raise ValueError(f"iterations must be positive, got {iterations}")
        ppo = ppo.model_copy(update={"iterations": iterations})
    model = config.load_model()
    setup = training_setup(config)
    directory = config.out_dir(out)

    try:
        result = train(model, setup, ppo)
    except TrainingError as e:
        logger.error(f"Training on '{model.name}' failed: {e}")
        raise
    checkpoint = directory / CHECKPOINT_FILE
    curve = directory / CURVE_FILE
    save_checkpoint(result.policy, checkpoint)
    write_curve_csv(result.curve, curve)
    summary = TrainSummary(
        checkpoint=checkpoint,
        curve=curve,
        iterations=len(result.curve),
        final=result.curve[-1] if result.curve else None,
    )
    message = f"trained {len(result.curve)} iteration(s); checkpoint {checkpoint}"
    if len(result.curve) >= 2 * TREND_WINDOW:
        trend = torque_guide_trend(result.curve)
        summary = summary.model_copy(update={"torque_guide_trend": trend})
        message += f"; torque-guide trend {trend:+.3e} per iteration"

    if config.train.held_out > 0:
        profiles = experiment_profiles(
            config,
            config.train.held_out,
            scenario=config.train.held_out_scenario,
            stream=HELD_OUT_STREAM,
        )
        policy_method = POLICY_PREFIX + str(checkpoint)
        table = benchmark(
            model,
            [BASELINE, policy_method],
            profiles,
            config.bench.rollouts,
            setup.cmd,
            config.sim,
            config.gains,
            config.bench.workers,
        )
        report, _ = write_report(table, directory, HELD_OUT_STEM)
        summary = summary.model_copy(
            update={"held_out": table, "held_out_report": report}
        )
        baseline, trained = table.row(BASELINE), table.row(policy_method)
        if baseline.mean_lin and trained.mean_lin is not None:
            ratio = trained.mean_lin / baseline.mean_lin
            message += f"; held-out mean lin ratio vs {BASELINE} {ratio:.3f}"
    return ResponseWithMessage(message=message, data=summary)
