"""Command running one rollout and writing its log."""

import logging
from pathlib import Path

from pydantic import BaseModel

from steady_arm.commands.profile import experiment_profiles
from steady_arm.config import ExperimentConfig
from steady_arm.errors import MetricsError, RolloutAbortedError
from steady_arm.eval.benchmark import POLICY_PREFIX, build_controller
from steady_arm.eval.metrics import StabilityMetrics, compute_metrics
from steady_arm.sim.engine import rollout
from steady_arm.sim.io import write_log_csv
from steady_arm.sim.models import RolloutLog
from steady_arm.utils import ResponseWithMessage

logger = logging.getLogger(__name__)


class SimulateSummary(BaseModel):
    """The written log and its metrics."""

    path: Path
    method: str
    profile_index: int
    records: int
    metrics: StabilityMetrics | None = None


def log_name(method: str) -> str:
    """File name of a method's rollout log."""
    label = "policy" if method.startswith(POLICY_PREFIX) else method
    return f"rollout_{label}.csv"


def simulate_logic(
    config: ExperimentConfig,
    method: str = "ideal",
    profile_index: int = 0,
    out: Path | None = None,
) -> ResponseWithMessage[SimulateSummary]:
    """
    Roll out one method on one experiment profile.

    Args:
        config: The experiment.
        method: Controller name, see ``build_controller``.
        profile_index: Which experiment profile to use.
        out: Output directory override.

    Returns:
        Where the log went and its metrics, if the log is long enough.

    Raises:
        ValueError: For an unknown method or a bad profile index.
        RolloutAbortedError: If the rollout diverges; the records up to the
            failure are written first.

    """
    if profile_index < 0:
        raise ValueError(f"profile index must be non-negative, got {profile_index}")
    model = config.load_model()
    cmd = config.task_command(model)
    profiles = experiment_profiles(config, profile_index + 1)
    if profile_index >= len(profiles):
        raise ValueError(
            f"profile index {profile_index} out of range for {len(profiles)} profile(s)"
        )
    controller = build_controller(method, config.gains, config.sim.gravity)
    path = config.out_dir(out) / log_name(method)

    logger.info(f"Simulating {method} on profile {profile_index} of '{model.name}'")
    try:
        log = rollout(model, controller, profiles[profile_index], cmd, config.sim)
    except RolloutAbortedError as e:
        logger.error(f"Rollout of {method} aborted: {e}")
        if isinstance(e.partial, RolloutLog) and len(e.partial):
            write_log_csv(e.partial, path)
        raise
    write_log_csv(log, path)

    metrics = None
    try:
        metrics = compute_metrics(log)
    except MetricsError as e:
        logger.warning(f"No metrics for {path}: {e}")

    message = f"wrote {len(log)} records to {path}"
    if metrics is not None:
        message += (
            f"; mean lin {metrics.mean_lin:.3f} m/s^2, "
            f"mean ang {metrics.mean_ang:.3f} rad/s^2"
        )
    return ResponseWithMessage(
        message=message,
        data=SimulateSummary(
            path=path,
            method=method,
            profile_index=profile_index,
            records=len(log),
            metrics=metrics,
        ),
    )
