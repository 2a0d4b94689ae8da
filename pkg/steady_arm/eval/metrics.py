"""
End-effector stability metrics.

A rollout is scored by the mean and the maximum of the world end-effector
acceleration norms, linear and angular, after a warm-up window. Pose series
sampled like a motion-capture system can be turned into accelerations by
double differentiation.
"""

import logging
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike
from pydantic import BaseModel, Field
from scipy.spatial.transform import Rotation

from steady_arm.constants import get_constants
from steady_arm.errors import MetricsError
from steady_arm.sim.models import RolloutLog
from steady_arm.utils import FloatArray

logger = logging.getLogger(__name__)

_MAD_SCALE = 1.4826
_TIME_SLACK = 1e-9


class StabilityMetrics(BaseModel):
    """Acceleration statistics of one rollout."""

    mean_lin: float = Field(..., ge=0, description="Mean linear acceleration (m/s^2)")
    max_lin: float = Field(..., ge=0, description="Max linear acceleration (m/s^2)")
    mean_ang: float = Field(
        ..., ge=0, description="Mean angular acceleration (rad/s^2)"
    )
    max_ang: float = Field(..., ge=0, description="Max angular acceleration (rad/s^2)")


class AggregateMetrics(BaseModel):
    """Mean and population standard deviation of per-rollout metrics."""

    mean_lin: float
    mean_lin_std: float
    max_lin: float
    max_lin_std: float
    mean_ang: float
    mean_ang_std: float
    max_ang: float
    max_ang_std: float
    rollouts: int = Field(..., ge=1)


def compute_metrics(log: RolloutLog, warmup: float | None = None) -> StabilityMetrics:
    """
    Score one rollout on its logged ``a_ee_glob``.

    Records earlier than ``warmup`` seconds after the first record are
    ignored.

    Args:
        log: Rollout log.
        warmup: Warm-up window (s); the configured default when omitted.

    Raises:
        MetricsError: If the log is empty or nothing remains after warm-up.

    """
    if len(log) == 0:
        raise MetricsError("cannot score an empty rollout log")
    warmup = get_constants().METRICS_WARMUP if warmup is None else warmup
    keep = log.t - log.t[0] >= warmup - _TIME_SLACK
    if not np.any(keep):
        raise MetricsError(
            f"no records after the {warmup} s warm-up "
            f"(log spans {log.t[-1] - log.t[0]:.3f} s)"
        )
    lin = np.linalg.norm(log.a_ee_glob[keep, :3], axis=1)
    ang = np.linalg.norm(log.a_ee_glob[keep, 3:], axis=1)
    return StabilityMetrics(
        mean_lin=float(np.mean(lin)),
        max_lin=float(np.max(lin)),
        mean_ang=float(np.mean(ang)),
        max_ang=float(np.max(ang)),
    )


def aggregate(metrics: Sequence[StabilityMetrics]) -> AggregateMetrics:
    """
    Mean and standard deviation over rollouts.

    The max columns aggregate per-rollout maxima.

    Raises:
        MetricsError: For an empty sequence.

    """
    if not metrics:
        raise MetricsError("cannot aggregate zero rollouts")
    table = np.array([[m.mean_lin, m.max_lin, m.mean_ang, m.max_ang] for m in metrics])
    mean = table.mean(axis=0)
    std = table.std(axis=0)
    return AggregateMetrics(
        mean_lin=float(mean[0]),
        mean_lin_std=float(std[0]),
        max_lin=float(mean[1]),
        max_lin_std=float(std[1]),
        mean_ang=float(mean[2]),
        mean_ang_std=float(std[2]),
        max_ang=float(mean[3]),
        max_ang_std=float(std[3]),
        rollouts=len(metrics),
    )


def _pad_edges(interior: FloatArray) -> FloatArray:
    return np.vstack([interior[:1], interior, interior[-1:]])


def remove_outliers(series: FloatArray, threshold: float) -> tuple[FloatArray, int]:
    """
    Replace rows whose norm is an outlier by linear interpolation.

    A row is an outlier when its norm deviates from the median norm by more
    than ``threshold`` scaled median absolute deviations.

    Returns:
        The cleaned series and the number of replaced rows.

    """
    norms = np.linalg.norm(series, axis=1)
    deviation = np.abs(norms - np.median(norms))
    scale = _MAD_SCALE * np.median(deviation)
    flagged = deviation > threshold * scale if scale > 0 else deviation > 0
    count = int(np.sum(flagged))
    if count == 0 or count == len(series):
        return series, 0
    index = np.arange(len(series))
    cleaned = series.copy()
    for column in range(series.shape[1]):
        cleaned[flagged, column] = np.interp(
            index[flagged], index[~flagged], series[~flagged, column]
        )
    return cleaned, count


def double_diff_accel(
    positions: ArrayLike,
    orientations: ArrayLike,
    rate: float,
    threshold: float | None = None,
) -> tuple[FloatArray, FloatArray]:
    """
    Accelerations of a sampled pose series.

    Linear acceleration is the central second difference of the positions.
    Angular velocity between samples is the rotation vector of consecutive
    orientation increments times ``rate``; angular acceleration is the first
    difference of those rates. Edge samples repeat their neighbour. Outliers
    are then removed and infilled.

    Args:
        positions: ``(N, 3)`` positions (m).
        orientations: ``(N, 4)`` unit quaternions ``(w, x, y, z)``.
        rate: Sampling rate (Hz).
        threshold: Outlier threshold in MAD units; the configured default
            when omitted.

    Returns:
        ``(N, 3)`` linear and ``(N, 3)`` angular accelerations.

    Raises:
        MetricsError: If ``rate`` is not positive or fewer than 3 samples
            are given.

    """
    p = np.asarray(positions, dtype=float).reshape(-1, 3)
    quats = np.asarray(orientations, dtype=float).reshape(-1, 4)
    if rate <= 0:
        raise MetricsError(f"sampling rate must be positive, got {rate}")
    if p.shape[0] < 3 or quats.shape[0] != p.shape[0]:
        raise MetricsError(
            f"need at least 3 matching pose samples, got {p.shape[0]} positions "
            f"and {quats.shape[0]} orientations"
        )
    threshold = get_constants().MAD_THRESHOLD if threshold is None else threshold

    lin = _pad_edges((p[2:] - 2.0 * p[1:-1] + p[:-2]) * rate**2)

    rotations = Rotation.from_quat(quats, scalar_first=True)
    increments = rotations[1:] * rotations[:-1].inv()
    rates = increments.as_rotvec() * rate
    ang = _pad_edges((rates[1:] - rates[:-1]) * rate)

    lin, lin_removed = remove_outliers(lin, threshold)
    ang, ang_removed = remove_outliers(ang, threshold)
    if lin_removed or ang_removed:
        logger.debug(
            f"Removed {lin_removed} linear and {ang_removed} angular outlier samples"
        )
    return lin, ang
