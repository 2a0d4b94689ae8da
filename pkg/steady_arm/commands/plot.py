"""Command plotting end-effector accelerations of rollout logs."""

import logging
from collections.abc import Sequence
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
from pydantic import BaseModel  # noqa: E402

from steady_arm.sim.io import read_log_csv  # noqa: E402
from steady_arm.utils import ResponseWithMessage  # noqa: E402

logger = logging.getLogger(__name__)

PLOT_FILE = "accel.svg"


class PlotSummary(BaseModel):
    """The written figure."""

    path: Path
    logs: int


def plot_logic(
    logs: Sequence[Path], out: Path, name: str = PLOT_FILE
) -> ResponseWithMessage[PlotSummary]:
    """
    Plot world end-effector acceleration norms against time.

    One curve per log, linear and angular accelerations in separate panels.
    The SVG carries no timestamp and fixed element ids, so the same logs
    always give the same file.

    Args:
        logs: Rollout log CSVs; each is labelled with its file stem.
        out: Output directory.
        name: File name of the figure.

    Raises:
        ValueError: If no logs are given.
        SimulationError: If a log cannot be read.

    """
    if not logs:
        raise ValueError("plot needs at least one rollout log")
    figure, (linear, angular) = plt.subplots(2, 1, sharex=True, figsize=(8.0, 5.0))
    for path in logs:
        log = read_log_csv(path)
        lin = np.linalg.norm(log.a_ee_glob[:, :3], axis=1)
        ang = np.linalg.norm(log.a_ee_glob[:, 3:], axis=1)
        linear.plot(log.t, lin, label=path.stem)
        angular.plot(log.t, ang, label=path.stem)
    linear.set_ylabel("lin. acc. (m/s$^2$)")
    angular.set_ylabel("ang. acc. (rad/s$^2$)")
    angular.set_xlabel("time (s)")
    linear.legend(loc="upper right")
    for axis in (linear, angular):
        axis.grid(True, alpha=0.3)
    figure.tight_layout()

    out.mkdir(parents=True, exist_ok=True)
    path = out / name
    with plt.rc_context({"svg.hashsalt": "steady-arm"}):
        figure.savefig(path, format="svg", metadata={"Date": None})
    plt.close(figure)
    logger.info(f"Wrote acceleration plot of {len(logs)} log(s) to {path}")
    return ResponseWithMessage(
        message=f"plotted {len(logs)} log(s) to {path}",
        data=PlotSummary(path=path, logs=len(logs)),
    )
