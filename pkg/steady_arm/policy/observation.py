"""
Policy observations.

One frame is laid out as::

    [ cmd position (3) | cmd quaternion w,x,y,z (4) | IMU vdot_b (3) |
      IMU omega_b (3) | q (n) | qdot (n) | previous action (n) ]

An observation stacks ``H`` frames oldest first; missing frames at episode
start are zeros at the front.
"""

from collections import deque
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike

from steady_arm.control.controllers import SensorFrame
from steady_arm.control.models import TaskCommand
from steady_arm.sim.models import RolloutLog
from steady_arm.utils import FloatArray

_COMMAND_WIDTH = 7
_IMU_WIDTH = 6


def frame_size(n: int) -> int:
    """Width of one frame for an ``n``-joint arm."""
    return _COMMAND_WIDTH + _IMU_WIDTH + 3 * n


def observation_size(n: int, history: int) -> int:
    """Width of a stacked observation."""
    return history * frame_size(n)


def _frame(
    cmd: TaskCommand,
    vdot_b: FloatArray,
    omega_b: FloatArray,
    q: FloatArray,
    qdot: FloatArray,
    previous_action: FloatArray,
) -> FloatArray:
    return np.concatenate(
        [cmd.position, cmd.orientation, vdot_b, omega_b, q, qdot, previous_action]
    )


def observation_frame(
    cmd: TaskCommand, sensed: SensorFrame, previous_action: ArrayLike
) -> FloatArray:
    """Frame from what the controller senses at one tick."""
    return _frame(
        cmd,
        sensed.motion.vdot_b,
        sensed.motion.omega_b,
        sensed.state.q,
        sensed.state.qdot,
        np.asarray(previous_action, dtype=float),
    )


class ObservationHistory:
    """Rolling window of the last ``history`` frames."""

    def __init__(self, n: int, history: int):
        """Empty window for an ``n``-joint arm."""
        self.n = n
        self.history = history
        self._frames: deque[FloatArray] = deque(maxlen=history)

    def reset(self) -> None:
        """Forget every frame."""
        self._frames.clear()

    def push(self, frame: FloatArray) -> None:
        """Append the newest frame."""
        if frame.shape != (frame_size(self.n),):
            raise ValueError(f"frame must have length {frame_size(self.n)}")
        self._frames.append(frame)

    def vector(self) -> FloatArray:
        """Stacked observation, zero-padded at the oldest end."""
        missing = self.history - len(self._frames)
        padding = [np.zeros(frame_size(self.n))] * missing
        return np.concatenate([*padding, *self._frames])


def assemble_observation(
    log: RolloutLog,
    cmd: TaskCommand,
    previous_actions: ArrayLike,
    history: int,
    noise: Sequence[float] = (0.0, 0.0, 0.0, 0.0),
    rng: np.random.Generator | None = None,
) -> FloatArray:
    """
    Observation from the last ``history`` rows of a log.

    Args:
        log: Rollout log; its final rows are the newest frames.
        cmd: Task command.
        previous_actions: ``(k, n)`` actions in effect before each used row,
            newest last; missing rows count as zero.
        history: Frames per observation.
        noise: Standard deviations for joint position, joint velocity,
            accelerometer and gyro.
        rng: Generator for the noise; required when any deviation is positive.

    Returns:
        Vector of length ``history * (13 + 3 n)``.

    """
    n = log.n
    count = min(history, len(log))
    rows = range(len(log) - count, len(log))
    actions = np.asarray(previous_actions, dtype=float).reshape(-1, n)[-count:]
    if actions.shape[0] < count:
        actions = np.vstack([np.zeros((count - actions.shape[0], n)), actions])

    noise_q, noise_qdot, noise_accel, noise_gyro = noise
    noisy = any(noise)
    if noisy and rng is None:
        raise ValueError("observation noise needs a random generator")

    window = ObservationHistory(n, history)
    for offset, row in enumerate(rows):
        q = log.q[row].copy()
        qdot = log.qdot[row].copy()
        vdot_b = log.A_b[row, :3].copy()
        omega_b = log.V_b[row, 3:].copy()
        if noisy and rng is not None:
            q += noise_q * rng.standard_normal(n)
            qdot += noise_qdot * rng.standard_normal(n)
            vdot_b += noise_accel * rng.standard_normal(3)
            omega_b += noise_gyro * rng.standard_normal(3)
        window.push(_frame(cmd, vdot_b, omega_b, q, qdot, actions[offset]))
    return window.vector()
