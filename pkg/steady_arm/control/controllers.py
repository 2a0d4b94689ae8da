"""
Controllers the simulator can drive.

A controller is planned at the control rate and asked for a torque at the PD
rate; the simulator holds each torque until the next PD tick.
"""

import logging
from dataclasses import dataclass
from typing import Protocol

import numpy as np

from steady_arm.chain.models import ChainModel
from steady_arm.control.laws import (
    ideal_controller,
    pd_torque,
    solve_ik,
)
from steady_arm.control.models import Gains, TaskCommand, TorqueCommand
from steady_arm.disturbance.models import BaseMotionSample
from steady_arm.disturbance.wrench import link_wrenches
from steady_arm.dynamics.kinematics import JointState
from steady_arm.dynamics.rigid_body import (
    compute_dynamics,
    default_task_rows,
    gravity_torque,
)
from steady_arm.utils import FloatArray

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class SensorFrame:
    """What a controller observes at one tick (possibly noisy)."""

    t: float
    state: JointState
    motion: BaseMotionSample


class Controller(Protocol):
    """Interface between the simulator and a control law."""

    name: str

    def reset(self, model: ChainModel, cmd: TaskCommand, initial: JointState) -> None:
        """Prepare for a new rollout."""
        ...

    def plan(self, sensed: SensorFrame) -> None:
        """Update slow targets; called at the control rate."""
        ...

    def torque(self, sensed: SensorFrame) -> TorqueCommand:
        """Commanded torque; called at the PD rate."""
        ...


class AnalyticController:
    """
    Compensation plus operational-space tracking.

    With ``use_compensation=False`` this is the task-only ablation.
    """

    def __init__(
        self,
        gains: Gains | None = None,
        use_compensation: bool = True,
        gravity: FloatArray | None = None,
        name: str | None = None,
    ):
        """
        Initialize the controller.

        Args:
            gains: Feedback gains.
            use_compensation: Add ``tau_comp`` to ``tau_task``.
            gravity: Gravity vector the model-based terms assume.
            name: Display name; derived from the flags when omitted.

        """
        self.gains = gains or Gains()
        self.use_compensation = use_compensation
        self.gravity = gravity
        self.name = name or ("ideal" if use_compensation else "task_only")
        self._model: ChainModel | None = None
        self._cmd: TaskCommand | None = None

    def reset(self, model: ChainModel, cmd: TaskCommand, initial: JointState) -> None:
        """Store the model and command."""
        self._model = model
        self._cmd = cmd

    def plan(self, sensed: SensorFrame) -> None:
        """Nothing to plan; the laws are evaluated every PD tick."""
        return None

    def torque(self, sensed: SensorFrame) -> TorqueCommand:
        """Evaluate the analytic laws on the sensed state."""
        if self._model is None or self._cmd is None:
            raise RuntimeError("controller used before reset()")
        model = self._model
        dynamics = compute_dynamics(model, sensed.state, self.gravity)
        wrenches = link_wrenches(model, sensed.state, sensed.motion, dynamics.frames)
        return ideal_controller(
            model,
            sensed.state,
            sensed.motion,
            wrenches,
            self._cmd,
            self.gains,
            use_compensation=self.use_compensation,
            dynamics=dynamics,
        )


class PDHoldController:
    """
    Joint PD holding targets solved once by inverse kinematics at reset.

    Gravity is fed forward in joint space so the hold does not sag.
    """

    def __init__(
        self, gains: Gains | None = None, gravity: FloatArray | None = None
    ):
        """Initialize with joint gains and the assumed gravity vector."""
        self.gains = gains or Gains()
        self.gravity = gravity
        self.name = "pd_hold"
        self._model: ChainModel | None = None
        self._q_hold: FloatArray | None = None

    def reset(self, model: ChainModel, cmd: TaskCommand, initial: JointState) -> None:
        """Solve the hold targets for the commanded pose."""
        self._model = model
        self._q_hold = solve_ik(model, cmd.x_des, initial.q, default_task_rows(model))
        logger.debug(f"PD hold targets: {np.array2string(self._q_hold, precision=4)}")

    def plan(self, sensed: SensorFrame) -> None:
        """Targets are fixed for the whole rollout."""
        return None

    def torque(self, sensed: SensorFrame) -> TorqueCommand:
        """PD toward the hold targets plus gravity feed-forward."""
        if self._model is None or self._q_hold is None:
            raise RuntimeError("controller used before reset()")
        held = gravity_torque(self._model, sensed.state.q, self.gravity)
        feedback = pd_torque(self.gains, self._q_hold, sensed.state)
        return TorqueCommand.plain(feedback + held)


class ZeroController:
    """Applies no torque; used for passive and oracle checks."""

    name = "zero"

    def reset(self, model: ChainModel, cmd: TaskCommand, initial: JointState) -> None:
        """Remember the joint count."""
        self._n = model.n

    def plan(self, sensed: SensorFrame) -> None:
        """Nothing to plan."""
        return None

    def torque(self, sensed: SensorFrame) -> TorqueCommand:
        """Zero torque."""
        return TorqueCommand.plain(np.zeros(self._n))

