"""Models for task commands, gains and controller outputs."""

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from steady_arm.constants import get_constants
from steady_arm.dynamics.kinematics import Pose
from steady_arm.utils import FloatArray

Vec3 = tuple[float, float, float]
Vec6 = tuple[float, float, float, float, float, float]
Quaternion = tuple[float, float, float, float]

_constants = get_constants()
_ZERO6: Vec6 = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


class TaskCommand(BaseModel):
    """Desired end-effector pose and twist, in the base frame."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    position: Vec3 = Field(..., description="Desired EE position (m)")
    orientation: Quaternion = Field(
        ..., description="Desired EE orientation (w, x, y, z)"
    )
    xdot_des: Vec6 = Field(default=_ZERO6, description="Desired EE twist [v; omega]")

    @field_validator("orientation")
    @classmethod
    def _unit_quaternion(cls, value: Quaternion) -> Quaternion:
        norm = float(np.linalg.norm(value))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"orientation must be a unit quaternion, norm is {norm}")
        return value

    @classmethod
    def hold(cls, pose: Pose) -> "TaskCommand":
        """Command that holds ``pose`` still."""
        return cls(
            position=tuple(float(value) for value in pose.position),
            orientation=tuple(float(value) for value in pose.orientation),
        )

    @property
    def x_des(self) -> Pose:
        """Desired pose."""
        return Pose(
            position=np.array(self.position, dtype=float),
            orientation=np.array(self.orientation, dtype=float),
        )


class Gains(BaseModel):
    """Operational-space and joint-space feedback gains."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    Kbar_p: Vec6 = Field(
        default=(_constants.TASK_KP,) * 6, description="Operational stiffness"
    )
    Kbar_d: Vec6 = Field(
        default=(_constants.TASK_KD,) * 6, description="Operational damping"
    )
    Kp: float = Field(default=_constants.JOINT_KP, ge=0, description="Joint stiffness")
    Kd: float = Field(default=_constants.JOINT_KD, ge=0, description="Joint damping")
    k_null: float = Field(
        default=_constants.NULL_DAMPING, ge=0, description="Null-space joint damping"
    )

    @field_validator("Kbar_p", "Kbar_d")
    @classmethod
    def _non_negative(cls, value: Vec6) -> Vec6:
        if any(gain < 0 for gain in value):
            raise ValueError("operational gains must be non-negative")
        return value


@dataclass(frozen=True)
class TorqueCommand:
    """Total commanded torque and its analytic parts."""

    torque: FloatArray
    tau_comp: FloatArray
    tau_task: FloatArray
    clipped: bool = False

    @classmethod
    def plain(cls, torque: FloatArray, clipped: bool = False) -> "TorqueCommand":
        """A torque without an analytic decomposition."""
        zeros = np.zeros_like(torque)
        return cls(torque=torque, tau_comp=zeros, tau_task=zeros, clipped=clipped)
