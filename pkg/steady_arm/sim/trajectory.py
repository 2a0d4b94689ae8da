"""Analytic base trajectories for the floating-base oracle."""

import math
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from pydantic import BaseModel, ConfigDict
from scipy.spatial.transform import Rotation

from steady_arm.disturbance.models import BaseMotionSample
from steady_arm.disturbance.profile import make_rng
from steady_arm.utils import FloatArray

Vec3 = tuple[float, float, float]

_ZERO3: Vec3 = (0.0, 0.0, 0.0)
_E_X = np.array([1.0, 0.0, 0.0])
_E_Y = np.array([0.0, 1.0, 0.0])
_E_Z = np.array([0.0, 0.0, 1.0])


@dataclass(frozen=True)
class BaseKinematics:
    """World pose of the base and its derivatives at one instant."""

    rotation: FloatArray
    position: FloatArray
    velocity: FloatArray
    acceleration: FloatArray
    angular_velocity: FloatArray
    angular_acceleration: FloatArray

    def body_motion(self) -> BaseMotionSample:
        """Twist and acceleration expressed in base coordinates."""
        to_base = self.rotation.T
        return BaseMotionSample(
            V_b=np.concatenate(
                [to_base @ self.velocity, to_base @ self.angular_velocity]
            ),
            A_b=np.concatenate(
                [to_base @ self.acceleration, to_base @ self.angular_acceleration]
            ),
        )


class BaseTrajectory(Protocol):
    """A twice-differentiable world trajectory of the base frame."""

    def at(self, t: float) -> BaseKinematics:
        """Base kinematics at time ``t``."""
        ...


class SinusoidalTrajectory(BaseModel):
    """
    Per-axis sinusoids for the base position and its ZYX Euler angles.

    Each coordinate is ``amplitude * sin(2 pi f t + phase)``; the Euler angles
    are (yaw, pitch, roll) applied as ``Rz(yaw) Ry(pitch) Rx(roll)``.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    translation_amplitude: Vec3 = _ZERO3
    translation_frequency: Vec3 = (1.0, 1.0, 1.0)
    translation_phase: Vec3 = _ZERO3
    rotation_amplitude: Vec3 = _ZERO3
    rotation_frequency: Vec3 = (1.0, 1.0, 1.0)
    rotation_phase: Vec3 = _ZERO3

    @classmethod
    def random(
        cls, seed: int, translation: float = 0.05, rotation: float = 0.2
    ) -> "SinusoidalTrajectory":
        """Draw a smooth trajectory with amplitudes up to the given bounds."""
        rng = make_rng(seed)

        def draw(low: float, high: float) -> Vec3:
            values = rng.uniform(low, high, size=3)
            return (float(values[0]), float(values[1]), float(values[2]))

        return cls(
            translation_amplitude=draw(-translation, translation),
            translation_frequency=draw(0.5, 2.0),
            translation_phase=draw(-math.pi, math.pi),
            rotation_amplitude=draw(-rotation, rotation),
            rotation_frequency=draw(0.5, 2.0),
            rotation_phase=draw(-math.pi, math.pi),
        )

    def at(self, t: float) -> BaseKinematics:
        """Analytic pose, velocity and acceleration at ``t``."""
        position, velocity, acceleration = _sinusoid(
            self.translation_amplitude,
            self.translation_frequency,
            self.translation_phase,
            t,
        )
        angles, rates, accels = _sinusoid(
            self.rotation_amplitude, self.rotation_frequency, self.rotation_phase, t
        )
        yaw, pitch, roll = angles
        yaw_rate, pitch_rate, roll_rate = rates
        yaw_accel, pitch_accel, roll_accel = accels

        rz = Rotation.from_euler("z", yaw).as_matrix()
        rzy = rz @ Rotation.from_euler("y", pitch).as_matrix()
        pitch_axis = rz @ _E_Y
        roll_axis = rzy @ _E_X

        yaw_pitch_omega = yaw_rate * _E_Z + pitch_rate * pitch_axis
        omega = yaw_pitch_omega + roll_rate * roll_axis
        alpha = (
            yaw_accel * _E_Z
            + pitch_accel * pitch_axis
            + pitch_rate * np.cross(yaw_rate * _E_Z, pitch_axis)
            + roll_accel * roll_axis
            + roll_rate * np.cross(yaw_pitch_omega, roll_axis)
        )
        rotation = Rotation.from_euler("ZYX", [yaw, pitch, roll]).as_matrix()
        return BaseKinematics(
            rotation=rotation,
            position=position,
            velocity=velocity,
            acceleration=acceleration,
            angular_velocity=omega,
            angular_acceleration=alpha,
        )


def _sinusoid(
    amplitude: Vec3, frequency: Vec3, phase: Vec3, t: float
) -> tuple[FloatArray, FloatArray, FloatArray]:
    a = np.asarray(amplitude, dtype=float)
    w = 2.0 * math.pi * np.asarray(frequency, dtype=float)
    angle = w * t + np.asarray(phase, dtype=float)
    return a * np.sin(angle), a * w * np.cos(angle), -a * w * w * np.sin(angle)


class StaticTrajectory:
    """A base that never moves."""

    def at(self, t: float) -> BaseKinematics:
        """Identity pose, zero derivatives."""
        zero = np.zeros(3)
        return BaseKinematics(
            rotation=np.eye(3),
            position=zero,
            velocity=zero,
            acceleration=zero,
            angular_velocity=zero,
            angular_acceleration=zero,
        )

