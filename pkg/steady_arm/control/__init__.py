"""Torque laws and the controllers built from them."""

from steady_arm.control.controllers import (
    AnalyticController,
    Controller,
    PDHoldController,
    SensorFrame,
    ZeroController,
)
from steady_arm.control.laws import (
    base_induced_accel,
    clip_torque,
    compensation_torque,
    ideal_controller,
    pd_torque,
    pose_error,
    ready_pose,
    responsive_accel,
    solve_ik,
    task_torque,
)
from steady_arm.control.models import Gains, TaskCommand, TorqueCommand

__all__ = [
    "AnalyticController",
    "Controller",
    "Gains",
    "PDHoldController",
    "SensorFrame",
    "TaskCommand",
    "TorqueCommand",
    "ZeroController",
    "base_induced_accel",
    "clip_torque",
    "compensation_torque",
    "ideal_controller",
    "pd_torque",
    "pose_error",
    "ready_pose",
    "responsive_accel",
    "solve_ik",
    "task_torque",
]
