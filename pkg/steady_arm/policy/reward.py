"""Per-step training reward."""

import math

import numpy as np
from numpy.typing import ArrayLike

from steady_arm.control.laws import pose_error
from steady_arm.control.models import TaskCommand
from steady_arm.policy.models import RewardBreakdown, RewardWeights
from steady_arm.sim.models import RolloutRecord


def _dead_zone_exp(error: float, tolerance: float, std: float) -> float:
    excess = max(0.0, error - tolerance)
    return math.exp(-(excess**2) / std**2)


def torque_guide_distance(
    tau_measured: ArrayLike, tau_comp: ArrayLike, tau_task: ArrayLike
) -> float:
    """``|tau_measured - (tau_comp + tau_task)|``."""
    measured = np.asarray(tau_measured, dtype=float)
    ideal = np.asarray(tau_comp, dtype=float) + np.asarray(tau_task, dtype=float)
    return float(np.linalg.norm(measured - ideal))


def compute_reward(
    record: RolloutRecord,
    tau_comp: ArrayLike,
    tau_task: ArrayLike,
    cmd: TaskCommand,
    prev_action: ArrayLike,
    action: ArrayLike,
    weights: RewardWeights | None = None,
) -> RewardBreakdown:
    """
    Reward of one policy step.

    ``record.tau`` is the measured torque (the clipped total command) and
    ``record.a_ee_glob`` the end-effector acceleration that is penalized.

    Args:
        record: Logged instant the action is judged on.
        tau_comp: Analytic compensation torque at that instant.
        tau_task: Analytic task torque at that instant.
        cmd: Task command.
        prev_action: Previous joint-target offset.
        action: Current joint-target offset.
        weights: Reward weights; the defaults when omitted.

    Returns:
        The breakdown; its ``total`` is the scalar reward.

    """
    weights = weights or RewardWeights()
    error = pose_error(record.ee_pose, cmd.x_des)
    position_error = float(np.linalg.norm(error[:3]))
    orientation_error = float(np.linalg.norm(error[3:]))
    torque_distance = torque_guide_distance(record.tau, tau_comp, tau_task)
    lin_acc = float(np.linalg.norm(record.a_ee_glob[:3]))
    ang_acc = float(np.linalg.norm(record.a_ee_glob[3:]))
    step = np.asarray(prev_action, dtype=float) - np.asarray(action, dtype=float)
    action_change = float(np.linalg.norm(step))

    return RewardBreakdown(
        alive=weights.alive,
        position=weights.position
        * _dead_zone_exp(
            position_error, weights.position_tolerance, weights.position_std
        ),
        orientation=weights.orientation
        * _dead_zone_exp(
            orientation_error, weights.orientation_tolerance, weights.orientation_std
        ),
        torque_guide=weights.torque_guide * torque_distance,
        torque_guide_exp=weights.torque_guide_exp
        * math.exp(-torque_distance / weights.torque_guide_scale),
        ee_lin_acc=weights.ee_lin_acc * lin_acc,
        ee_lin_acc_exp=weights.ee_lin_acc_exp
        * math.exp(-(lin_acc**2) / weights.ee_lin_acc_std**2),
        ee_ang_acc=weights.ee_ang_acc * ang_acc,
        ee_ang_acc_exp=weights.ee_ang_acc_exp
        * math.exp(-(ang_acc**2) / weights.ee_ang_acc_std**2),
        action_rate=weights.action_rate * action_change,
    )
