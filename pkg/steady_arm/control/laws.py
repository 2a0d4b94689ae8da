"""
Torque laws for end-effector stabilization.

The end-effector acceleration seen from the world splits into a part
induced by base motion and a part produced by the arm itself. The
compensation torque cancels the base-induced and wrench-responsive parts on
the task rows; the task torque tracks the commanded pose in operational
space.
"""

import logging

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import cho_factor, cho_solve

from steady_arm.chain.models import ChainModel
from steady_arm.constants import get_constants
from steady_arm.control.models import Gains, TaskCommand, TorqueCommand
from steady_arm.disturbance.models import BaseMotionSample
from steady_arm.disturbance.wrench import link_wrenches
from steady_arm.dynamics.kinematics import (
    END_EFFECTOR,
    JointState,
    Pose,
    forward_kinematics,
    jacobian,
)
from steady_arm.dynamics.rigid_body import (
    DynamicsQuantities,
    compute_dynamics,
    generalized_wrench_torque,
    mass_matrix,
)
from steady_arm.utils import FloatArray, as_vector

logger = logging.getLogger(__name__)


def base_induced_accel(
    r_ee_loc: ArrayLike, v_ee_loc: ArrayLike, motion: BaseMotionSample
) -> FloatArray:
    """
    End-effector acceleration caused by base motion alone.

    Linear part ``vdot_b + 2 omega_b x v + omega_b x (omega_b x r) +
    omegadot_b x r``; the angular part is ``omegadot_b``.

    Args:
        r_ee_loc: End-effector position in the base frame.
        v_ee_loc: End-effector velocity relative to the base.
        motion: Base twist and acceleration.

    Returns:
        The 6-vector ``a_ee_base``.

    """
    r = as_vector(r_ee_loc, 3, "r_ee_loc")
    v = as_vector(v_ee_loc, 3, "v_ee_loc")
    omega = motion.omega_b
    linear = (
        motion.vdot_b
        + 2.0 * np.cross(omega, v)
        + np.cross(omega, np.cross(omega, r))
        + np.cross(motion.omegadot_b, r)
    )
    return np.concatenate([linear, motion.omegadot_b])


def responsive_accel(
    model: ChainModel,
    q: ArrayLike,
    wrenches: ArrayLike,
    dynamics: DynamicsQuantities | None = None,
) -> FloatArray:
    """
    End-effector acceleration responding to link wrenches, ``J M^-1 sum J_i^T w_i``.

    Args:
        model: The arm.
        q: Joint positions.
        wrenches: ``(B, 6)`` link wrenches.
        dynamics: Precomputed dynamics for ``q``.

    Returns:
        The 6-vector ``a_resp``.

    Raises:
        ValueError: If the wrench count does not match the link count.

    """
    if dynamics is None:
        frames = forward_kinematics(model, q)
        task = jacobian(model, q, END_EFFECTOR, frames)
        matrix = mass_matrix(model, q, frames)
    else:
        frames, task, matrix = dynamics.frames, dynamics.J, dynamics.M
    generalized = generalized_wrench_torque(model, frames, wrenches)
    return task @ cho_solve(cho_factor(matrix), generalized)


def compensation_torque(
    model: ChainModel,
    state: JointState,
    motion: BaseMotionSample,
    wrenches: ArrayLike,
    dynamics: DynamicsQuantities | None = None,
) -> FloatArray:
    """
    Minimum-norm torque cancelling base-induced and responsive accelerations.

    ``tau_comp = -J^T Lambda (a_ee_base + a_resp)`` on the task rows of
    ``dynamics`` (``default_task_rows`` when computed here).

    Args:
        model: The arm.
        state: Joint state.
        motion: Base twist and acceleration.
        wrenches: ``(B, 6)`` link wrenches.
        dynamics: Precomputed dynamics for ``state``.

    Returns:
        The joint torque ``tau_comp``.

    """
    if dynamics is None:
        dynamics = compute_dynamics(model, state)
    rows = list(dynamics.rows)
    v_ee = dynamics.J[:3] @ state.qdot
    a_base = base_induced_accel(dynamics.frames.ee_position, v_ee, motion)
    a_resp = responsive_accel(model, state.q, wrenches, dynamics)
    task = dynamics.J[rows]
    return -task.T @ (dynamics.Lambda @ (a_base + a_resp)[rows])


def pose_error(current: Pose, desired: Pose) -> FloatArray:
    """
    Pose error ``[p_des - p; log(R_des R^-1)]``.

    The orientation part is the rotation vector of the quaternion difference.
    """
    orientation = desired.rotation() * current.rotation().inv()
    return np.concatenate(
        [desired.position - current.position, orientation.as_rotvec()]
    )


def task_torque(
    model: ChainModel,
    state: JointState,
    cmd: TaskCommand,
    gains: Gains,
    dynamics: DynamicsQuantities | None = None,
) -> FloatArray:
    """
    Operational-space tracking torque.

    ``J^T [Lambda (Kbar_p e + Kbar_d edot) + Q_op + G_op]`` on the task rows,
    plus gravity and joint damping projected into the task null space.

    Args:
        model: The arm.
        state: Joint state.
        cmd: Desired pose and twist.
        gains: Feedback gains.
        dynamics: Precomputed dynamics for ``state``.

    Returns:
        The joint torque ``tau_task``.

    """
    if dynamics is None:
        dynamics = compute_dynamics(model, state)
    rows = list(dynamics.rows)
    qdot = as_vector(state.qdot, model.n, "qdot")

    error = pose_error(dynamics.frames.ee_pose(), cmd.x_des)
    error_rate = np.asarray(cmd.xdot_des) - dynamics.J @ qdot
    feedback = np.asarray(gains.Kbar_p) * error + np.asarray(gains.Kbar_d) * error_rate

    task = dynamics.J[rows]
    force = dynamics.Lambda @ feedback[rows] + dynamics.Q_op + dynamics.G_op
    torque = task.T @ force

    # Dynamically consistent null space: N^T = I - J^T Lambda J M^-1.
    null_load = dynamics.gravity_torque - gains.k_null * qdot
    projected = task.T @ (dynamics.Lambda @ (task @ dynamics.solve(null_load)))
    return torque + null_load - projected


def pd_torque(gains: Gains, q_des: ArrayLike, state: JointState) -> FloatArray:
    """Joint PD torque ``Kp (q_des - q) - Kd qdot``; the velocity target is zero."""
    target = np.asarray(q_des, dtype=float)
    return gains.Kp * (target - state.q) - gains.Kd * state.qdot


def clip_torque(model: ChainModel, torque: FloatArray) -> tuple[FloatArray, bool]:
    """Clip to the per-joint torque limits and report whether clipping occurred."""
    limits = model.arrays.torque_limits
    clipped = np.clip(torque, -limits, limits)
    return clipped, bool(np.any(clipped != torque))


def ideal_controller(
    model: ChainModel,
    state: JointState,
    motion: BaseMotionSample,
    wrenches: ArrayLike,
    cmd: TaskCommand,
    gains: Gains,
    use_compensation: bool = True,
    use_task: bool = True,
    dynamics: DynamicsQuantities | None = None,
) -> TorqueCommand:
    """
    Analytic controller ``tau_comp + tau_task``, clipped to the torque limits.

    Args:
        model: The arm.
        state: Joint state.
        motion: Base twist and acceleration.
        wrenches: ``(B, 6)`` link wrenches.
        cmd: Desired pose and twist.
        gains: Feedback gains.
        use_compensation: Include ``tau_comp``; disable for the task-only ablation.
        use_task: Include ``tau_task``.
        dynamics: Precomputed dynamics for ``state``.

    Returns:
        The clipped total with its analytic parts.

    """
    if dynamics is None:
        dynamics = compute_dynamics(model, state)
    zeros = np.zeros(model.n)
    tau_comp = (
        compensation_torque(model, state, motion, wrenches, dynamics)
        if use_compensation
        else zeros
    )
    tau_task = task_torque(model, state, cmd, gains, dynamics) if use_task else zeros
    total, clipped = clip_torque(model, tau_comp + tau_task)
    return TorqueCommand(
        torque=total, tau_comp=tau_comp, tau_task=tau_task, clipped=clipped
    )


def analytic_torques(
    model: ChainModel,
    state: JointState,
    motion: BaseMotionSample,
    cmd: TaskCommand,
    gains: Gains,
    gravity: ArrayLike | None = None,
) -> TorqueCommand:
    """Both analytic laws for a state, wrenches derived from the base motion."""
    dynamics = compute_dynamics(model, state, gravity)
    wrenches = link_wrenches(model, state, motion, dynamics.frames)
    return ideal_controller(
        model, state, motion, wrenches, cmd, gains, dynamics=dynamics
    )


def ready_pose(model: ChainModel) -> FloatArray:
    """A bent, non-singular configuration inside the joint limits."""
    pattern = np.array([0.4, 0.9, -0.5, -1.1, 0.6, 0.8, -0.7])
    raw = np.resize(pattern, model.n)
    arrays = model.arrays
    margin = 0.1 * (arrays.upper_limits - arrays.lower_limits)
    return np.clip(raw, arrays.lower_limits + margin, arrays.upper_limits - margin)


def solve_ik(
    model: ChainModel,
    target: Pose,
    q0: ArrayLike,
    rows: tuple[int, ...],
    damping: float | None = None,
    iterations: int | None = None,
) -> FloatArray:
    """
    Damped least-squares inverse kinematics on the task rows.

    Args:
        model: The arm.
        target: Desired end-effector pose.
        q0: Initial guess.
        rows: Task rows to satisfy.
        damping: Damping factor; the configured default when omitted.
        iterations: Iteration cap; the configured default when omitted.

    Returns:
        Joint positions within the limits.

    """
    constants = get_constants()
    damping = constants.IK_DAMPING if damping is None else damping
    iterations = constants.IK_ITERATIONS if iterations is None else iterations
    arrays = model.arrays
    q = np.clip(as_vector(q0, model.n, "q0"), arrays.lower_limits, arrays.upper_limits)
    selected = list(rows)
    for _ in range(iterations):
        frames = forward_kinematics(model, q)
        error = pose_error(frames.ee_pose(), target)[selected]
        if np.linalg.norm(error) < 1e-10:
            break
        task = jacobian(model, q, END_EFFECTOR, frames)[selected]
        step = task.T @ np.linalg.solve(
            task @ task.T + damping**2 * np.eye(len(selected)), error
        )
        q = np.clip(q + step, arrays.lower_limits, arrays.upper_limits)
    return q
