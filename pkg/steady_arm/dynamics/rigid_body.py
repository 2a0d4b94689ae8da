"""
Joint-space and operational-space dynamics.

Inverse dynamics uses the recursive Newton-Euler algorithm, the mass matrix
the composite-rigid-body algorithm. External wrenches are given per link as
an ``(n, 6)`` array of ``[force; torque]`` acting at the link COM, in the
frame the chain is expressed in.
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import cho_factor, cho_solve

from steady_arm.chain.models import ChainModel
from steady_arm.constants import get_constants
from steady_arm.dynamics.kinematics import (
    END_EFFECTOR,
    Body,
    ChainFrames,
    JointState,
    RootMotion,
    forward_kinematics,
    jacobian,
    jacobian_dot_qdot,
    link_jacobians,
    propagate_motion,
)
from steady_arm.utils import FloatArray, as_vector

logger = logging.getLogger(__name__)

ALL_ROWS: tuple[int, ...] = (0, 1, 2, 3, 4, 5)
LINEAR_ROWS: tuple[int, ...] = (0, 1, 2)


@dataclass(frozen=True)
class DynamicsQuantities:
    """
    Dynamics of one state, evaluated together.

    ``Lambda``, ``Q_op`` and ``G_op`` are restricted to ``rows`` of the
    end-effector task; ``J`` and ``Jdot_qdot`` are the full six-row values.
    """

    M: FloatArray
    bias: FloatArray
    gravity_torque: FloatArray
    J: FloatArray
    Jdot_qdot: FloatArray
    Lambda: FloatArray
    Q_op: FloatArray
    G_op: FloatArray
    rows: tuple[int, ...]
    frames: ChainFrames

    def solve(self, rhs: FloatArray) -> FloatArray:
        """Return ``M^-1 rhs``."""
        return cho_solve(cho_factor(self.M), rhs)


def default_task_rows(model: ChainModel) -> tuple[int, ...]:
    """Full pose for arms with six or more joints, position otherwise."""
    return ALL_ROWS if model.n >= 6 else LINEAR_ROWS


def resolve_gravity(gravity: ArrayLike | None) -> FloatArray:
    """Gravity vector, defaulting to the configured constant."""
    if gravity is None:
        return np.array(get_constants().GRAVITY, dtype=float)
    return as_vector(gravity, 3, "gravity")


def world_inertias(model: ChainModel, frames: ChainFrames) -> FloatArray:
    """Link inertias about their COMs, rotated into the frames' coordinates."""
    return np.einsum(
        "iab,ibc,idc->iad", frames.rotations, model.arrays.inertias, frames.rotations
    )


def recursive_newton_euler(
    model: ChainModel,
    frames: ChainFrames,
    qdot: FloatArray,
    qddot: FloatArray,
    root: RootMotion,
    wrenches: FloatArray | None = None,
    include_damping: bool = True,
) -> FloatArray:
    """
    Joint torques realizing ``qddot`` for a chain whose mount moves as ``root``.

    Gravity enters through ``root.linear_acceleration`` (set it to ``-g`` for
    a static mount).

    Args:
        model: The arm.
        frames: Chain placement, in the same frame as ``root``.
        qdot: Joint velocities.
        qddot: Joint accelerations.
        root: Mount motion.
        wrenches: ``(n, 6)`` external wrenches at link COMs.
        include_damping: Add the joint viscous damping torque.

    Returns:
        Joint torques.

    """
    arrays = model.arrays
    motion = propagate_motion(frames, qdot, qddot, root)
    inertias = world_inertias(model, frames)

    forces = np.empty((model.n, 3))
    moments = np.empty((model.n, 3))
    for i in range(model.n):
        com = frames.coms[i]
        com_acceleration = motion.point_acceleration(i, frames, com)
        omega = motion.angular_velocity[i]
        forces[i] = arrays.masses[i] * com_acceleration
        moments[i] = inertias[i] @ motion.angular_acceleration[i] + np.cross(
            omega, inertias[i] @ omega
        )
    if wrenches is not None:
        forces -= wrenches[:, :3]
        moments -= wrenches[:, 3:]

    torque = np.empty(model.n)
    child_force = np.zeros(3)
    child_moment = np.zeros(3)
    child_origin = frames.origins[-1]
    for i in reversed(range(model.n)):
        origin = frames.origins[i]
        joint_force = forces[i] + child_force
        joint_moment = (
            moments[i]
            + np.cross(frames.coms[i] - origin, forces[i])
            + child_moment
            + np.cross(child_origin - origin, child_force)
        )
        torque[i] = frames.axes[i] @ joint_moment
        child_force, child_moment, child_origin = joint_force, joint_moment, origin

    if include_damping:
        torque += arrays.damping * qdot
    return torque


def _wrench_array(model: ChainModel, wrenches: ArrayLike | None) -> FloatArray | None:
    if wrenches is None:
        return None
    stacked = np.asarray(wrenches, dtype=float)
    if stacked.shape != (model.B, 6):
        raise ValueError(
            f"wrenches must have shape ({model.B}, 6), got {stacked.shape}"
        )
    return stacked


def inverse_dynamics(
    model: ChainModel,
    q: ArrayLike,
    qdot: ArrayLike,
    qddot: ArrayLike,
    wrenches: ArrayLike | None = None,
    gravity: ArrayLike | None = None,
) -> FloatArray:
    """
    Torque that realizes ``qddot`` under gravity and external link wrenches.

    Args:
        model: The arm.
        q: Joint positions.
        qdot: Joint velocities.
        qddot: Joint accelerations.
        wrenches: ``(n, 6)`` external ``[force; torque]`` at link COMs.
        gravity: Gravity vector; the configured default when omitted.

    Returns:
        Joint torques, damping included.

    Raises:
        ValueError: On dimension mismatch.

    """
    frames = forward_kinematics(model, q)
    root = RootMotion(linear_acceleration=-resolve_gravity(gravity))
    return recursive_newton_euler(
        model,
        frames,
        as_vector(qdot, model.n, "qdot"),
        as_vector(qddot, model.n, "qddot"),
        root,
        _wrench_array(model, wrenches),
    )


def bias_forces(
    model: ChainModel,
    state: JointState,
    gravity: ArrayLike | None = None,
    frames: ChainFrames | None = None,
) -> FloatArray:
    """Coriolis, centrifugal, damping and gravity torques (``qddot = 0``)."""
    if frames is None:
        frames = forward_kinematics(model, state.q)
    root = RootMotion(linear_acceleration=-resolve_gravity(gravity))
    qdot = as_vector(state.qdot, model.n, "qdot")
    return recursive_newton_euler(model, frames, qdot, np.zeros(model.n), root)


def gravity_torque(
    model: ChainModel,
    q: ArrayLike,
    gravity: ArrayLike | None = None,
    frames: ChainFrames | None = None,
) -> FloatArray:
    """Torque that holds the arm static against gravity."""
    if frames is None:
        frames = forward_kinematics(model, q)
    root = RootMotion(linear_acceleration=-resolve_gravity(gravity))
    zeros = np.zeros(model.n)
    return recursive_newton_euler(model, frames, zeros, zeros, root)


def mass_matrix(
    model: ChainModel, q: ArrayLike, frames: ChainFrames | None = None
) -> FloatArray:
    """
    Joint-space inertia matrix by the composite-rigid-body algorithm.

    Args:
        model: The arm.
        q: Joint positions.
        frames: Precomputed ``forward_kinematics(model, q)``.

    Returns:
        The symmetric positive definite ``n x n`` matrix.

    """
    if frames is None:
        frames = forward_kinematics(model, q)
    arrays = model.arrays
    inertias = world_inertias(model, frames)
    n = model.n
    matrix = np.zeros((n, n))

    composite_mass = 0.0
    composite_com = np.zeros(3)
    composite_inertia = np.zeros((3, 3))
    for j in reversed(range(n)):
        mass = arrays.masses[j]
        com = frames.coms[j]
        total = composite_mass + mass
        merged_com = (composite_mass * composite_com + mass * com) / total
        shift = composite_com - merged_com
        composite_inertia = _shift_inertia(
            composite_inertia, composite_mass, shift
        ) + _shift_inertia(inertias[j], mass, com - merged_com)
        composite_mass, composite_com = total, merged_com

        axis = frames.axes[j]
        force = composite_mass * np.cross(axis, composite_com - frames.origins[j])
        moment = composite_inertia @ axis
        for i in range(j + 1):
            lever = composite_com - frames.origins[i]
            matrix[i, j] = frames.axes[i] @ (moment + np.cross(lever, force))
            matrix[j, i] = matrix[i, j]
    return matrix


def _shift_inertia(inertia: FloatArray, mass: float, offset: FloatArray) -> FloatArray:
    # Parallel-axis theorem.
    return inertia + mass * (offset @ offset * np.eye(3) - np.outer(offset, offset))


def forward_dynamics(
    model: ChainModel,
    state: JointState,
    torque: ArrayLike,
    wrenches: ArrayLike | None = None,
    gravity: ArrayLike | None = None,
    frames: ChainFrames | None = None,
) -> FloatArray:
    """
    Joint accelerations ``M^-1 (tau - bias + sum_i J_i^T w_i)``.

    Args:
        model: The arm.
        state: Current joint state.
        torque: Applied joint torques.
        wrenches: ``(n, 6)`` external wrenches at link COMs.
        gravity: Gravity vector; the configured default when omitted.
        frames: Precomputed ``forward_kinematics(model, state.q)``.

    Returns:
        Joint accelerations.

    """
    if frames is None:
        frames = forward_kinematics(model, state.q)
    qdot = as_vector(state.qdot, model.n, "qdot")
    applied = as_vector(torque, model.n, "torque")
    root = RootMotion(linear_acceleration=-resolve_gravity(gravity))
    # Inverse dynamics at qddot = 0 carries bias minus the wrench torques.
    residual = recursive_newton_euler(
        model, frames, qdot, np.zeros(model.n), root, _wrench_array(model, wrenches)
    )
    matrix = mass_matrix(model, state.q, frames)
    factor = cho_factor(matrix, check_finite=False)
    return cho_solve(factor, applied - residual, check_finite=False)


def generalized_wrench_torque(
    model: ChainModel, frames: ChainFrames, wrenches: ArrayLike
) -> FloatArray:
    """Joint torque ``sum_i J_i^T w_i`` equivalent to the link wrenches."""
    stacked = _wrench_array(model, wrenches)
    assert stacked is not None
    jacobians = link_jacobians(model, frames)
    return np.einsum("irc,ir->c", jacobians, stacked)


def operational_space_inertia(
    model: ChainModel,
    q: ArrayLike,
    body: Body = END_EFFECTOR,
    rows: tuple[int, ...] = ALL_ROWS,
) -> FloatArray:
    """
    Regularized operational-space inertia ``(J M^-1 J^T + reg I)^-1``.

    Args:
        model: The arm.
        q: Joint positions.
        body: Task body.
        rows: Task rows of the Jacobian to keep.

    Returns:
        A symmetric ``len(rows) x len(rows)`` matrix, finite at singularities.

    """
    frames = forward_kinematics(model, q)
    task = jacobian(model, q, body, frames)[list(rows)]
    factor = cho_factor(mass_matrix(model, q, frames))
    return _lambda(task, factor)


def _lambda(task: FloatArray, factor: tuple[FloatArray, bool]) -> FloatArray:
    mobility = task @ cho_solve(factor, task.T)
    regularized = mobility + get_constants().LAMBDA_REG * np.eye(task.shape[0])
    inverse = np.linalg.inv(regularized)
    return 0.5 * (inverse + inverse.T)


def compute_dynamics(
    model: ChainModel,
    state: JointState,
    gravity: ArrayLike | None = None,
    rows: tuple[int, ...] | None = None,
) -> DynamicsQuantities:
    """
    Evaluate every dynamics quantity the controllers need for one state.

    ``Q_op = Lambda (J M^-1 b - Jdot qdot)`` with ``b`` the velocity-dependent
    bias (Coriolis, centrifugal and damping) and ``G_op = Lambda J M^-1 g``.

    Args:
        model: The arm.
        state: Joint state.
        gravity: Gravity vector; the configured default when omitted.
        rows: End-effector task rows; ``default_task_rows`` when omitted.

    Returns:
        The evaluated quantities.

    """
    rows = default_task_rows(model) if rows is None else rows
    frames = forward_kinematics(model, state.q)
    qdot = as_vector(state.qdot, model.n, "qdot")
    zeros = np.zeros(model.n)

    matrix = mass_matrix(model, state.q, frames)
    factor = cho_factor(matrix)
    velocity_bias = recursive_newton_euler(model, frames, qdot, zeros, RootMotion())
    gravity_root = RootMotion(linear_acceleration=-resolve_gravity(gravity))
    held = recursive_newton_euler(model, frames, zeros, zeros, gravity_root)

    full_jacobian = jacobian(model, state.q, END_EFFECTOR, frames)
    jdot_qdot = jacobian_dot_qdot(model, state, END_EFFECTOR, frames)
    task = full_jacobian[list(rows)]
    inertia = _lambda(task, factor)
    q_op = inertia @ (task @ cho_solve(factor, velocity_bias) - jdot_qdot[list(rows)])
    g_op = inertia @ (task @ cho_solve(factor, held))

    return DynamicsQuantities(
        M=matrix,
        bias=velocity_bias + held,
        gravity_torque=held,
        J=full_jacobian,
        Jdot_qdot=jdot_qdot,
        Lambda=inertia,
        Q_op=q_op,
        G_op=g_op,
        rows=rows,
        frames=frames,
    )


def kinetic_energy(model: ChainModel, state: JointState) -> float:
    """Sum of link kinetic energies from link velocities."""
    frames = forward_kinematics(model, state.q)
    qdot = as_vector(state.qdot, model.n, "qdot")
    motion = propagate_motion(frames, qdot, np.zeros(model.n))
    inertias = world_inertias(model, frames)
    energy = 0.0
    for i in range(model.n):
        velocity = motion.point_velocity(i, frames, frames.coms[i])
        omega = motion.angular_velocity[i]
        energy += 0.5 * model.arrays.masses[i] * velocity @ velocity
        energy += 0.5 * omega @ inertias[i] @ omega
    return float(energy)


def mechanical_energy(
    model: ChainModel, state: JointState, gravity: ArrayLike | None = None
) -> float:
    """Kinetic plus gravitational potential energy."""
    frames = forward_kinematics(model, state.q)
    g = resolve_gravity(gravity)
    potential = -float(np.sum(model.arrays.masses * (frames.coms @ g)))
    return kinetic_energy(model, state) + potential
