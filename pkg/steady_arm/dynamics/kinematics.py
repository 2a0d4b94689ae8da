"""
Forward kinematics, body Jacobians and velocity-product terms.

All spatial quantities are expressed in the fixed base frame. Twists and
Jacobian rows stack linear parts on top of angular parts: ``[v; omega]``.
"""

from dataclasses import dataclass
from typing import Literal

import numpy as np
from numpy.typing import ArrayLike
from scipy.spatial.transform import Rotation

from steady_arm.chain.models import ChainModel
from steady_arm.utils import FloatArray, as_vector

END_EFFECTOR: Literal["ee"] = "ee"
Body = int | Literal["ee"]

_ZERO3 = np.zeros(3)


@dataclass(frozen=True)
class JointState:
    """Joint positions and velocities."""

    q: FloatArray
    qdot: FloatArray

    @classmethod
    def at_rest(cls, q: ArrayLike) -> "JointState":
        """State with the given positions and zero velocity."""
        positions = np.asarray(q, dtype=float).copy()
        return cls(q=positions, qdot=np.zeros_like(positions))


@dataclass(frozen=True)
class Pose:
    """Position and ``(w, x, y, z)`` orientation of a frame."""

    position: FloatArray
    orientation: FloatArray

    @classmethod
    def from_matrix(cls, position: ArrayLike, rotation: FloatArray) -> "Pose":
        """Build a pose from a rotation matrix."""
        quaternion = Rotation.from_matrix(rotation).as_quat(scalar_first=True)
        return cls(
            position=np.asarray(position, dtype=float).copy(),
            orientation=quaternion / np.linalg.norm(quaternion),
        )

    def rotation(self) -> Rotation:
        """Orientation as a scipy rotation."""
        return Rotation.from_quat(self.orientation, scalar_first=True)


@dataclass(frozen=True)
class RootMotion:
    """Motion of the frame the chain is mounted on, at its origin."""

    position: FloatArray = _ZERO3
    angular_velocity: FloatArray = _ZERO3
    angular_acceleration: FloatArray = _ZERO3
    linear_velocity: FloatArray = _ZERO3
    linear_acceleration: FloatArray = _ZERO3


@dataclass(frozen=True)
class ChainFrames:
    """
    Placement of every joint and link for one configuration.

    Index ``i`` refers to joint ``i`` and the link it drives. ``origins[i]``
    is the joint origin, ``rotations[i]`` the orientation of link ``i``
    (joint rotation included) and ``axes[i]`` the joint axis, all in the
    frame the chain is expressed in.
    """

    origins: FloatArray
    rotations: FloatArray
    axes: FloatArray
    coms: FloatArray
    ee_position: FloatArray
    ee_rotation: FloatArray

    @property
    def n(self) -> int:
        """Number of joints."""
        return self.origins.shape[0]

    @property
    def r_ee_loc(self) -> FloatArray:
        """End-effector displacement from the base origin."""
        return self.ee_position

    def link_poses(self) -> list[Pose]:
        """Poses of the link frames."""
        return [
            Pose.from_matrix(origin, rotation)
            for origin, rotation in zip(self.origins, self.rotations, strict=True)
        ]

    def ee_pose(self) -> Pose:
        """Pose of the end-effector frame."""
        return Pose.from_matrix(self.ee_position, self.ee_rotation)

    def body_point(self, body: Body) -> tuple[int, FloatArray]:
        """
        Resolve a body selector to its link index and reference point.

        Raises:
            ValueError: For an index outside ``[0, n)`` or an unknown selector.

        """
        if isinstance(body, str):
            if body != END_EFFECTOR:
                raise ValueError(f"unknown body selector '{body}'")
            return self.n - 1, self.ee_position
        if isinstance(body, bool) or not 0 <= int(body) < self.n:
            raise ValueError(f"body index {body} outside [0, {self.n})")
        return int(body), self.coms[int(body)]

    def transformed(
        self, rotation: FloatArray, translation: ArrayLike
    ) -> "ChainFrames":
        """Re-express the frames after a rigid motion of the whole chain."""
        offset = np.asarray(translation, dtype=float)
        return ChainFrames(
            origins=self.origins @ rotation.T + offset,
            rotations=np.einsum("ab,ibc->iac", rotation, self.rotations),
            axes=self.axes @ rotation.T,
            coms=self.coms @ rotation.T + offset,
            ee_position=rotation @ self.ee_position + offset,
            ee_rotation=rotation @ self.ee_rotation,
        )


@dataclass(frozen=True)
class LinkMotion:
    """Angular and joint-origin velocities and accelerations of every link."""

    angular_velocity: FloatArray
    angular_acceleration: FloatArray
    origin_velocity: FloatArray
    origin_acceleration: FloatArray

    def point_velocity(
        self, index: int, frames: ChainFrames, point: FloatArray
    ) -> FloatArray:
        """Linear velocity of a point fixed to link ``index``."""
        arm = point - frames.origins[index]
        return self.origin_velocity[index] + np.cross(self.angular_velocity[index], arm)

    def point_acceleration(
        self, index: int, frames: ChainFrames, point: FloatArray
    ) -> FloatArray:
        """Linear acceleration of a point fixed to link ``index``."""
        arm = point - frames.origins[index]
        omega = self.angular_velocity[index]
        return (
            self.origin_acceleration[index]
            + np.cross(self.angular_acceleration[index], arm)
            + np.cross(omega, np.cross(omega, arm))
        )


def axis_rotation(axis: FloatArray, angle: float) -> FloatArray:
    """Rotation matrix about a unit axis (Rodrigues)."""
    x, y, z = axis
    skew = np.array([[0.0, -z, y], [z, 0.0, -x], [-y, x, 0.0]])
    return np.eye(3) + np.sin(angle) * skew + (1.0 - np.cos(angle)) * (skew @ skew)


def forward_kinematics(model: ChainModel, q: ArrayLike) -> ChainFrames:
    """
    Place every joint, link and the end effector in the base frame.

    Joint ``i``'s frame is its parent's frame composed with the origin
    translation, the origin rotation and finally the rotation ``q[i]`` about
    the joint axis.

    Args:
        model: The arm.
        q: Joint positions, length ``n``.

    Returns:
        The chain frames; ``ee_pose()`` and ``link_poses()`` give poses and
        ``r_ee_loc`` the end-effector displacement.

    Raises:
        ValueError: If ``q`` has the wrong length.

    """
    arrays = model.arrays
    positions = as_vector(q, model.n, "q")

    origins = np.empty((model.n, 3))
    rotations = np.empty((model.n, 3, 3))
    axes = np.empty((model.n, 3))
    coms = np.empty((model.n, 3))

    parent_rotation = np.eye(3)
    parent_origin = np.zeros(3)
    for i in range(model.n):
        origin = parent_origin + parent_rotation @ arrays.origin_translations[i]
        joint_frame = parent_rotation @ arrays.origin_rotations[i]
        rotation = joint_frame @ axis_rotation(arrays.axes[i], positions[i])
        origins[i] = origin
        rotations[i] = rotation
        axes[i] = joint_frame @ arrays.axes[i]
        coms[i] = origin + rotation @ arrays.coms[i]
        parent_rotation, parent_origin = rotation, origin

    return ChainFrames(
        origins=origins,
        rotations=rotations,
        axes=axes,
        coms=coms,
        ee_position=parent_origin + parent_rotation @ arrays.ee_translation,
        ee_rotation=parent_rotation @ arrays.ee_rotation,
    )


def jacobian(
    model: ChainModel,
    q: ArrayLike,
    body: Body = END_EFFECTOR,
    frames: ChainFrames | None = None,
) -> FloatArray:
    """
    Geometric Jacobian of a body.

    Link bodies are taken at their COM; the end effector at its frame
    origin. Column ``j`` is ``[z_j x (P - p_j); z_j]`` for joints up to the
    body's link and zero beyond it.

    Args:
        model: The arm.
        q: Joint positions.
        body: Link index or ``END_EFFECTOR``.
        frames: Precomputed ``forward_kinematics(model, q)``.

    Returns:
        A ``6 x n`` matrix.

    Raises:
        ValueError: For a bad body selector or ``q`` length.

    """
    if frames is None:
        frames = forward_kinematics(model, q)
    index, point = frames.body_point(body)
    columns = np.zeros((6, model.n))
    reach = slice(0, index + 1)
    columns[:3, reach] = np.cross(frames.axes[reach], point - frames.origins[reach]).T
    columns[3:, reach] = frames.axes[reach].T
    return columns


def link_jacobians(model: ChainModel, frames: ChainFrames) -> FloatArray:
    """COM Jacobians of every link stacked as ``(n, 6, n)``."""
    return np.stack([jacobian(model, None, i, frames) for i in range(model.n)])


def propagate_motion(
    frames: ChainFrames,
    qdot: FloatArray,
    qddot: FloatArray,
    root: RootMotion | None = None,
) -> LinkMotion:
    """
    Forward recursion of link velocities and accelerations.

    Args:
        frames: Chain placement, in the same frame as ``root``.
        qdot: Joint velocities.
        qddot: Joint accelerations.
        root: Motion of the mounting frame; static when omitted.

    Returns:
        Per-link angular and joint-origin motion.

    """
    root = root or RootMotion()
    n = frames.n
    omega = np.empty((n, 3))
    alpha = np.empty((n, 3))
    velocity = np.empty((n, 3))
    acceleration = np.empty((n, 3))

    parent_omega = root.angular_velocity
    parent_alpha = root.angular_acceleration
    parent_velocity = root.linear_velocity
    parent_acceleration = root.linear_acceleration
    parent_origin = root.position
    for i in range(n):
        arm = frames.origins[i] - parent_origin
        velocity[i] = parent_velocity + np.cross(parent_omega, arm)
        acceleration[i] = (
            parent_acceleration
            + np.cross(parent_alpha, arm)
            + np.cross(parent_omega, np.cross(parent_omega, arm))
        )
        spin = frames.axes[i] * qdot[i]
        omega[i] = parent_omega + spin
        alpha[i] = (
            parent_alpha + np.cross(parent_omega, spin) + frames.axes[i] * qddot[i]
        )
        parent_omega, parent_alpha = omega[i], alpha[i]
        parent_velocity, parent_acceleration = velocity[i], acceleration[i]
        parent_origin = frames.origins[i]

    return LinkMotion(
        angular_velocity=omega,
        angular_acceleration=alpha,
        origin_velocity=velocity,
        origin_acceleration=acceleration,
    )


def jacobian_dot_qdot(
    model: ChainModel,
    state: JointState,
    body: Body = END_EFFECTOR,
    frames: ChainFrames | None = None,
) -> FloatArray:
    """
    Velocity-product acceleration ``Jdot(q) qdot`` of a body.

    This is the body's spatial acceleration when ``qddot = 0``.

    Raises:
        ValueError: For a bad body selector.

    """
    if frames is None:
        frames = forward_kinematics(model, state.q)
    index, point = frames.body_point(body)
    qdot = as_vector(state.qdot, model.n, "qdot")
    motion = propagate_motion(frames, qdot, np.zeros(model.n))
    return np.concatenate(
        [
            motion.point_acceleration(index, frames, point),
            motion.angular_acceleration[index],
        ]
    )


def body_twist(
    model: ChainModel,
    state: JointState,
    body: Body = END_EFFECTOR,
    frames: ChainFrames | None = None,
) -> FloatArray:
    """Twist ``J(q) qdot`` of a body."""
    qdot = as_vector(state.qdot, model.n, "qdot")
    return jacobian(model, state.q, body, frames) @ qdot
