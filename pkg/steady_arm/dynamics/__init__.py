"""Kinematics and rigid-body dynamics of fixed-base serial arms."""

from steady_arm.dynamics.kinematics import (
    END_EFFECTOR,
    Body,
    ChainFrames,
    JointState,
    Pose,
    RootMotion,
    body_twist,
    forward_kinematics,
    jacobian,
    jacobian_dot_qdot,
)
from steady_arm.dynamics.rigid_body import (
    DynamicsQuantities,
    bias_forces,
    compute_dynamics,
    forward_dynamics,
    gravity_torque,
    inverse_dynamics,
    kinetic_energy,
    mass_matrix,
    mechanical_energy,
    operational_space_inertia,
)

__all__ = [
    "END_EFFECTOR",
    "Body",
    "ChainFrames",
    "DynamicsQuantities",
    "JointState",
    "Pose",
    "RootMotion",
    "bias_forces",
    "body_twist",
    "compute_dynamics",
    "forward_dynamics",
    "forward_kinematics",
    "gravity_torque",
    "inverse_dynamics",
    "jacobian",
    "jacobian_dot_qdot",
    "kinetic_energy",
    "mass_matrix",
    "mechanical_energy",
    "operational_space_inertia",
]
