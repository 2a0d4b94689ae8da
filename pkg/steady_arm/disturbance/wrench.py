"""
Inertial wrenches that emulate base motion on a fixed-base model.

A link of mass ``m`` and inertia ``I`` whose COM sits at ``r`` with velocity
``v`` relative to a base moving with twist ``V_b`` and acceleration ``A_b``
feels, in the base frame, the linear, Euler, centrifugal and Coriolis forces
and the matching rotating-frame torques.
"""

import numpy as np
from numpy.typing import ArrayLike

from steady_arm.chain.models import ChainModel
from steady_arm.disturbance.models import BaseMotionSample, Wrench
from steady_arm.dynamics.kinematics import (
    ChainFrames,
    JointState,
    forward_kinematics,
    propagate_motion,
)
from steady_arm.dynamics.rigid_body import world_inertias
from steady_arm.utils import FloatArray, as_vector


def fictitious_wrench(
    mass: float,
    inertia: FloatArray,
    r: ArrayLike,
    v: ArrayLike,
    motion: BaseMotionSample,
    w: ArrayLike | None = None,
) -> Wrench:
    """
    Inertial wrench on one link, applied at its COM.

    ``F = -m (vdot_b + omegadot_b x r + omega_b x (omega_b x r) + 2 omega_b x v)``
    and ``T = -I omegadot_b - omega_b x (I omega_b)``, plus the coupling terms
    ``-I (omega_b x w) - omega_b x (I w) - w x (I omega_b)`` for a link spinning
    at ``w`` relative to the base.

    Args:
        mass: Link mass.
        inertia: Inertia about the COM, in base coordinates.
        r: COM position relative to the base origin.
        v: COM velocity relative to the base.
        motion: Base twist and acceleration.
        w: Link angular velocity relative to the base; zero when omitted.

    Returns:
        The wrench.

    """
    position = as_vector(r, 3, "r")
    velocity = as_vector(v, 3, "v")
    omega = motion.omega_b
    alpha = motion.omegadot_b

    force = -mass * (
        motion.vdot_b
        + np.cross(alpha, position)
        + np.cross(omega, np.cross(omega, position))
        + 2.0 * np.cross(omega, velocity)
    )
    spin_momentum = inertia @ omega
    torque = -inertia @ alpha - np.cross(omega, spin_momentum)
    if w is not None:
        relative = as_vector(w, 3, "w")
        torque = (
            torque
            - inertia @ np.cross(omega, relative)
            - np.cross(omega, inertia @ relative)
            - np.cross(relative, spin_momentum)
        )
    return Wrench(force=force, torque=torque)


def link_wrenches(
    model: ChainModel,
    state: JointState,
    motion: BaseMotionSample,
    frames: ChainFrames | None = None,
) -> FloatArray:
    """
    Fictitious wrenches of every link for the current arm state.

    Returns:
        An ``(n, 6)`` array of ``[force; torque]`` at the link COMs.

    """
    if frames is None:
        frames = forward_kinematics(model, state.q)
    qdot = as_vector(state.qdot, model.n, "qdot")
    link_motion = propagate_motion(frames, qdot, np.zeros(model.n))
    inertias = world_inertias(model, frames)
    stacked = np.empty((model.n, 6))
    for i in range(model.n):
        wrench = fictitious_wrench(
            float(model.arrays.masses[i]),
            inertias[i],
            frames.coms[i],
            link_motion.point_velocity(i, frames, frames.coms[i]),
            motion,
            link_motion.angular_velocity[i],
        )
        stacked[i] = wrench.as_array()
    return stacked
