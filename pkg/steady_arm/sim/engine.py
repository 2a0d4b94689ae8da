"""
Fixed-base time stepping and rollouts.

A rollout runs three nested rates: the physics step (wrenches and
integration), the PD tick (a new torque is requested and then held) and the
control tick (the controller re-plans its targets).
"""

import logging
from dataclasses import dataclass
from typing import Protocol

import numpy as np
from numpy.typing import ArrayLike
from scipy.linalg import cho_factor, cho_solve

from steady_arm.chain.models import ChainModel
from steady_arm.control.controllers import Controller, SensorFrame
from steady_arm.control.laws import base_induced_accel, ready_pose
from steady_arm.control.models import TaskCommand
from steady_arm.disturbance.models import (
    BaseMotionSample,
    BaseMotionSeries,
    DisturbanceProfile,
)
from steady_arm.disturbance.profile import integrate_twist, make_rng
from steady_arm.disturbance.wrench import link_wrenches
from steady_arm.dynamics.kinematics import (
    ChainFrames,
    JointState,
    RootMotion,
    forward_kinematics,
    jacobian,
    jacobian_dot_qdot,
    propagate_motion,
)
from steady_arm.dynamics.rigid_body import (
    forward_dynamics,
    mass_matrix,
    recursive_newton_euler,
)
from steady_arm.errors import RolloutAbortedError
from steady_arm.sim.models import RolloutLog, RolloutRecord, SimConfig
from steady_arm.sim.trajectory import BaseTrajectory
from steady_arm.utils import FloatArray, as_vector

logger = logging.getLogger(__name__)


class MotionSource(Protocol):
    """Base motion sampled on the physics grid."""

    def series(self, t_grid: FloatArray) -> BaseMotionSeries:
        """Base twist and acceleration at every grid time."""
        ...


@dataclass(frozen=True)
class ProfileMotion:
    """Base motion integrated from a disturbance profile."""

    profile: DisturbanceProfile

    def series(self, t_grid: FloatArray) -> BaseMotionSeries:
        """Trapezoidal twist integration of the profile acceleration."""
        return integrate_twist(self.profile, t_grid)


@dataclass(frozen=True)
class TrajectoryMotion:
    """Base motion of an analytic world trajectory, in base coordinates."""

    trajectory: BaseTrajectory

    def series(self, t_grid: FloatArray) -> BaseMotionSeries:
        """Exact twist and acceleration at every grid time."""
        samples = [self.trajectory.at(float(t)).body_motion() for t in t_grid]
        return BaseMotionSeries(
            t=t_grid,
            V_b=np.array([sample.V_b for sample in samples]).reshape(-1, 6),
            A_b=np.array([sample.A_b for sample in samples]).reshape(-1, 6),
        )


def as_motion_source(source: DisturbanceProfile | MotionSource) -> MotionSource:
    """Wrap a profile; pass motion sources through."""
    if isinstance(source, DisturbanceProfile):
        return ProfileMotion(source)
    return source


@dataclass(frozen=True)
class PlantSample:
    """Dynamics of the plant at one physics step."""

    qddot: FloatArray
    a_ee_loc: FloatArray
    a_ee_base: FloatArray
    a_ee_glob: FloatArray


class Plant(Protocol):
    """Dynamics integrated by ``simulate``."""

    def evaluate(
        self,
        t: float,
        state: JointState,
        frames: ChainFrames,
        torque: FloatArray,
        motion: BaseMotionSample,
    ) -> PlantSample:
        """Joint and end-effector accelerations under ``torque``."""
        ...


def advance(
    model: ChainModel, state: JointState, qddot: FloatArray, dt: float, t: float = 0.0
) -> JointState:
    """
    Semi-implicit Euler update with joint-limit clamping.

    Joints pushed past a limit are clamped to it and their velocity zeroed.

    Raises:
        RolloutAbortedError: If ``qddot`` is not finite.

    """
    if not np.all(np.isfinite(qddot)):
        raise RolloutAbortedError(t, f"non-finite joint acceleration {qddot}")
    qdot = state.qdot + dt * qddot
    q = state.q + dt * qdot
    arrays = model.arrays
    outside = (q < arrays.lower_limits) | (q > arrays.upper_limits)
    if np.any(outside):
        q = np.clip(q, arrays.lower_limits, arrays.upper_limits)
        qdot = np.where(outside, 0.0, qdot)
    return JointState(q=q, qdot=qdot)


def step(
    model: ChainModel,
    state: JointState,
    torque: ArrayLike,
    wrenches: ArrayLike | None,
    dt: float,
    gravity: ArrayLike | None = None,
    t: float = 0.0,
) -> JointState:
    """
    Advance the fixed-base arm by one physics step.

    ``qdot+ = qdot + dt qddot`` then ``q+ = q + dt qdot+``.

    Args:
        model: The arm.
        state: Current state.
        torque: Applied joint torques.
        wrenches: ``(B, 6)`` link wrenches, or ``None``.
        dt: Step size (s), positive.
        gravity: Gravity vector; the configured default when omitted.
        t: Current time, for diagnostics.

    Returns:
        The next state.

    Raises:
        ValueError: For a non-positive ``dt``.
        RolloutAbortedError: If the dynamics are not finite.

    """
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt}")
    qddot = forward_dynamics(model, state, torque, wrenches, gravity)
    return advance(model, state, qddot, dt, t)


def _local_accel(
    model: ChainModel, frames: ChainFrames, state: JointState, qddot: FloatArray
) -> FloatArray:
    task = jacobian(model, state.q, frames=frames)
    return task @ qddot + jacobian_dot_qdot(model, state, frames=frames)


def _base_accel(
    model: ChainModel, frames: ChainFrames, state: JointState, motion: BaseMotionSample
) -> FloatArray:
    task = jacobian(model, state.q, frames=frames)
    return base_induced_accel(frames.ee_position, task[:3] @ state.qdot, motion)


class FixedBasePlant:
    """Fixed-base arm driven by fictitious wrenches."""

    def __init__(self, model: ChainModel, config: SimConfig, emulate_base: bool = True):
        """
        Initialize the plant.

        Args:
            model: The arm.
            config: Simulation settings.
            emulate_base: Apply the fictitious wrenches of the base motion.

        """
        self.model = model
        self.gravity = np.asarray(config.gravity, dtype=float)
        self.friction = config.joint_friction
        self.emulate_base = emulate_base

    def evaluate(
        self,
        t: float,
        state: JointState,
        frames: ChainFrames,
        torque: FloatArray,
        motion: BaseMotionSample,
    ) -> PlantSample:
        """Joint accelerations and end-effector accelerations."""
        wrenches = None
        if self.emulate_base:
            wrenches = link_wrenches(self.model, state, motion, frames)
        applied = torque - self.friction * state.qdot
        qddot = forward_dynamics(
            self.model, state, applied, wrenches, self.gravity, frames=frames
        )
        a_loc = _local_accel(self.model, frames, state, qddot)
        a_base = _base_accel(self.model, frames, state, motion)
        return PlantSample(
            qddot=qddot, a_ee_loc=a_loc, a_ee_base=a_base, a_ee_glob=a_base + a_loc
        )


class FloatingBasePlant:
    """
    Arm on a kinematically prescribed moving base, simulated in the world frame.

    The base follows its trajectory regardless of the arm. Dynamics use the
    moving mount directly; no fictitious wrenches are involved.
    """

    def __init__(
        self, model: ChainModel, trajectory: BaseTrajectory, config: SimConfig
    ):
        """Initialize with the prescribed base trajectory and world gravity."""
        self.model = model
        self.trajectory = trajectory
        self.gravity = np.asarray(config.gravity, dtype=float)
        self.friction = config.joint_friction

    def evaluate(
        self,
        t: float,
        state: JointState,
        frames: ChainFrames,
        torque: FloatArray,
        motion: BaseMotionSample,
    ) -> PlantSample:
        """Joint accelerations and the world end-effector acceleration."""
        base = self.trajectory.at(t)
        world = frames.transformed(base.rotation, base.position)
        mount = RootMotion(
            position=base.position,
            angular_velocity=base.angular_velocity,
            angular_acceleration=base.angular_acceleration,
            linear_velocity=base.velocity,
            linear_acceleration=base.acceleration,
        )
        loaded = RootMotion(
            position=mount.position,
            angular_velocity=mount.angular_velocity,
            angular_acceleration=mount.angular_acceleration,
            linear_velocity=mount.linear_velocity,
            linear_acceleration=mount.linear_acceleration - self.gravity,
        )
        n = self.model.n
        rest = np.zeros(n)
        bias = recursive_newton_euler(self.model, world, state.qdot, rest, loaded)
        inertia = mass_matrix(self.model, state.q, world)
        applied = torque - self.friction * state.qdot
        factor = cho_factor(inertia, check_finite=False)
        qddot = cho_solve(factor, applied - bias, check_finite=False)

        link_motion = propagate_motion(world, state.qdot, qddot, mount)
        ee_world = link_motion.point_acceleration(n - 1, world, world.ee_position)
        to_base = base.rotation.T
        a_glob = np.concatenate(
            [to_base @ ee_world, to_base @ link_motion.angular_acceleration[n - 1]]
        )
        a_loc = _local_accel(self.model, frames, state, qddot)
        return PlantSample(
            qddot=qddot, a_ee_loc=a_loc, a_ee_base=a_glob - a_loc, a_ee_glob=a_glob
        )


def initial_state(model: ChainModel, config: SimConfig) -> JointState:
    """Configured start configuration at rest, or the ready pose."""
    if config.initial_q is not None:
        return JointState.at_rest(as_vector(config.initial_q, model.n, "initial_q"))
    return JointState.at_rest(ready_pose(model))


def hold_command(model: ChainModel, state: JointState) -> TaskCommand:
    """Command holding the end effector where ``state`` puts it."""
    return TaskCommand.hold(forward_kinematics(model, state.q).ee_pose())


def _sense(
    rng: np.random.Generator,
    config: SimConfig,
    t: float,
    state: JointState,
    motion: BaseMotionSample,
) -> SensorFrame:
    noise_q, noise_qdot, noise_accel, noise_gyro = config.obs_noise_std
    if not any((noise_q, noise_qdot, noise_accel, noise_gyro)):
        return SensorFrame(t=t, state=state, motion=motion)
    n = state.q.shape[0]
    sensed_state = JointState(
        q=state.q + noise_q * rng.standard_normal(n),
        qdot=state.qdot + noise_qdot * rng.standard_normal(n),
    )
    twist = motion.V_b.copy()
    accel = motion.A_b.copy()
    accel[:3] += noise_accel * rng.standard_normal(3)
    twist[3:] += noise_gyro * rng.standard_normal(3)
    motion = BaseMotionSample(V_b=twist, A_b=accel)
    return SensorFrame(t=t, state=sensed_state, motion=motion)


def simulate(
    model: ChainModel,
    controller: Controller,
    series: BaseMotionSeries,
    plant: Plant,
    config: SimConfig,
    cmd: TaskCommand | None = None,
) -> RolloutLog:
    """
    Run the rate-layered loop of ``controller`` against ``plant``.

    Args:
        model: The arm.
        controller: Control law under test.
        series: Base motion on the physics grid.
        plant: Dynamics to integrate.
        config: Simulation settings.
        cmd: Task command; holds the initial end-effector pose when omitted.

    Returns:
        One record per physics grid point.

    Raises:
        RolloutAbortedError: If the dynamics become non-finite.

    """
    rng = make_rng(config.seed)
    state = initial_state(model, config)
    cmd = cmd or hold_command(model, state)
    controller.reset(model, cmd, state)

    limits = model.arrays.torque_limits
    torque = np.zeros(model.n)
    clip_count = 0
    records: list[RolloutRecord] = []
    for k in range(len(series)):
        t = float(series.t[k])
        motion = series[k]
        frames = forward_kinematics(model, state.q)

        if k % config.pd_every == 0 or k % config.control_every == 0:
            sensed = _sense(rng, config, t, state, motion)
            if k % config.control_every == 0:
                controller.plan(sensed)
            torque = controller.torque(sensed).torque
            if config.torque_limits_on:
                clipped = np.clip(torque, -limits, limits)
                clip_count += int(np.any(clipped != torque))
                torque = clipped

        sample = plant.evaluate(t, state, frames, torque, motion)
        records.append(
            RolloutRecord(
                t=t,
                state=state,
                tau=torque.copy(),
                ee_pose=frames.ee_pose(),
                a_ee_loc=sample.a_ee_loc,
                a_ee_base=sample.a_ee_base,
                a_ee_glob=sample.a_ee_glob,
                motion=motion,
            )
        )
        if k + 1 < len(series):
            try:
                state = advance(model, state, sample.qddot, config.dt_physics, t)
            except RolloutAbortedError as e:
                partial = RolloutLog.from_records(records)
                raise RolloutAbortedError(e.time, e.diagnostic, partial) from e

    if clip_count:
        logger.warning(f"{controller.name}: torque clipped on {clip_count} PD ticks")
    return RolloutLog.from_records(records)


def time_grid(config: SimConfig) -> FloatArray:
    """Physics grid ``0, dt, ..., N dt`` with ``N = round(duration / dt)``."""
    return np.arange(config.steps + 1) * config.dt_physics


def rollout(
    model: ChainModel,
    controller: Controller,
    profile: DisturbanceProfile | MotionSource,
    cmd: TaskCommand | None,
    config: SimConfig,
    emulate_base: bool = True,
) -> RolloutLog:
    """
    Fixed-base rollout under base motion emulated by fictitious wrenches.

    Args:
        model: The arm.
        controller: Control law under test.
        profile: Disturbance profile or any motion source.
        cmd: Task command; holds the initial end-effector pose when ``None``.
        config: Simulation settings; deterministic given ``config.seed``.
        emulate_base: Apply the fictitious wrenches.

    Returns:
        The rollout log.

    Raises:
        RolloutAbortedError: With the failing time, if the dynamics diverge.

    """
    series = as_motion_source(profile).series(time_grid(config))
    logger.debug(
        f"Rollout of {controller.name} on '{model.name}': {len(series)} records"
    )
    plant = FixedBasePlant(model, config, emulate_base)
    return simulate(model, controller, series, plant, config, cmd)


def floating_base_oracle(
    model: ChainModel,
    base_pose_trajectory: BaseTrajectory,
    controller: Controller,
    config: SimConfig,
    cmd: TaskCommand | None = None,
) -> RolloutLog:
    """
    Reference rollout on a kinematically moved base.

    The controller sees the same base-frame signals as in ``rollout``; the
    logged ``a_ee_glob`` is the world end-effector acceleration expressed in
    base coordinates.
    """
    series = TrajectoryMotion(base_pose_trajectory).series(time_grid(config))
    plant = FloatingBasePlant(model, base_pose_trajectory, config)
    return simulate(model, controller, series, plant, config, cmd)


def global_ee_accel(
    model: ChainModel, record: RolloutRecord, config: SimConfig | None = None
) -> FloatArray:
    """
    Recompute ``a_ee_base + a_ee_loc`` for a logged fixed-base record.

    ``a_ee_loc = J qddot + Jdot qdot`` with ``qddot`` from the logged state,
    applied torque and the base motion's wrenches.
    """
    config = config or SimConfig()
    plant = FixedBasePlant(model, config)
    frames = forward_kinematics(model, record.state.q)
    sample = plant.evaluate(record.t, record.state, frames, record.tau, record.motion)
    return sample.a_ee_glob
