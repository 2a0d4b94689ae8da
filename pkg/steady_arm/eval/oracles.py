"""
Numerical self-checks of the laboratory.

Each check compares an implementation against an independent reference
(finite differences, a second algorithm, a closed form or a kinematically
moved base) and reports the worst error against its tolerance.
"""

import logging
import math
from collections.abc import Callable

import numpy as np
from pydantic import BaseModel
from scipy.spatial.transform import Rotation
from scipy.stats import kstest

from steady_arm.chain.builtin import builtin_toy_arm
from steady_arm.chain.models import ChainModel
from steady_arm.constants import get_constants
from steady_arm.control.controllers import AnalyticController
from steady_arm.control.laws import (
    base_induced_accel,
    compensation_torque,
    pose_error,
    ready_pose,
    responsive_accel,
)
from steady_arm.control.models import Gains, TaskCommand
from steady_arm.disturbance.models import BaseMotionSample, ProfileRanges
from steady_arm.disturbance.profile import make_rng, sample_profile, sample_profiles
from steady_arm.disturbance.wrench import link_wrenches
from steady_arm.dynamics.kinematics import (
    JointState,
    Pose,
    forward_kinematics,
    jacobian,
)
from steady_arm.dynamics.rigid_body import (
    LINEAR_ROWS,
    compute_dynamics,
    forward_dynamics,
    inverse_dynamics,
    kinetic_energy,
    mass_matrix,
    mechanical_energy,
)
from steady_arm.errors import RolloutAbortedError
from steady_arm.eval.metrics import double_diff_accel
from steady_arm.policy.models import Batch, PPOConfig
from steady_arm.policy.network import MLP, GaussianPolicy, gradient_check
from steady_arm.policy.ppo import compute_gae, ppo_update
from steady_arm.sim.engine import (
    TrajectoryMotion,
    advance,
    floating_base_oracle,
    hold_command,
    initial_state,
    rollout,
)
from steady_arm.sim.models import RolloutLog, SimConfig
from steady_arm.sim.trajectory import SinusoidalTrajectory
from steady_arm.utils import FloatArray

logger = logging.getLogger(__name__)

ZERO_GRAVITY = (0.0, 0.0, 0.0)


class CheckResult(BaseModel):
    """Outcome of one self-check."""

    name: str
    passed: bool
    value: float
    tolerance: float
    detail: str = ""


class VerifyReport(BaseModel):
    """All self-check outcomes."""

    checks: list[CheckResult]

    @property
    def passed(self) -> bool:
        """Whether every check passed."""
        return all(check.passed for check in self.checks)


def _below(name: str, value: float, tolerance: float, detail: str = "") -> CheckResult:
    return CheckResult(
        name=name,
        passed=math.isfinite(value) and value < tolerance,
        value=value,
        tolerance=tolerance,
        detail=detail,
    )


def _random_configuration(
    model: ChainModel, rng: np.random.Generator
) -> tuple[FloatArray, FloatArray]:
    arrays = model.arrays
    q = rng.uniform(0.9 * arrays.lower_limits, 0.9 * arrays.upper_limits)
    return q, rng.uniform(-1.0, 1.0, model.n)


def finite_difference_jacobian(
    model: ChainModel, q: FloatArray, h: float
) -> FloatArray:
    """Central differences of the end-effector pose, rotation-vector rows for angle."""
    columns = np.zeros((6, model.n))
    for j in range(model.n):
        step = np.zeros(model.n)
        step[j] = h
        upper = forward_kinematics(model, q + step).ee_pose()
        lower = forward_kinematics(model, q - step).ee_pose()
        columns[:3, j] = (upper.position - lower.position) / (2.0 * h)
        turn = upper.rotation() * lower.rotation().inv()
        columns[3:, j] = turn.as_rotvec() / (2.0 * h)
    return columns


def check_jacobian(
    model: ChainModel, samples: int = 1000, seed: int = 0, h: float = 1e-6
) -> CheckResult:
    """Analytic end-effector Jacobian against central differences."""
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(samples):
        q, _ = _random_configuration(model, rng)
        analytic = jacobian(model, q)
        numeric = finite_difference_jacobian(model, q, h)
        scale = max(float(np.max(np.abs(analytic))), 1.0)
        worst = max(worst, float(np.max(np.abs(analytic - numeric))) / scale)
    return _below(f"jacobian[{model.name}]", worst, 1e-6, f"{samples} configurations")


def check_mass_matrix(
    model: ChainModel, samples: int = 100, seed: int = 0
) -> CheckResult:
    """
    Composite-rigid-body mass matrix against Newton-Euler.

    Column ``j`` of ``M`` equals the zero-velocity, zero-gravity inverse
    dynamics of a unit acceleration of joint ``j``.
    """
    rng = make_rng(seed)
    zeros = np.zeros(model.n)
    worst = 0.0
    for _ in range(samples):
        q, _ = _random_configuration(model, rng)
        matrix = mass_matrix(model, q)
        for j, unit in enumerate(np.eye(model.n)):
            column = inverse_dynamics(model, q, zeros, unit, gravity=ZERO_GRAVITY)
            worst = max(worst, float(np.max(np.abs(column - matrix[:, j]))))
    return _below(
        f"mass_matrix[{model.name}]", worst, 1e-9, f"{samples} configurations"
    )


def check_kinetic_energy(
    model: ChainModel, samples: int = 100, seed: int = 0
) -> CheckResult:
    """``qdot^T M qdot / 2`` against the sum of link kinetic energies."""
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(samples):
        q, qdot = _random_configuration(model, rng)
        quadratic = 0.5 * qdot @ mass_matrix(model, q) @ qdot
        direct = kinetic_energy(model, JointState(q=q, qdot=qdot))
        worst = max(worst, abs(quadratic - direct))
    return _below(f"kinetic_energy[{model.name}]", worst, 1e-9, f"{samples} states")


def check_energy_drift(
    duration: float = 1.0, dt: float = 1e-4, q0: float = 0.5
) -> CheckResult:
    """
    Energy of an undamped, unactuated pendulum under the integrator.

    The pendulum swings under the default gravity from ``q0`` through the
    hanging position. Energy is evaluated with the velocity averaged over
    the two half steps around each position.
    """
    model = builtin_toy_arm(1)
    gravity = np.array(get_constants().GRAVITY)
    state = JointState.at_rest(np.array([q0]))
    zeros = np.zeros(model.n)
    reference = mechanical_energy(model, state, gravity)
    worst = 0.0
    for k in range(round(duration / dt)):
        qddot = forward_dynamics(model, state, zeros, gravity=gravity)
        following = advance(model, state, qddot, dt)
        averaged = JointState(q=state.q, qdot=0.5 * (state.qdot + following.qdot))
        if k:
            drift = abs(mechanical_energy(model, averaged, gravity) - reference)
            worst = max(worst, drift)
        state = following
    relative = worst / abs(reference)
    return _below("energy_drift[pendulum]", relative, 1e-4, f"{duration} s at dt={dt}")


def check_wrench_equivalence(
    model: ChainModel,
    trajectories: int = 10,
    duration: float = 2.0,
    seed: int = 0,
) -> CheckResult:
    """
    Fictitious-wrench rollouts against a kinematically moved base.

    Both rollouts run the ideal controller without gravity; the world
    end-effector accelerations must agree.
    """
    config = SimConfig(duration=duration, gravity=ZERO_GRAVITY, seed=seed)
    seeds = make_rng(seed).integers(0, 2**31 - 1, size=trajectories)
    worst = 0.0
    for trajectory_seed in seeds:
        trajectory = SinusoidalTrajectory.random(int(trajectory_seed))
        emulated = rollout(
            model,
            AnalyticController(gravity=np.zeros(3)),
            TrajectoryMotion(trajectory),
            None,
            config,
        )
        moved = floating_base_oracle(
            model, trajectory, AnalyticController(gravity=np.zeros(3)), config
        )
        difference = emulated.a_ee_glob[:, :3] - moved.a_ee_glob[:, :3]
        rms = float(np.sqrt(np.mean(np.sum(difference**2, axis=1))))
        worst = max(worst, rms)
    return _below(
        f"wrench_equivalence[{model.name}]",
        worst,
        1e-3,
        f"{trajectories} trajectories, RMS of linear a_glob",
    )


def check_compensation(
    model: ChainModel, samples: int = 20, seed: int = 0
) -> CheckResult:
    """
    Compensation torque cancels base-induced and responsive accelerations.

    ``a_base + a_resp + J M^-1 tau_comp`` vanishes on the position rows up
    to the inertia regularization.
    """
    rng = make_rng(seed)
    worst = 0.0
    for _ in range(samples):
        qdot = rng.uniform(-1.0, 1.0, model.n)
        state = JointState(q=ready_pose(model), qdot=qdot)
        motion = BaseMotionSample(
            V_b=rng.uniform(-1.0, 1.0, 6), A_b=rng.uniform(-10.0, 10.0, 6)
        )
        dynamics = compute_dynamics(model, state, ZERO_GRAVITY, LINEAR_ROWS)
        wrenches = link_wrenches(model, state, motion, dynamics.frames)
        a_base = base_induced_accel(
            dynamics.frames.ee_position, dynamics.J[:3] @ qdot, motion
        )
        a_resp = responsive_accel(model, state.q, wrenches, dynamics)
        tau = compensation_torque(model, state, motion, wrenches, dynamics)
        disturbance = (a_base + a_resp)[:3]
        residual = disturbance + (dynamics.J @ dynamics.solve(tau))[:3]
        scale = max(float(np.linalg.norm(disturbance)), 1e-12)
        worst = max(worst, float(np.linalg.norm(residual)) / scale)
    return _below(f"compensation[{model.name}]", worst, 1e-4, f"{samples} states")


def tracking_residual(
    model: ChainModel,
    log: RolloutLog,
    cmd: TaskCommand,
    gains: Gains,
    warmup: float,
) -> FloatArray:
    """
    Per-record ``a_glob - (Kbar_p e + Kbar_d edot)`` on the position rows.

    Under full compensation the world end-effector acceleration equals the
    tracking feedback, so this residual only carries the zero-order hold
    between PD ticks. Without compensation it carries ``a_base + a_resp``.
    """
    stiffness = np.asarray(gains.Kbar_p)[:3]
    damping = np.asarray(gains.Kbar_d)[:3]
    target = cmd.x_des
    residuals = []
    for k in np.flatnonzero(log.t >= warmup):
        pose = Pose(position=log.ee_position[k], orientation=log.ee_orientation[k])
        error = pose_error(pose, target)[:3]
        velocity = (jacobian(model, log.q[k]) @ log.qdot[k])[:3]
        rate = np.asarray(cmd.xdot_des)[:3] - velocity
        feedback = stiffness * error + damping * rate
        residuals.append(log.a_ee_glob[k, :3] - feedback)
    return np.array(residuals)


def check_closed_loop_cancellation(
    model: ChainModel,
    profiles: int = 50,
    duration: float = 1.0,
    seed: int = 0,
    ranges: ProfileRanges | None = None,
) -> CheckResult:
    """
    Rollouts of ``ideal`` against ``task_only`` on sampled profiles.

    Compares the mean norm of ``tracking_residual`` over all profiles; the
    ratio must stay below 0.1. The detail also reports the ratio of raw
    ``a_glob`` norms, which includes the re-injected feedback.

    Raises:
        ValueError: For arms with fewer than three joints, whose position
            rows are not all controllable.

    """
    if model.n < 3:
        raise ValueError(f"closed-loop check needs n >= 3, got {model.n}")
    name = f"closed_loop_cancellation[{model.name}]"
    config = SimConfig(duration=duration, torque_limits_on=False, seed=seed)
    cmd = hold_command(model, initial_state(model, config))
    warmup = get_constants().METRICS_WARMUP
    gains = Gains()
    residual = {"ideal": 0.0, "task_only": 0.0}
    raw = {"ideal": 0.0, "task_only": 0.0}
    for profile in sample_profiles(seed, profiles, ranges):
        for method, compensate in (("ideal", True), ("task_only", False)):
            controller = AnalyticController(gains, use_compensation=compensate)
            try:
                log = rollout(model, controller, profile, cmd, config)
            except RolloutAbortedError as e:
                return CheckResult(
                    name=name,
                    passed=False,
                    value=math.inf,
                    tolerance=0.1,
                    detail=f"{method} aborted on profile {profile.seed}: {e}",
                )
            errors = tracking_residual(model, log, cmd, gains, warmup)
            residual[method] += float(np.mean(np.linalg.norm(errors, axis=1)))
            measured = log.a_ee_glob[log.t >= warmup, :3]
            raw[method] += float(np.mean(np.linalg.norm(measured, axis=1)))
    ratio = residual["ideal"] / max(residual["task_only"], 1e-12)
    raw_ratio = raw["ideal"] / max(raw["task_only"], 1e-12)
    return _below(
        name,
        ratio,
        0.1,
        f"{profiles} profiles, raw a_glob ratio {raw_ratio:.3f}",
    )


def check_profile_statistics(samples: int = 10000, seed: int = 0) -> CheckResult:
    """
    Sampled profiles stay in range and periods are log-uniform.

    Returns a failed check for any out-of-range parameter or a
    Kolmogorov-Smirnov p-value below 1% on the normalized log-periods.
    """
    ranges = ProfileRanges()
    seeds = make_rng(seed).integers(0, 2**31 - 1, size=samples)
    log_low, log_high = (math.log(bound) for bound in ranges.period)
    normalized = []
    violations = 0
    for profile_seed in seeds:
        profile = sample_profile(int(profile_seed), ranges)
        for component in profile.components:
            log_period = math.log(component.period)
            normalized.append((log_period - log_low) / (log_high - log_low))
            in_range = (
                ranges.period[0] <= component.period <= ranges.period[1]
                and all(abs(value) <= ranges.impulse[1] for value in component.impulse)
                and all(abs(value) <= ranges.sway[1] for value in component.sway)
                and ranges.phase[0] <= component.phase <= ranges.phase[1]
            )
            violations += int(not in_range)
    p_value = float(kstest(normalized, "uniform").pvalue)
    return CheckResult(
        name="profile_statistics",
        passed=violations == 0 and p_value >= 0.01,
        value=p_value,
        tolerance=0.01,
        detail=f"{samples} profiles, {violations} out-of-range components",
    )


def check_double_diff(rate: float | None = None, frequency: float = 1.0) -> CheckResult:
    """
    Double differentiation of a sampled sinusoid, with and without a glitch.

    The recovered peak linear acceleration must be within 2% of the analytic
    ``(2 pi f)^2 A``, also after a single corrupted sample is removed.
    """
    rate = get_constants().MOCAP_RATE if rate is None else rate
    amplitude = 0.1
    t = np.arange(int(2 * rate) + 1) / rate
    positions = np.zeros((t.shape[0], 3))
    positions[:, 1] = amplitude * np.sin(2.0 * math.pi * frequency * t)
    identity = Rotation.identity().as_quat(scalar_first=True)
    orientations = np.tile(identity, (t.shape[0], 1))
    expected = (2.0 * math.pi * frequency) ** 2 * amplitude

    worst = 0.0
    for glitch in (False, True):
        series = positions.copy()
        if glitch:
            series[t.shape[0] // 3, 1] += 0.01
        lin, _ = double_diff_accel(series, orientations, rate)
        peak = float(np.max(np.linalg.norm(lin, axis=1)))
        worst = max(worst, abs(peak - expected) / expected)
    return _below("double_diff", worst, 0.02, f"{frequency} Hz sinusoid at {rate} Hz")


def check_gae() -> CheckResult:
    """GAE with ``lambda = 1`` equals Monte-Carlo returns minus values."""
    rewards = np.array([1.0, 2.0, 3.0, 0.5])
    values = np.array([0.5, -0.2, 0.7, 0.1])
    dones = np.array([0.0, 0.0, 0.0, 1.0])
    gamma = 0.9
    advantages, _ = compute_gae(rewards, values, dones, 5.0, gamma, 1.0)
    returns = np.zeros_like(rewards)
    running = 0.0
    for t in reversed(range(rewards.shape[0])):
        running = rewards[t] + gamma * running
        returns[t] = running
    error = float(np.max(np.abs(advantages - (returns - values))))
    return _below("gae_monte_carlo", error, 1e-12)


def check_zero_advantage(seed: int = 0) -> CheckResult:
    """An update with zero advantages and no entropy bonus leaves the actor alone."""
    rng = make_rng(seed)
    actor = GaussianPolicy.initialize(8, 2, rng, hidden_sizes=(4,), history=1)
    critic = MLP.initialize((8, 4, 1), rng)
    before = [param.copy() for param in actor.parameters()]
    size = 16
    observations = rng.standard_normal((size, 8))
    pre_squash = rng.standard_normal((size, 2))
    batch = Batch(
        observations=observations,
        pre_squash=pre_squash,
        log_probs=rng.standard_normal(size),
        values=np.zeros(size),
        rewards=np.zeros(size),
        dones=np.zeros(size),
        advantages=np.zeros(size),
        returns=rng.standard_normal(size),
    )
    config = PPOConfig(
        entropy_coef=0.0, normalize_advantages=False, epochs=2, minibatch_size=8
    )
    ppo_update(batch, actor, critic, config, rng=rng)
    change = max(
        float(np.max(np.abs(after - prior)))
        for after, prior in zip(actor.parameters(), before, strict=True)
    )
    return _below("ppo_zero_advantage", change, 1e-12)


def check_gradients() -> CheckResult:
    """Manual backpropagation against finite differences."""
    return _below("mlp_gradients", gradient_check(), 1e-4)


def run_checks(
    samples: int = 1000, quick: bool = False, seed: int = 0
) -> VerifyReport:
    """
    Run every self-check.

    Args:
        samples: Configurations for the Jacobian check.
        quick: Reduce sample counts and rollout lengths.
        seed: Seed of every sampled check.

    Returns:
        The report; ``passed`` only if every check passed.

    """
    scale = 10 if quick else 1
    arms = [builtin_toy_arm(n) for n in (1, 2, 4)]
    planned: list[Callable[[], CheckResult]] = []
    for arm in arms:
        planned.append(
            lambda arm=arm: check_jacobian(arm, max(samples // scale, 1), seed)
        )
        planned.append(lambda arm=arm: check_mass_matrix(arm, 100 // scale, seed))
        planned.append(lambda arm=arm: check_kinetic_energy(arm, 100 // scale, seed))
    planned.append(check_energy_drift)
    planned.append(lambda: check_compensation(arms[2], seed=seed))
    planned.append(
        lambda: check_closed_loop_cancellation(arms[2], 50 // scale, seed=seed)
    )
    for arm in arms[1:]:
        planned.append(
            lambda arm=arm: check_wrench_equivalence(
                arm, 10 // scale, 0.5 if quick else 2.0, seed
            )
        )
    planned.append(lambda: check_profile_statistics(10000 // scale, seed))
    planned.append(check_double_diff)
    planned.append(check_gae)
    planned.append(lambda: check_zero_advantage(seed))
    planned.append(check_gradients)

    results = []
    for check in planned:
        result = check()
        level = logging.INFO if result.passed else logging.ERROR
        logger.log(
            level,
            f"{result.name}: {'pass' if result.passed else 'FAIL'} "
            f"({result.value:.3e} vs {result.tolerance:.0e}) {result.detail}",
        )
        results.append(result)
    return VerifyReport(checks=results)
