"""
Residual policy controller and the PPO training loop.

The policy picks joint-target offsets at the control rate around the
inverse-kinematics solution of the command. At every PD tick the applied
torque is the joint PD torque toward those targets plus the operational-space
task torque. Training rewards torques close to the analytic compensation
plus task torque.
"""

import csv
import logging
from collections.abc import Callable, Sequence
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from steady_arm.chain.models import ChainModel
from steady_arm.control.controllers import SensorFrame
from steady_arm.control.laws import analytic_torques, pd_torque, solve_ik, task_torque
from steady_arm.control.models import Gains, TaskCommand, TorqueCommand
from steady_arm.disturbance.models import DisturbanceProfile, ProfileRanges
from steady_arm.disturbance.profile import make_rng, sample_profile
from steady_arm.dynamics.kinematics import JointState
from steady_arm.dynamics.rigid_body import compute_dynamics, default_task_rows
from steady_arm.errors import CheckpointError, RolloutAbortedError, TrainingError
from steady_arm.policy.models import (
    Batch,
    IterationStats,
    PPOConfig,
    RewardWeights,
    TrainingSwitches,
)
from steady_arm.policy.network import MLP, GaussianPolicy, policy_forward
from steady_arm.policy.observation import (
    ObservationHistory,
    observation_frame,
    observation_size,
)
from steady_arm.policy.ppo import PPOOptimizer, compute_gae, ppo_update
from steady_arm.policy.reward import compute_reward
from steady_arm.sim.engine import rollout
from steady_arm.sim.models import RolloutLog, SimConfig
from steady_arm.textformat import format_float
from steady_arm.utils import FloatArray

logger = logging.getLogger(__name__)

TREND_WINDOW = 10

CURVE_COLUMNS = (
    "iteration",
    "mean_reward",
    "mean_ee_lin_acc",
    "mean_torque_guide",
    "policy_loss",
    "value_loss",
    "approx_kl",
    "clip_fraction",
    "aborted_episodes",
)


@dataclass
class PolicyStep:
    """What the controller decided at one control tick."""

    t: float
    observation: FloatArray
    pre_squash: FloatArray
    action: FloatArray
    log_prob: float
    value: float


class PolicyController:
    """
    Joint PD toward policy targets plus the task torque.

    With a critic and ``deterministic=False`` every decision is kept in
    ``trace`` for training.
    """

    def __init__(
        self,
        policy: GaussianPolicy,
        gains: Gains | None = None,
        use_task_torque: bool = True,
        deterministic: bool = True,
        rng: np.random.Generator | None = None,
        critic: MLP | None = None,
        gravity: FloatArray | None = None,
        name: str = "policy",
    ):
        """
        Initialize the controller.

        Args:
            policy: The actor.
            gains: Joint PD and operational-space gains.
            use_task_torque: Add the operational-space task torque.
            deterministic: Act with the policy mean.
            rng: Generator for stochastic actions.
            critic: Value network; its estimates are stored in the trace.
            gravity: Gravity vector the task torque assumes.
            name: Display name.

        """
        self.policy = policy
        self.gains = gains or Gains()
        self.use_task_torque = use_task_torque
        self.deterministic = deterministic
        self.rng = rng
        self.critic = critic
        self.gravity = gravity
        self.name = name
        self.trace: list[PolicyStep] = []
        self.cmd: TaskCommand | None = None
        self._model: ChainModel | None = None
        self._history: ObservationHistory | None = None
        self._q_nominal: FloatArray | None = None
        self._q_des: FloatArray | None = None
        self._previous = np.zeros(policy.action_size)

    def reset(self, model: ChainModel, cmd: TaskCommand, initial: JointState) -> None:
        """
        Solve the nominal targets and clear the observation history.

        Raises:
            CheckpointError: If the policy was built for another joint count.

        """
        expected = observation_size(model.n, self.policy.history)
        if self.policy.net.input_size != expected or self.policy.action_size != model.n:
            raise CheckpointError(
                f"policy with layer widths {self.policy.net.sizes} does not fit "
                f"a {model.n}-joint arm"
            )
        self._model = model
        self.cmd = cmd
        self._history = ObservationHistory(model.n, self.policy.history)
        rows = default_task_rows(model)
        self._q_nominal = solve_ik(model, cmd.x_des, initial.q, rows)
        self._q_des = self._q_nominal.copy()
        self._previous = np.zeros(model.n)
        self.trace = []

    def plan(self, sensed: SensorFrame) -> None:
        """Observe, act and move the PD targets."""
        if self._history is None or self.cmd is None or self._q_nominal is None:
            raise RuntimeError("controller used before reset()")
        self._history.push(observation_frame(self.cmd, sensed, self._previous))
        observation = self._history.vector()
        output = policy_forward(self.policy, observation, self.deterministic, self.rng)
        value = 0.0 if self.critic is None else float(self.critic(observation)[0, 0])
        self.trace.append(
            PolicyStep(
                t=sensed.t,
                observation=observation,
                pre_squash=output.pre_squash,
                action=output.action,
                log_prob=output.log_prob,
                value=value,
            )
        )
        self._previous = output.action
        self._q_des = self._q_nominal + output.action

    def torque(self, sensed: SensorFrame) -> TorqueCommand:
        """PD toward the current targets plus the task torque."""
        if self._model is None or self._q_des is None or self.cmd is None:
            raise RuntimeError("controller used before reset()")
        pd = pd_torque(self.gains, self._q_des, sensed.state)
        if not self.use_task_torque:
            return TorqueCommand.plain(pd)
        dynamics = compute_dynamics(self._model, sensed.state, self.gravity)
        tau_task = task_torque(
            self._model, sensed.state, self.cmd, self.gains, dynamics
        )
        return TorqueCommand(
            torque=pd + tau_task, tau_comp=np.zeros_like(pd), tau_task=tau_task
        )


@dataclass(frozen=True)
class TrainingSetup:
    """Everything an episode needs besides the networks."""

    sim: SimConfig
    ranges: ProfileRanges = field(default_factory=ProfileRanges)
    gains: Gains = field(default_factory=Gains)
    weights: RewardWeights = field(default_factory=RewardWeights)
    switches: TrainingSwitches = field(default_factory=TrainingSwitches)
    cmd: TaskCommand | None = None

    @property
    def reward_weights(self) -> RewardWeights:
        """Weights after the torque-guide switch."""
        if self.switches.use_torque_guide:
            return self.weights
        return self.weights.without_torque_guide()


@dataclass(frozen=True)
class Episode:
    """Transitions of one episode."""

    observations: FloatArray
    pre_squash: FloatArray
    log_probs: FloatArray
    values: FloatArray
    rewards: FloatArray
    dones: FloatArray
    last_value: float
    mean_ee_lin_acc: float
    mean_torque_guide: float
    aborted: bool

    def __len__(self) -> int:
        """Number of transitions."""
        return self.rewards.shape[0]


def episode_profile(setup: TrainingSetup, seed: int) -> DisturbanceProfile:
    """Base motion of a training episode."""
    if setup.switches.simulate_base_accel:
        return sample_profile(seed, setup.ranges)
    return DisturbanceProfile.quiet(seed)


def _score_episode(
    model: ChainModel,
    controller: PolicyController,
    log: RolloutLog,
    setup: TrainingSetup,
    control_every: int,
    aborted: bool,
) -> Episode:
    cmd = controller.cmd
    if cmd is None:
        raise TrainingError("episode finished without a task command")
    weights = setup.reward_weights
    gravity = np.asarray(setup.sim.gravity, dtype=float)

    # Action i is judged on the last record it governed.
    steps = [
        (index, step)
        for index, step in enumerate(controller.trace)
        if (index + 1) * control_every - 1 < len(log)
    ]
    if not steps:
        raise TrainingError("episode ended before the first action took effect")
    rewards = []
    guides = []
    previous = np.zeros(model.n)
    for index, step in steps:
        record = log.record((index + 1) * control_every - 1)
        ideal = analytic_torques(
            model, record.state, record.motion, cmd, setup.gains, gravity
        )
        breakdown = compute_reward(
            record, ideal.tau_comp, ideal.tau_task, cmd, previous, step.action, weights
        )
        rewards.append(breakdown.total)
        guides.append(breakdown.torque_guide_total)
        previous = step.action

    kept = [step for _, step in steps]
    dones = np.zeros(len(kept))
    if aborted:
        dones[-1] = 1.0
        last_value = 0.0
    else:
        following = len(kept)
        trace = controller.trace
        last_value = trace[following].value if following < len(trace) else 0.0

    return Episode(
        observations=np.array([step.observation for step in kept]),
        pre_squash=np.array([step.pre_squash for step in kept]),
        log_probs=np.array([step.log_prob for step in kept]),
        values=np.array([step.value for step in kept]),
        rewards=np.array(rewards),
        dones=dones,
        last_value=last_value,
        mean_ee_lin_acc=float(np.mean(np.linalg.norm(log.a_ee_glob[:, :3], axis=1))),
        mean_torque_guide=float(np.mean(guides)),
        aborted=aborted,
    )


def run_episode(
    model: ChainModel,
    actor: GaussianPolicy,
    critic: MLP,
    setup: TrainingSetup,
    horizon: int,
    seeds: tuple[int, int, int],
) -> Episode:
    """
    Roll out the stochastic policy once and score every action.

    Args:
        model: The arm.
        actor: Policy to sample from.
        critic: Value network.
        setup: Episode configuration.
        horizon: Policy steps per episode.
        seeds: Seeds of the profile, the simulator noise and the actions.

    Returns:
        The scored transitions; an aborted episode ends with ``done``.

    """
    profile_seed, sim_seed, action_seed = seeds
    sim = setup.sim.model_copy(
        update={"duration": horizon / setup.sim.control_rate, "seed": sim_seed}
    )
    controller = PolicyController(
        actor,
        setup.gains,
        use_task_torque=setup.switches.use_task_torque,
        deterministic=False,
        rng=make_rng(action_seed),
        critic=critic,
        gravity=np.asarray(sim.gravity, dtype=float),
    )
    profile = episode_profile(setup, profile_seed)
    try:
        log = rollout(model, controller, profile, setup.cmd, sim)
        aborted = False
    except RolloutAbortedError as e:
        logger.warning(f"Training episode aborted: {e}")
        if not isinstance(e.partial, RolloutLog) or len(e.partial) == 0:
            raise TrainingError(f"episode aborted before any step: {e}") from e
        log = e.partial
        aborted = True
    return _score_episode(model, controller, log, setup, sim.control_every, aborted)


EpisodeJob = tuple[
    ChainModel, GaussianPolicy, MLP, TrainingSetup, int, tuple[int, int, int]
]


def _seed_triple(row: np.ndarray) -> tuple[int, int, int]:
    first, second, third = (int(s) for s in row)
    return first, second, third


def _episode_job(args: EpisodeJob) -> Episode:
    return run_episode(*args)


def collect_batch(episodes: list[Episode], config: PPOConfig) -> Batch:
    """Concatenate episodes with per-episode GAE."""
    advantages = []
    returns = []
    for episode in episodes:
        adv, ret = compute_gae(
            episode.rewards,
            episode.values,
            episode.dones,
            episode.last_value,
            config.gamma,
            config.gae_lambda,
        )
        advantages.append(adv)
        returns.append(ret)
    return Batch(
        observations=np.concatenate([episode.observations for episode in episodes]),
        pre_squash=np.concatenate([episode.pre_squash for episode in episodes]),
        log_probs=np.concatenate([episode.log_probs for episode in episodes]),
        values=np.concatenate([episode.values for episode in episodes]),
        rewards=np.concatenate([episode.rewards for episode in episodes]),
        dones=np.concatenate([episode.dones for episode in episodes]),
        advantages=np.concatenate(advantages),
        returns=np.concatenate(returns),
    )


@dataclass
class TrainingResult:
    """Trained networks and the per-iteration curve."""

    policy: GaussianPolicy
    critic: MLP
    curve: list[IterationStats]


def initial_networks(
    model: ChainModel, config: PPOConfig, rng: np.random.Generator
) -> tuple[GaussianPolicy, MLP]:
    """Fresh actor and critic sized for ``model``."""
    obs_size = observation_size(model.n, config.history)
    actor = GaussianPolicy.initialize(
        obs_size,
        model.n,
        rng,
        hidden_sizes=config.hidden_sizes,
        action_scale=config.action_scale,
        init_log_std=config.init_log_std,
        history=config.history,
    )
    critic = MLP.initialize((obs_size, *config.hidden_sizes, 1), rng)
    return actor, critic


def train(
    model: ChainModel,
    setup: TrainingSetup,
    config: PPOConfig,
    on_iteration: Callable[[IterationStats], None] | None = None,
) -> TrainingResult:
    """
    Train the residual policy with PPO.

    Every episode draws a fresh disturbance profile. Seeds for profiles,
    sensor noise and action sampling all derive from ``config.seed``.

    Args:
        model: The arm.
        setup: Episode configuration.
        config: Trainer settings.
        on_iteration: Called with each curve row as it is produced.

    Returns:
        The trained actor (use it deterministically), critic and curve.

    Raises:
        TrainingError: If an update fails or an episode cannot be scored.

    """
    rng = make_rng(config.seed)
    actor, critic = initial_networks(model, config, rng)
    optimizer = PPOOptimizer.create(actor, critic, config.learning_rate)
    seeds = rng.integers(
        0, 2**31 - 1, size=(config.iterations, config.episodes_per_iteration, 3)
    )
    logger.info(
        f"Training on '{model.name}' for {config.iterations} iterations of "
        f"{config.episodes_per_iteration} x {config.horizon} steps"
    )

    curve: list[IterationStats] = []
    executor = ProcessPoolExecutor(config.workers) if config.workers > 1 else None
    try:
        for iteration in range(config.iterations):
            jobs = [
                (model, actor, critic, setup, config.horizon, _seed_triple(row))
                for row in seeds[iteration]
            ]
            if executor is None:
                episodes = [_episode_job(job) for job in jobs]
            else:
                episodes = list(executor.map(_episode_job, jobs))

            batch = collect_batch(episodes, config)
            stats = ppo_update(batch, actor, critic, config, optimizer, rng)
            row = IterationStats(
                iteration=iteration,
                mean_reward=float(np.mean(batch.rewards)),
                mean_ee_lin_acc=float(
                    np.mean([episode.mean_ee_lin_acc for episode in episodes])
                ),
                mean_torque_guide=float(
                    np.mean([episode.mean_torque_guide for episode in episodes])
                ),
                policy_loss=stats.policy_loss,
                value_loss=stats.value_loss,
                approx_kl=stats.approx_kl,
                clip_fraction=stats.clip_fraction,
                aborted_episodes=sum(episode.aborted for episode in episodes),
            )
            curve.append(row)
            logger.info(
                f"Iteration {iteration}: reward {row.mean_reward:.3f}, "
                f"EE lin acc {row.mean_ee_lin_acc:.3f}, "
                f"torque guide {row.mean_torque_guide:.3f}"
            )
            if on_iteration is not None:
                on_iteration(row)
    finally:
        if executor is not None:
            executor.shutdown()
    return TrainingResult(policy=actor, critic=critic, curve=curve)


def write_curve_csv(curve: list[IterationStats], path: Path) -> None:
    """Write the training curve, one row per iteration."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CURVE_COLUMNS)
        for row in curve:
            values = row.model_dump()
            writer.writerow(
                str(values[name])
                if isinstance(values[name], int)
                else format_float(values[name])
                for name in CURVE_COLUMNS
            )
    logger.info(f"Wrote training curve with {len(curve)} rows to {path}")


def torque_guide_trend(
    curve: Sequence[IterationStats], window: int = TREND_WINDOW
) -> float:
    """
    Slope of the smoothed torque-guide reward over the final half of training.

    The curve is smoothed with a ``window``-iteration moving average; the
    result is the least-squares slope per iteration of the second half.

    Raises:
        ValueError: If the curve is too short for the window.

    """
    values = np.array([row.mean_torque_guide for row in curve], dtype=float)
    if window < 1 or values.size < window:
        raise ValueError(f"need at least {window} iterations, got {values.size}")
    smoothed = np.convolve(values, np.ones(window) / window, mode="valid")
    tail = smoothed[smoothed.size // 2 :]
    if tail.size < 2:
        raise ValueError(f"{values.size} iterations are too few for window {window}")
    return float(np.polyfit(np.arange(tail.size), tail, 1)[0])
