import math
from pathlib import Path

import numpy as np
import pytest
from scipy.integrate import trapezoid

from steady_arm.chain.models import ChainModel
from steady_arm.commands.train import BASELINE, train_logic
from steady_arm.config import load_config
from steady_arm.control import AnalyticController, TaskCommand, ready_pose
from steady_arm.disturbance import BaseMotionSample, ProfileRanges, sample_profile
from steady_arm.disturbance.profile import make_rng
from steady_arm.dynamics import JointState, Pose, forward_kinematics
from steady_arm.errors import CheckpointError
from steady_arm.eval.oracles import check_gae, check_zero_advantage
from steady_arm.policy import (
    MLP,
    Adam,
    GaussianPolicy,
    IterationStats,
    ObservationHistory,
    PolicyController,
    PPOConfig,
    RewardWeights,
    TrainingSetup,
    assemble_observation,
    compute_gae,
    compute_reward,
    gradient_check,
    load_checkpoint,
    observation_size,
    parse_policy,
    policy_forward,
    save_checkpoint,
    squashed_log_prob,
    surrogate_gradient,
    torque_guide_trend,
    train,
    write_curve_csv,
)
from steady_arm.policy.checkpoint import serialize_policy
from steady_arm.policy.train import CURVE_COLUMNS
from steady_arm.sim import SimConfig, rollout
from steady_arm.sim.models import RolloutRecord


def record_at(pose: Pose, tau: np.ndarray, a_glob: np.ndarray) -> RolloutRecord:
    return RolloutRecord(
        t=0.0,
        state=JointState.at_rest(np.zeros(tau.shape[0])),
        tau=tau,
        ee_pose=pose,
        a_ee_loc=a_glob,
        a_ee_base=np.zeros(6),
        a_ee_glob=a_glob,
        motion=BaseMotionSample.zero(),
    )


def shifted(pose: Pose, dx: float) -> Pose:
    return Pose(position=pose.position + [dx, 0.0, 0.0], orientation=pose.orientation)


@pytest.fixture
def held(two_link: ChainModel) -> tuple[Pose, TaskCommand]:
    pose = forward_kinematics(two_link, ready_pose(two_link)).ee_pose()
    return pose, TaskCommand.hold(pose)


def test_perfect_step_earns_the_maximum(held: tuple[Pose, TaskCommand]) -> None:
    pose, cmd = held
    tau = np.array([1.0, -2.0])
    record = record_at(pose, tau, np.zeros(6))

    breakdown = compute_reward(
        record, np.array([0.5, -1.0]), np.array([0.5, -1.0]), cmd, [0.1, 0], [0.1, 0]
    )

    assert breakdown.total == pytest.approx(37.0)
    assert breakdown.torque_guide == 0.0
    assert breakdown.action_rate == 0.0


def test_position_dead_zone(held: tuple[Pose, TaskCommand]) -> None:
    pose, cmd = held
    zeros = np.zeros(2)

    near = record_at(shifted(pose, 0.04), zeros, np.zeros(6))
    far = record_at(shifted(pose, 0.15), zeros, np.zeros(6))

    inside = compute_reward(near, zeros, zeros, cmd, zeros, zeros)
    outside = compute_reward(far, zeros, zeros, cmd, zeros, zeros)

    assert inside.position == pytest.approx(10.0)
    assert outside.position == pytest.approx(10.0 * math.exp(-1.0))


def test_penalties_scale_with_their_terms(held: tuple[Pose, TaskCommand]) -> None:
    pose, cmd = held
    zeros = np.zeros(2)
    accel = np.array([3.0, 0.0, 4.0, 0.0, 10.0, 0.0])
    record = record_at(pose, np.array([3.0, 4.0]), accel)

    breakdown = compute_reward(record, zeros, zeros, cmd, [0.0, 0.0], [0.3, 0.4])

    assert breakdown.torque_guide == pytest.approx(-0.5)
    assert breakdown.torque_guide_exp == pytest.approx(5.0 * math.exp(-5.0))
    assert breakdown.ee_lin_acc == pytest.approx(-0.5)
    assert breakdown.ee_lin_acc_exp == pytest.approx(math.exp(-25.0 / 9.0))
    assert breakdown.ee_ang_acc == pytest.approx(-0.1)
    assert breakdown.action_rate == pytest.approx(-0.05)
    assert breakdown.total == pytest.approx(sum(breakdown.terms.values()))


def test_torque_guide_switch() -> None:
    weights = RewardWeights().without_torque_guide()
    assert weights.torque_guide == 0.0
    assert weights.torque_guide_exp == 0.0
    assert weights.alive == RewardWeights().alive


def test_zero_network_gives_zero_action() -> None:
    policy = GaussianPolicy.initialize(10, 3, make_rng(0), hidden_sizes=(8,))
    for param in policy.net.parameters():
        param[...] = 0.0

    output = policy_forward(policy, np.ones(10), deterministic=True)

    assert np.all(output.action == 0.0)


def test_stochastic_actions_stay_bounded() -> None:
    policy = GaussianPolicy.initialize(
        6, 2, make_rng(1), hidden_sizes=(4,), action_scale=0.3, init_log_std=1.0
    )
    rng = make_rng(2)
    for _ in range(200):
        output = policy_forward(policy, np.ones(6), rng=rng)
        assert np.all(np.abs(output.action) <= 0.3)
    with pytest.raises(ValueError, match="random generator"):
        policy_forward(policy, np.ones(6))
    with pytest.raises(ValueError, match="length"):
        policy_forward(policy, np.ones(5), deterministic=True)


def test_squashed_density_integrates_to_one() -> None:
    scale = 0.5
    a = np.linspace(-scale, scale, 400_001)[1:-1]
    u = np.arctanh(a / scale)
    density = np.exp(squashed_log_prob(u[:, None], [0.3], [-0.5], scale))
    assert trapezoid(density, a) == pytest.approx(1.0, abs=1e-3)


def test_gae_reduces_to_monte_carlo() -> None:
    result = check_gae()
    assert result.passed, result


def test_gae_stops_at_episode_end() -> None:
    advantages, returns = compute_gae(
        [1.0, 2.0], [0.5, 0.5], [0.0, 1.0], last_value=100.0, gamma=0.9, lam=0.95
    )
    assert advantages[1] == pytest.approx(1.5)
    assert returns[1] == pytest.approx(2.0)


def test_surrogate_gradient_branches() -> None:
    gradient = surrogate_gradient([1.5, 1.5, 0.5, 1.0], [1.0, -1.0, 1.0, 2.0], 0.2)
    assert np.allclose(gradient, [0.0, 1.5, -0.5, -2.0])


def test_zero_advantages_leave_the_actor_unchanged() -> None:
    result = check_zero_advantage()
    assert result.passed, result


def test_backpropagation_matches_finite_differences() -> None:
    assert gradient_check() < 1e-4
    assert gradient_check(sizes=(5, 7, 3, 2), seed=4) < 1e-4


def test_mlp_rejects_mismatched_layers() -> None:
    with pytest.raises(ValueError, match="chain"):
        MLP([np.zeros((3, 4)), np.zeros((5, 2))], [np.zeros(4), np.zeros(2)])
    with pytest.raises(ValueError, match="bias"):
        MLP([np.zeros((3, 4))], [np.zeros(3)])


def test_adam_first_step_moves_by_the_learning_rate() -> None:
    param = np.array([1.0, -1.0])
    optimizer = Adam([param], learning_rate=0.1)
    optimizer.step([np.array([2.0, -0.5])])
    assert np.allclose(param, [0.9, -0.9])


def test_observation_history_pads_oldest_frames() -> None:
    window = ObservationHistory(n=2, history=3)
    frame = np.arange(19, dtype=float)
    window.push(frame)

    vector = window.vector()

    assert vector.shape == (observation_size(2, 3),) == (57,)
    assert np.all(vector[:38] == 0.0)
    assert np.array_equal(vector[38:], frame)


def test_observation_from_a_log_tail(two_link: ChainModel) -> None:
    log = rollout(
        two_link, AnalyticController(), sample_profile(3), None, SimConfig(duration=0.1)
    )
    cmd = TaskCommand.hold(log.record(0).ee_pose)
    last_action = np.array([0.1, -0.2])

    vector = assemble_observation(log, cmd, [last_action], history=3)

    assert vector.shape == (observation_size(2, 3),)
    newest = vector[-19:]
    assert np.array_equal(newest[:3], cmd.position)
    assert np.array_equal(newest[7:10], log.A_b[-1, :3])
    assert np.array_equal(newest[10:13], log.V_b[-1, 3:])
    assert np.array_equal(newest[13:15], log.q[-1])
    assert np.array_equal(newest[17:], last_action)
    assert np.all(vector[19 + 17 : 38] == 0.0)
    with pytest.raises(ValueError, match="random generator"):
        assemble_observation(log, cmd, [last_action], 3, noise=(0.1, 0, 0, 0))


def test_checkpoint_round_trip(tmp_path: Path) -> None:
    policy = GaussianPolicy.initialize(12, 2, make_rng(3), hidden_sizes=(5, 4))
    path = tmp_path / "policy.ckpt"

    save_checkpoint(policy, path)
    restored = load_checkpoint(path)

    assert restored.net.sizes == (12, 5, 4, 2)
    assert restored.history == policy.history
    for before, after in zip(policy.parameters(), restored.parameters(), strict=True):
        assert np.array_equal(before, after)


@pytest.mark.parametrize(
    ("old", "new", "message"),
    [
        ("version = 1", "version = 2", "version"),
        ("log_std = -1.0, -1.0", "log_std = 3.0, 3.0", "log_std"),
        ("history = 5", "history = x", "malformed"),
    ],
)
def test_corrupt_checkpoints(old: str, new: str, message: str) -> None:
    policy = GaussianPolicy.initialize(4, 2, make_rng(0), hidden_sizes=(3,))
    text = serialize_policy(policy)
    assert old in text
    with pytest.raises(CheckpointError, match=message):
        parse_policy(text.replace(old, new))


def test_missing_checkpoint(tmp_path: Path) -> None:
    with pytest.raises(CheckpointError, match="cannot read"):
        load_checkpoint(tmp_path / "none.ckpt")


def test_policy_must_fit_the_arm(two_link: ChainModel, four_link: ChainModel) -> None:
    obs = observation_size(two_link.n, 2)
    rng = make_rng(0)
    policy = GaussianPolicy.initialize(obs, 2, rng, hidden_sizes=(4,), history=2)
    controller = PolicyController(policy)
    initial = JointState.at_rest(ready_pose(four_link))
    cmd = TaskCommand.hold(forward_kinematics(four_link, initial.q).ee_pose())
    with pytest.raises(CheckpointError, match="does not fit"):
        controller.reset(four_link, cmd, initial)


def test_short_training_run(tmp_path: Path, two_link: ChainModel) -> None:
    config = PPOConfig(
        iterations=2,
        horizon=5,
        episodes_per_iteration=1,
        hidden_sizes=(4,),
        history=1,
        seed=3,
    )
    setup = TrainingSetup(sim=SimConfig(), ranges=ProfileRanges())
    seen = []

    result = train(two_link, setup, config, on_iteration=seen.append)

    assert [row.iteration for row in result.curve] == [0, 1]
    assert seen == result.curve
    assert all(math.isfinite(row.mean_reward) for row in result.curve)
    path = tmp_path / "curve.csv"
    write_curve_csv(result.curve, path)
    lines = path.read_text(encoding="utf-8").splitlines()
    assert lines[0].split(",") == list(CURVE_COLUMNS)
    assert len(lines) == 3


def guide_curve(values: list[float]) -> list[IterationStats]:
    return [
        IterationStats(
            iteration=i, mean_reward=0.0, mean_ee_lin_acc=0.0, mean_torque_guide=value
        )
        for i, value in enumerate(values)
    ]


def test_torque_guide_trend() -> None:
    rising = guide_curve([0.1 * i for i in range(40)])
    assert torque_guide_trend(rising, window=5) == pytest.approx(0.1)

    noisy_flat = guide_curve([1.0 + (-1.0) ** i * 0.2 for i in range(40)])
    assert abs(torque_guide_trend(noisy_flat, window=2)) < 1e-9

    falling = guide_curve([5.0 - 0.05 * i for i in range(40)])
    assert torque_guide_trend(falling) < 0.0


def test_torque_guide_trend_needs_enough_iterations() -> None:
    with pytest.raises(ValueError, match="too few"):
        torque_guide_trend(guide_curve([1.0] * 10), window=10)


@pytest.mark.slow
def test_training_beats_pd_hold(repo_root: Path, tmp_path: Path) -> None:
    config = load_config(repo_root / "configs" / "example.cfg")

    response = train_logic(config, out=tmp_path, iterations=200)

    summary = response.data
    assert summary.iterations == 200
    assert summary.held_out is not None
    policy_method = "policy:" + str(summary.checkpoint)
    baseline = summary.held_out.row(BASELINE).mean_lin
    trained = summary.held_out.row(policy_method).mean_lin
    assert trained <= 0.75 * baseline
    assert summary.torque_guide_trend is not None
    assert summary.torque_guide_trend >= 0.0
