import numpy as np
import pytest
from pydantic import ValidationError

from steady_arm.chain.models import ChainModel
from steady_arm.control import (
    AnalyticController,
    Gains,
    PDHoldController,
    SensorFrame,
    TaskCommand,
    base_induced_accel,
    clip_torque,
    ideal_controller,
    pd_torque,
    pose_error,
    ready_pose,
    solve_ik,
    task_torque,
)
from steady_arm.disturbance import BaseMotionSample, link_wrenches
from steady_arm.dynamics import (
    JointState,
    compute_dynamics,
    forward_kinematics,
    gravity_torque,
)
from steady_arm.dynamics.rigid_body import LINEAR_ROWS
from steady_arm.eval.oracles import check_compensation


def spinning(omega_z: float = 1.0) -> BaseMotionSample:
    return BaseMotionSample(V_b=np.array([0, 0, 0, 0, 0, omega_z]), A_b=np.zeros(6))


def hold_command(model: ChainModel) -> TaskCommand:
    return TaskCommand.hold(forward_kinematics(model, ready_pose(model)).ee_pose())


def test_linear_base_acceleration_passes_through() -> None:
    motion = BaseMotionSample(V_b=np.zeros(6), A_b=np.array([1.0, -2, 3, 0, 0, 0]))
    accel = base_induced_accel([0.3, 0.2, 0.1], [0.5, 0.0, 0.0], motion)
    assert np.allclose(accel, [1.0, -2.0, 3.0, 0.0, 0.0, 0.0])


def test_centripetal_and_coriolis_terms() -> None:
    accel = base_induced_accel([1.0, 0.0, 0.0], [0.0, 0.0, 0.0], spinning())
    assert np.allclose(accel[:3], [-1.0, 0.0, 0.0])
    accel = base_induced_accel([0.0, 0.0, 0.0], [1.0, 0.0, 0.0], spinning())
    assert np.allclose(accel[:3], [0.0, 2.0, 0.0])


def test_compensation_cancels_base_motion(four_link: ChainModel) -> None:
    result = check_compensation(four_link, samples=5)
    assert result.passed, result


def test_pose_error_parts(two_link: ChainModel) -> None:
    current = forward_kinematics(two_link, [0.2, 0.3]).ee_pose()
    desired = forward_kinematics(two_link, [0.4, 0.3]).ee_pose()

    assert np.allclose(pose_error(current, current), 0.0)
    error = pose_error(current, desired)
    assert np.allclose(error[:3], desired.position - current.position)
    assert np.allclose(error[3:], [0.0, 0.0, 0.2])


def test_task_torque_at_target_is_gravity_hold(four_link: ChainModel) -> None:
    state = JointState.at_rest(ready_pose(four_link))
    torque = task_torque(four_link, state, hold_command(four_link), Gains())
    assert np.allclose(torque, gravity_torque(four_link, state.q), atol=1e-6)


def test_pd_torque() -> None:
    gains = Gains(Kp=10.0, Kd=2.0)
    state = JointState(q=np.array([0.1, -0.2]), qdot=np.array([1.0, 0.5]))
    torque = pd_torque(gains, [0.0, 0.0], state)
    assert np.allclose(torque, [-1.0 - 2.0, 2.0 - 1.0])


def test_clip_torque_reports_saturation(two_link: ChainModel) -> None:
    clipped, saturated = clip_torque(two_link, np.array([250.0, -10.0]))
    assert saturated
    assert np.allclose(clipped, [200.0, -10.0])
    _, saturated = clip_torque(two_link, np.array([5.0, -10.0]))
    assert not saturated


def test_task_only_has_no_compensation(four_link: ChainModel) -> None:
    state = JointState(q=ready_pose(four_link), qdot=np.full(4, 0.2))
    motion = BaseMotionSample(V_b=np.full(6, 0.1), A_b=np.full(6, 2.0))
    wrenches = link_wrenches(four_link, state, motion)
    cmd = hold_command(four_link)

    full = ideal_controller(four_link, state, motion, wrenches, cmd, Gains())
    ablated = ideal_controller(
        four_link, state, motion, wrenches, cmd, Gains(), use_compensation=False
    )

    assert np.any(full.tau_comp != 0.0)
    assert np.all(ablated.tau_comp == 0.0)
    assert np.allclose(ablated.tau_task, full.tau_task)
    assert np.allclose(full.torque, full.tau_comp + full.tau_task)


def test_ready_pose_is_inside_limits(arm: ChainModel) -> None:
    q = ready_pose(arm)
    assert q.shape == (arm.n,)
    assert np.all(q > arm.arrays.lower_limits)
    assert np.all(q < arm.arrays.upper_limits)


def test_inverse_kinematics_reaches_position(four_link: ChainModel) -> None:
    target_q = ready_pose(four_link) + np.array([0.2, -0.1, 0.15, 0.1])
    target = forward_kinematics(four_link, target_q).ee_pose()

    q = solve_ik(four_link, target, ready_pose(four_link), LINEAR_ROWS)

    reached = forward_kinematics(four_link, q).ee_position
    assert np.allclose(reached, target.position, atol=1e-6)


def test_pd_hold_feeds_gravity_forward(four_link: ChainModel) -> None:
    controller = PDHoldController()
    initial = JointState.at_rest(ready_pose(four_link))
    controller.reset(four_link, hold_command(four_link), initial)

    sensed = SensorFrame(t=0.0, state=initial, motion=BaseMotionSample.zero())
    command = controller.torque(sensed)

    assert np.allclose(
        command.torque, gravity_torque(four_link, initial.q), atol=1e-4
    )


def test_controllers_require_reset(two_link: ChainModel) -> None:
    sensed = SensorFrame(
        t=0.0, state=JointState.at_rest([0.0, 0.0]), motion=BaseMotionSample.zero()
    )
    with pytest.raises(RuntimeError, match="reset"):
        AnalyticController().torque(sensed)
    with pytest.raises(RuntimeError, match="reset"):
        PDHoldController().torque(sensed)


def test_analytic_controller_names() -> None:
    assert AnalyticController().name == "ideal"
    assert AnalyticController(use_compensation=False).name == "task_only"


def test_task_rows_follow_dof(four_link: ChainModel) -> None:
    state = JointState.at_rest(ready_pose(four_link))
    assert compute_dynamics(four_link, state).rows == LINEAR_ROWS


def test_command_validation() -> None:
    with pytest.raises(ValidationError, match="unit quaternion"):
        TaskCommand(position=(0.0, 0.0, 0.0), orientation=(1.0, 1.0, 0.0, 0.0))
    with pytest.raises(ValidationError, match="non-negative"):
        Gains(Kbar_p=(-1.0, 0.0, 0.0, 0.0, 0.0, 0.0))
