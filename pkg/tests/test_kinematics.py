import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from steady_arm.chain.models import ChainModel
from steady_arm.dynamics import (
    END_EFFECTOR,
    JointState,
    body_twist,
    forward_kinematics,
    jacobian,
    jacobian_dot_qdot,
)
from steady_arm.eval.oracles import check_jacobian, finite_difference_jacobian


def test_two_link_end_effector_positions(two_link: ChainModel) -> None:
    assert np.allclose(forward_kinematics(two_link, [0.0, 0.0]).ee_position, [2, 0, 0])
    straight_up = forward_kinematics(two_link, [np.pi / 2, 0.0])
    assert np.allclose(straight_up.ee_position, [0.0, 2.0, 0.0])
    folded = forward_kinematics(two_link, [0.0, np.pi / 2])
    assert np.allclose(folded.ee_position, [1.0, 1.0, 0.0])


def test_end_effector_orientation_is_unit_quaternion(arm: ChainModel) -> None:
    q = np.linspace(-0.7, 0.9, arm.n)
    frames = forward_kinematics(arm, q)
    pose = frames.ee_pose()
    assert pose.orientation.shape == (4,)
    assert np.linalg.norm(pose.orientation) == pytest.approx(1.0)
    assert np.allclose(pose.rotation().as_matrix(), frames.ee_rotation)


def test_planar_orientation_is_sum_of_angles(two_link: ChainModel) -> None:
    pose = forward_kinematics(two_link, [0.3, 0.4]).ee_pose()
    expected = Rotation.from_euler("z", 0.7).as_quat(scalar_first=True)
    assert np.allclose(pose.orientation, expected) or np.allclose(
        pose.orientation, -expected
    )


def test_two_link_jacobian_at_zero(two_link: ChainModel) -> None:
    columns = jacobian(two_link, [0.0, 0.0])
    assert columns.shape == (6, 2)
    assert np.allclose(columns[:, 0], [0, 2, 0, 0, 0, 1])
    assert np.allclose(columns[:, 1], [0, 1, 0, 0, 0, 1])


def test_link_jacobian_is_zero_beyond_its_link(four_link: ChainModel) -> None:
    columns = jacobian(four_link, np.full(4, 0.2), body=1)
    assert np.all(columns[:, 2:] == 0.0)
    assert np.any(columns[:, :2] != 0.0)


def test_bad_body_selectors(two_link: ChainModel) -> None:
    with pytest.raises(ValueError, match="outside"):
        jacobian(two_link, [0.0, 0.0], body=2)
    with pytest.raises(ValueError, match="unknown body"):
        jacobian(two_link, [0.0, 0.0], body="tool")  # type: ignore[arg-type]


def test_wrong_q_length_is_rejected(two_link: ChainModel) -> None:
    with pytest.raises(ValueError):
        forward_kinematics(two_link, [0.0, 0.0, 0.0])


def test_jacobian_matches_finite_differences(arm: ChainModel) -> None:
    q = np.linspace(-0.8, 1.1, arm.n)
    numeric = finite_difference_jacobian(arm, q, 1e-6)
    assert np.allclose(jacobian(arm, q), numeric, atol=1e-6)


def test_jacobian_check_over_random_configurations(arm: ChainModel) -> None:
    result = check_jacobian(arm, samples=50)
    assert result.passed, result


def test_twist_is_jacobian_times_velocity(four_link: ChainModel) -> None:
    q = np.array([0.1, -0.4, 0.7, 0.2])
    state = JointState(q=q, qdot=np.array([1.0, 0.0, -1.0, 2.0]))
    twist = body_twist(four_link, state, END_EFFECTOR)
    assert np.allclose(twist, jacobian(four_link, state.q) @ state.qdot)


def test_velocity_product_matches_jacobian_derivative(four_link: ChainModel) -> None:
    q = np.array([0.3, -0.2, 0.5, 0.9])
    qdot = np.array([0.7, -1.1, 0.4, 0.8])
    h = 1e-6
    derivative = (
        jacobian(four_link, q + h * qdot) - jacobian(four_link, q - h * qdot)
    ) / (2 * h)
    expected = derivative @ qdot
    actual = jacobian_dot_qdot(four_link, JointState(q=q, qdot=qdot))
    assert np.allclose(actual, expected, atol=1e-6)


def test_pendulum_centripetal_acceleration(pendulum: ChainModel) -> None:
    state = JointState(q=np.array([0.0]), qdot=np.array([2.0]))
    acceleration = jacobian_dot_qdot(pendulum, state)
    assert np.allclose(acceleration, [-4.0, 0.0, 0.0, 0.0, 0.0, 0.0])
