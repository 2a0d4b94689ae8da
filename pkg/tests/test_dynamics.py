import numpy as np
import pytest

from steady_arm.chain.models import ChainModel
from steady_arm.dynamics import (
    JointState,
    bias_forces,
    compute_dynamics,
    forward_dynamics,
    gravity_torque,
    inverse_dynamics,
    kinetic_energy,
    mass_matrix,
    operational_space_inertia,
)
from steady_arm.dynamics.rigid_body import LINEAR_ROWS
from steady_arm.eval.oracles import (
    check_energy_drift,
    check_kinetic_energy,
    check_mass_matrix,
)


def test_pendulum_inertia_about_joint(pendulum: ChainModel) -> None:
    assert np.allclose(mass_matrix(pendulum, [0.4]), [[1.0 / 3.0]])


@pytest.mark.parametrize("q2", [0.0, 0.5, -1.3, 2.0])
def test_two_link_mass_matrix_closed_form(two_link: ChainModel, q2: float) -> None:
    expected = np.array(
        [
            [5.0 / 3.0 + np.cos(q2), 1.0 / 3.0 + 0.5 * np.cos(q2)],
            [1.0 / 3.0 + 0.5 * np.cos(q2), 1.0 / 3.0],
        ]
    )
    assert np.allclose(mass_matrix(two_link, [0.7, q2]), expected)


def test_mass_matrix_is_symmetric_positive_definite(arm: ChainModel) -> None:
    matrix = mass_matrix(arm, np.linspace(-1.0, 1.0, arm.n))
    assert np.allclose(matrix, matrix.T)
    assert np.all(np.linalg.eigvalsh(matrix) > 0.0)


def test_mass_matrix_matches_newton_euler(arm: ChainModel) -> None:
    result = check_mass_matrix(arm, samples=20)
    assert result.passed, result


def test_kinetic_energy_matches_quadratic_form(arm: ChainModel) -> None:
    result = check_kinetic_energy(arm, samples=20)
    assert result.passed, result


def test_pendulum_gravity_torque(pendulum: ChainModel) -> None:
    # Positive q lowers the link; q = 0 is horizontal.
    for q in (0.0, 0.6, -1.2):
        held = gravity_torque(pendulum, [q])
        assert np.allclose(held, [-0.5 * 9.81 * np.cos(q)])


def test_horizontal_pendulum_holding_torque(pendulum: ChainModel) -> None:
    assert abs(gravity_torque(pendulum, [0.0])[0]) == pytest.approx(1.0 * 9.81 * 0.5)
    assert gravity_torque(pendulum, [np.pi / 2.0]) == pytest.approx([0.0], abs=1e-12)


def test_planar_arm_feels_no_default_gravity(two_link: ChainModel) -> None:
    assert np.allclose(gravity_torque(two_link, [0.3, -0.8]), 0.0)


def test_forward_inverse_dynamics_agree(four_link: ChainModel) -> None:
    q = np.array([0.2, -0.5, 0.9, 0.1])
    state = JointState(q=q, qdot=np.array([1.0, -2.0, 0.5, 0.0]))
    torque = np.array([3.0, -1.0, 0.5, 2.0])
    wrenches = np.zeros((4, 6))
    wrenches[2] = [0.0, 1.5, -2.0, 0.1, 0.0, 0.3]

    qddot = forward_dynamics(four_link, state, torque, wrenches)
    recovered = inverse_dynamics(four_link, state.q, state.qdot, qddot, wrenches)

    assert np.allclose(recovered, torque)


def test_bias_forces_hold_the_arm(four_link: ChainModel) -> None:
    q = np.array([0.4, -0.3, 0.8, -0.2])
    rest = JointState.at_rest(q)
    assert np.allclose(bias_forces(four_link, rest), gravity_torque(four_link, q))

    moving = JointState(q=q, qdot=np.array([1.0, -0.5, 0.25, 2.0]))
    held = forward_dynamics(four_link, moving, bias_forces(four_link, moving))
    assert np.allclose(held, 0.0, atol=1e-9)


def test_wrench_shape_is_checked(two_link: ChainModel) -> None:
    with pytest.raises(ValueError, match="shape"):
        forward_dynamics(
            two_link, JointState.at_rest([0.0, 0.0]), [0.0, 0.0], np.zeros((3, 6))
        )


def test_kinetic_energy_of_spinning_pendulum(pendulum: ChainModel) -> None:
    state = JointState(q=np.array([0.3]), qdot=np.array([2.0]))
    assert kinetic_energy(pendulum, state) == pytest.approx(0.5 * (1.0 / 3.0) * 4.0)


def test_energy_is_conserved_by_the_integrator() -> None:
    result = check_energy_drift(duration=0.5)
    assert result.passed, result


def test_operational_inertia_is_finite_at_singularity(two_link: ChainModel) -> None:
    inertia = operational_space_inertia(two_link, [0.0, 0.0], rows=LINEAR_ROWS)
    assert inertia.shape == (3, 3)
    assert np.all(np.isfinite(inertia))
    assert np.allclose(inertia, inertia.T)


def test_compute_dynamics_uses_linear_rows_for_short_arms(
    four_link: ChainModel,
) -> None:
    state = JointState(q=np.array([0.1, 0.4, -0.3, 0.8]), qdot=np.zeros(4))
    quantities = compute_dynamics(four_link, state)

    assert quantities.rows == LINEAR_ROWS
    assert quantities.Lambda.shape == (3, 3)
    assert quantities.J.shape == (6, 4)
    assert np.allclose(quantities.gravity_torque, gravity_torque(four_link, state.q))
    assert np.allclose(quantities.solve(quantities.M @ np.ones(4)), np.ones(4))
