import numpy as np
import pytest

from steady_arm.chain.models import ChainModel
from steady_arm.control.controllers import AnalyticController
from steady_arm.control.models import Gains
from steady_arm.disturbance.profile import sample_profile
from steady_arm.eval.oracles import (
    CheckResult,
    VerifyReport,
    check_closed_loop_cancellation,
    check_gradients,
    check_profile_statistics,
    run_checks,
    tracking_residual,
)
from steady_arm.sim.engine import hold_command, initial_state, rollout
from steady_arm.sim.models import SimConfig


def test_profile_statistics() -> None:
    result = check_profile_statistics(samples=2000)
    assert result.passed, result


def test_gradient_check() -> None:
    assert check_gradients().passed


def test_report_fails_with_any_check() -> None:
    passing = CheckResult(name="a", value=0.0, tolerance=1.0, passed=True)
    failing = CheckResult(name="b", value=2.0, tolerance=1.0, passed=False)
    assert VerifyReport(checks=[passing]).passed
    assert not VerifyReport(checks=[passing, failing]).passed


def test_compensation_leaves_only_feedback(four_link: ChainModel) -> None:
    config = SimConfig(duration=0.3, torque_limits_on=False)
    cmd = hold_command(four_link, initial_state(four_link, config))
    profile = sample_profile(5)
    residual = {}
    for compensate in (True, False):
        controller = AnalyticController(use_compensation=compensate)
        log = rollout(four_link, controller, profile, cmd, config)
        errors = tracking_residual(four_link, log, cmd, Gains(), warmup=0.0)
        residual[compensate] = float(np.mean(np.linalg.norm(errors, axis=1)))
    assert residual[True] < 0.1 * residual[False]


def test_closed_loop_check_needs_three_joints(two_link: ChainModel) -> None:
    with pytest.raises(ValueError, match="n >= 3"):
        check_closed_loop_cancellation(two_link, profiles=1)


@pytest.mark.slow
def test_closed_loop_cancellation(four_link: ChainModel) -> None:
    result = check_closed_loop_cancellation(four_link, profiles=50)
    assert result.passed, result


@pytest.mark.slow
def test_quick_self_checks() -> None:
    report = run_checks(quick=True)
    assert report.passed, [check for check in report.checks if not check.passed]

