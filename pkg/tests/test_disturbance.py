import math
from pathlib import Path

import numpy as np
import pytest

from steady_arm.chain.models import ChainModel
from steady_arm.constants import get_constants
from steady_arm.disturbance import (
    BaseMotionSample,
    DisturbanceComponent,
    DisturbanceProfile,
    ProfileRanges,
    eval_accel,
    fictitious_wrench,
    integrate_twist,
    link_wrenches,
    load_profiles,
    parse_profiles,
    sample_profile,
    sample_profiles,
    save_profiles,
    scenario_ranges,
    serialize_profiles,
)
from steady_arm.dynamics import JointState
from steady_arm.errors import ProfileError

ZERO6 = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)


def single(
    impulse: tuple[float, ...] = ZERO6,
    sway: tuple[float, ...] = ZERO6,
    period: float = 1.0,
    phase: float = 0.0,
) -> DisturbanceProfile:
    component = DisturbanceComponent(
        period=period, impulse=impulse, sway=sway, phase=phase
    )
    return DisturbanceProfile(components=(component,))


def test_same_seed_same_profile() -> None:
    assert sample_profile(42) == sample_profile(42)
    assert sample_profile(42) != sample_profile(43)


def test_samples_respect_default_ranges() -> None:
    constants = get_constants()
    for seed in range(50):
        profile = sample_profile(seed)
        assert profile.seed == seed
        assert len(profile.components) == constants.N_COMPONENTS
        for component in profile.components:
            low, high = constants.PERIOD_RANGE
            assert low <= component.period <= high
            assert all(abs(value) <= 100.0 for value in component.impulse)
            assert all(abs(value) <= 10.0 for value in component.sway)
            assert -math.pi <= component.phase <= math.pi


def test_planar_scenario_keeps_motion_in_plane() -> None:
    profile = sample_profile(3, scenario_ranges("planar"))
    for component in profile.components:
        assert component.impulse[2:5] == (0.0, 0.0, 0.0)
        assert component.sway[2:5] == (0.0, 0.0, 0.0)


def test_unknown_scenario() -> None:
    with pytest.raises(KeyError, match="unknown scenario"):
        scenario_ranges("swimming")


def test_inverted_range_is_rejected() -> None:
    with pytest.raises(ProfileError, match="lo < hi"):
        sample_profile(0, ProfileRanges(period=(1.0, 0.5)))


def test_quiet_profile_is_zero() -> None:
    accel = eval_accel(DisturbanceProfile.quiet(), np.linspace(0.0, 3.0, 301))
    assert accel.shape == (301, 6)
    assert np.all(accel == 0.0)


def test_scalar_time_gives_one_vector() -> None:
    assert eval_accel(sample_profile(1), 0.25).shape == (6,)


def test_impulses_peak_on_gait_period() -> None:
    impulse = (1.0, -2.0, 0.5, 0.0, 0.0, 3.0)
    profile = single(impulse=impulse, period=0.8)
    assert np.allclose(eval_accel(profile, 0.0), impulse)
    assert np.allclose(eval_accel(profile, 1.6), impulse)
    assert np.allclose(eval_accel(profile, 0.4), 0.0, atol=1e-12)


def test_sway_is_sinusoidal() -> None:
    sway = (0.0, 2.0, 0.0, 0.0, 0.0, 0.0)
    profile = single(sway=sway, period=1.0, phase=0.3)
    t = np.linspace(0.0, 2.0, 41)
    expected = np.outer(np.sin(2 * np.pi * t + 0.3), sway)
    assert np.allclose(eval_accel(profile, t), expected)


def test_twist_integrates_acceleration_from_rest() -> None:
    profile = single(sway=(1.0, 0.0, 0.0, 0.0, 0.0, 0.0), period=1.0, phase=0.5)
    t = np.arange(2001) * 1e-3
    series = integrate_twist(profile, t)

    expected = (np.cos(0.5) - np.cos(2 * np.pi * t + 0.5)) / (2 * np.pi)
    assert len(series) == 2001
    assert np.all(series.V_b[0] == 0.0)
    assert np.allclose(series.V_b[:, 0], expected, atol=1e-5)
    assert np.allclose(series[10].A_b, series.A_b[10])


def test_non_uniform_grid_is_rejected() -> None:
    with pytest.raises(ProfileError, match="uniform"):
        integrate_twist(sample_profile(0), [0.0, 0.1, 0.3])


def test_profile_sets_extend_without_reshuffling() -> None:
    short = sample_profiles(7, 3)
    longer = sample_profiles(7, 6)
    assert longer[:3] == short


def test_streams_are_independent() -> None:
    experiment = sample_profiles(7, 5, stream=0)
    held_out = sample_profiles(7, 5, stream=1)
    assert {p.seed for p in experiment}.isdisjoint({p.seed for p in held_out})


def test_profile_text_round_trip() -> None:
    profiles = sample_profiles(11, 4, scenario_ranges("forward"))
    assert parse_profiles(serialize_profiles(profiles)) == profiles


def test_profile_file_round_trip(tmp_path: Path) -> None:
    profiles = sample_profiles(5, 2)
    path = tmp_path / "nested" / "profiles.txt"

    save_profiles(profiles, path)

    assert load_profiles(path) == profiles


def test_missing_profile_file(tmp_path: Path) -> None:
    with pytest.raises(ProfileError, match="cannot read"):
        load_profiles(tmp_path / "absent.txt")


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("seed = 1\n", "outside"),
        ("[gait]\nseed = 1\n", "unknown section"),
        ("[profile]\nseed = 1\ncolour = red\n", "unknown key"),
        ("[profile]\nseed = 1\ncomponent = 1, 2, 3\n", "invalid profile"),
        ("[profile]\nseed = 1\n", "invalid profile"),
    ],
)
def test_malformed_profile_text(text: str, message: str) -> None:
    with pytest.raises(ProfileError, match=message):
        parse_profiles(text)


def test_linear_base_acceleration_wrench() -> None:
    motion = BaseMotionSample(V_b=np.zeros(6), A_b=np.array([1.0, 2.0, 3, 0, 0, 0]))
    wrench = fictitious_wrench(2.0, np.eye(3), [0.5, 0.0, 0.0], np.zeros(3), motion)
    assert np.allclose(wrench.force, [-2.0, -4.0, -6.0])
    assert np.allclose(wrench.torque, 0.0)


def test_coriolis_force_on_moving_link() -> None:
    motion = BaseMotionSample(V_b=np.array([0, 0, 0, 0, 0, 1.0]), A_b=np.zeros(6))
    wrench = fictitious_wrench(
        1.0, np.zeros((3, 3)), np.zeros(3), [1.0, 0.0, 0.0], motion
    )
    assert np.allclose(wrench.force, [0.0, -2.0, 0.0])


def test_wrench_of_a_base_at_rest_is_zero(four_link: ChainModel) -> None:
    state = JointState(q=np.full(4, 0.3), qdot=np.ones(4))
    wrenches = link_wrenches(four_link, state, BaseMotionSample.zero())
    assert wrenches.shape == (4, 6)
    assert np.allclose(wrenches, 0.0)


def test_link_wrenches_scale_with_mass(four_link: ChainModel) -> None:
    accel = np.array([0.0, 0.0, 4.0, 0.0, 0.0, 0.0])
    motion = BaseMotionSample(V_b=np.zeros(6), A_b=accel)
    wrenches = link_wrenches(four_link, JointState.at_rest(np.zeros(4)), motion)
    assert np.allclose(wrenches[:, :3], [[0.0, 0.0, -4.0]] * 4)
    assert np.allclose(wrenches[:, 3:], 0.0)
