"""Command sampling disturbance profiles, and the profile set of an experiment."""

import logging
from pathlib import Path

from pydantic import BaseModel

from steady_arm.config import ExperimentConfig
from steady_arm.disturbance.models import DisturbanceProfile
from steady_arm.disturbance.profile import load_profiles, sample_profiles, save_profiles
from steady_arm.errors import ProfileError
from steady_arm.utils import ResponseWithMessage

logger = logging.getLogger(__name__)

PROFILE_FILE = "profiles.txt"
EXPERIMENT_STREAM = 0
HELD_OUT_STREAM = 1


class ProfileSummary(BaseModel):
    """Where the profiles went."""

    path: Path
    count: int


def experiment_profiles(
    config: ExperimentConfig,
    count: int,
    scenario: str | None = None,
    stream: int = EXPERIMENT_STREAM,
) -> list[DisturbanceProfile]:
    """
    Profiles of an experiment.

    The ``[experiment] profiles`` file wins when set, except for the
    held-out stream, which is always sampled.

    Args:
        config: The experiment.
        count: Profiles to sample when no file is given.
        scenario: Scenario preset; ``[disturbance] scenario`` when omitted.
        stream: Seed stream, so held-out profiles never repeat experiment ones.

    Raises:
        ProfileError: If the file cannot be read or holds no profiles.

    """
    path = config.experiment.profiles
    if path is not None and stream == EXPERIMENT_STREAM:
        profiles = load_profiles(path)
        if not profiles:
            raise ProfileError(f"{path} contains no profiles")
        return profiles
    ranges = config.disturbance.ranges(scenario)
    return sample_profiles(config.seed, count, ranges, stream)


def profile_gen_logic(
    config: ExperimentConfig, out: Path | None = None, count: int | None = None
) -> ResponseWithMessage[ProfileSummary]:
    """
    Sample profiles from the configured ranges and write them.

    Args:
        config: The experiment; its seed and ``[disturbance]`` ranges apply.
        out: Output directory override.
        count: Number of profiles; ``[experiment] n_profiles`` when omitted.

    Raises:
        ValueError: If ``count`` is not positive.
        ProfileError: If the configured ranges are unusable.

    """
    count = config.experiment.n_profiles if count is None else count
    if count < 1:
        raise ValueError(f"profile count must be positive, got {count}")
    try:
        ranges = config.disturbance.ranges()
        profiles = sample_profiles(config.seed, count, ranges)
    except ProfileError as e:
        logger.error(f"Cannot sample profiles: {e}")
        raise
    path = config.out_dir(out) / PROFILE_FILE
    save_profiles(profiles, path)
    return ResponseWithMessage(
        message=f"wrote {count} '{config.disturbance.scenario}' profile(s) to {path}",
        data=ProfileSummary(path=path, count=count),
    )
