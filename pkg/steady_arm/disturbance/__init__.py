"""Locomotion-like base disturbances and their fixed-base emulation."""

from steady_arm.disturbance.models import (
    SCENARIOS,
    BaseMotionSample,
    BaseMotionSeries,
    DisturbanceComponent,
    DisturbanceProfile,
    ProfileRanges,
    Wrench,
    scenario_ranges,
)
from steady_arm.disturbance.profile import (
    eval_accel,
    integrate_accel,
    integrate_twist,
    load_profiles,
    parse_profiles,
    sample_profile,
    sample_profiles,
    save_profiles,
    serialize_profiles,
)
from steady_arm.disturbance.wrench import fictitious_wrench, link_wrenches

__all__ = [
    "SCENARIOS",
    "BaseMotionSample",
    "BaseMotionSeries",
    "DisturbanceComponent",
    "DisturbanceProfile",
    "ProfileRanges",
    "Wrench",
    "eval_accel",
    "fictitious_wrench",
    "integrate_accel",
    "integrate_twist",
    "link_wrenches",
    "load_profiles",
    "parse_profiles",
    "sample_profile",
    "sample_profiles",
    "save_profiles",
    "scenario_ranges",
    "serialize_profiles",
]
