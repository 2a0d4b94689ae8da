"""Fixed-base rollouts, the floating-base oracle and rollout logs."""

from steady_arm.sim.engine import (
    FixedBasePlant,
    FloatingBasePlant,
    MotionSource,
    ProfileMotion,
    TrajectoryMotion,
    floating_base_oracle,
    global_ee_accel,
    hold_command,
    initial_state,
    rollout,
    step,
)
from steady_arm.sim.io import read_log_csv, write_log_csv
from steady_arm.sim.models import RolloutLog, RolloutRecord, SimConfig
from steady_arm.sim.trajectory import (
    BaseKinematics,
    BaseTrajectory,
    SinusoidalTrajectory,
    StaticTrajectory,
)

__all__ = [
    "BaseKinematics",
    "BaseTrajectory",
    "FixedBasePlant",
    "FloatingBasePlant",
    "MotionSource",
    "ProfileMotion",
    "RolloutLog",
    "RolloutRecord",
    "SimConfig",
    "SinusoidalTrajectory",
    "StaticTrajectory",
    "TrajectoryMotion",
    "floating_base_oracle",
    "global_ee_accel",
    "hold_command",
    "initial_state",
    "read_log_csv",
    "rollout",
    "step",
    "write_log_csv",
]
