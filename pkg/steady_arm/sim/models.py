"""Simulation configuration and rollout logs."""

from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from steady_arm.constants import get_constants
from steady_arm.disturbance.models import BaseMotionSample
from steady_arm.dynamics.kinematics import JointState, Pose
from steady_arm.utils import FloatArray

Vec3 = tuple[float, float, float]

_constants = get_constants()
_RATE_RULE = "rates must satisfy dt_physics <= 1/pd_rate <= 1/control_rate"
_RATE_TOLERANCE = 1e-9


class SimConfig(BaseModel):
    """
    Rates, horizon and plant options of a rollout.

    Observation noise is zero-mean Gaussian with one standard deviation per
    sensor channel and only reaches the controller.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    dt_physics: float = Field(default=_constants.DT_PHYSICS, gt=0)
    control_rate: float = Field(default=_constants.CONTROL_RATE, gt=0)
    pd_rate: float = Field(default=_constants.PD_RATE, gt=0)
    duration: float = Field(default=2.0, ge=0)
    gravity: Vec3 = _constants.GRAVITY
    noise_q: float = Field(default=0.0, ge=0, description="Joint angle noise (rad)")
    noise_qdot: float = Field(default=0.0, ge=0, description="Joint rate noise (rad/s)")
    noise_accel: float = Field(default=0.0, ge=0, description="IMU accel noise")
    noise_gyro: float = Field(default=0.0, ge=0, description="IMU gyro noise")
    joint_friction: float = Field(
        default=0.0, ge=0, description="Viscous friction unknown to the controller"
    )
    torque_limits_on: bool = True
    initial_q: tuple[float, ...] | None = None
    seed: int = 0

    @model_validator(mode="after")
    def _check_rates(self) -> "SimConfig":
        pd_period = 1.0 / self.pd_rate
        control_period = 1.0 / self.control_rate
        slack = _RATE_TOLERANCE * control_period
        if not self.dt_physics <= pd_period + slack <= control_period + 2 * slack:
            raise ValueError(_RATE_RULE)
        return self

    @property
    def obs_noise_std(self) -> tuple[float, float, float, float]:
        """Per-channel noise: joint position, joint velocity, accelerometer, gyro."""
        return (self.noise_q, self.noise_qdot, self.noise_accel, self.noise_gyro)

    @property
    def steps(self) -> int:
        """Number of physics steps."""
        return round(self.duration / self.dt_physics)

    @property
    def pd_every(self) -> int:
        """Physics steps per PD tick."""
        return max(1, round(1.0 / (self.pd_rate * self.dt_physics)))

    @property
    def control_every(self) -> int:
        """Physics steps per control tick."""
        return max(1, round(1.0 / (self.control_rate * self.dt_physics)))


@dataclass(frozen=True)
class RolloutRecord:
    """One logged instant of a rollout."""

    t: float
    state: JointState
    tau: FloatArray
    ee_pose: Pose
    a_ee_loc: FloatArray
    a_ee_base: FloatArray
    a_ee_glob: FloatArray
    motion: BaseMotionSample


@dataclass(frozen=True)
class RolloutLog:
    """
    Column-major rollout log on a uniform time grid.

    ``a_ee_glob == a_ee_base + a_ee_loc`` holds for every row.
    """

    t: FloatArray
    q: FloatArray
    qdot: FloatArray
    tau: FloatArray
    ee_position: FloatArray
    ee_orientation: FloatArray
    a_ee_loc: FloatArray
    a_ee_base: FloatArray
    a_ee_glob: FloatArray
    V_b: FloatArray
    A_b: FloatArray

    def __len__(self) -> int:
        """Number of records."""
        return self.t.shape[0]

    @property
    def n(self) -> int:
        """Joint count."""
        return self.q.shape[1]

    def record(self, index: int) -> RolloutRecord:
        """Row ``index`` as a record."""
        return RolloutRecord(
            t=float(self.t[index]),
            state=JointState(q=self.q[index], qdot=self.qdot[index]),
            tau=self.tau[index],
            ee_pose=Pose(
                position=self.ee_position[index], orientation=self.ee_orientation[index]
            ),
            a_ee_loc=self.a_ee_loc[index],
            a_ee_base=self.a_ee_base[index],
            a_ee_glob=self.a_ee_glob[index],
            motion=BaseMotionSample(V_b=self.V_b[index], A_b=self.A_b[index]),
        )

    def tail(self, start: int) -> "RolloutLog":
        """Rows from ``start`` on."""
        return RolloutLog(
            **{name: getattr(self, name)[start:] for name in LOG_FIELDS}
        )

    @classmethod
    def from_records(cls, records: list[RolloutRecord]) -> "RolloutLog":
        """Stack records into columns."""
        return cls(
            t=np.array([record.t for record in records]),
            q=np.array([record.state.q for record in records]),
            qdot=np.array([record.state.qdot for record in records]),
            tau=np.array([record.tau for record in records]),
            ee_position=np.array([record.ee_pose.position for record in records]),
            ee_orientation=np.array([record.ee_pose.orientation for record in records]),
            a_ee_loc=np.array([record.a_ee_loc for record in records]),
            a_ee_base=np.array([record.a_ee_base for record in records]),
            a_ee_glob=np.array([record.a_ee_glob for record in records]),
            V_b=np.array([record.motion.V_b for record in records]),
            A_b=np.array([record.motion.A_b for record in records]),
        )


LOG_FIELDS = (
    "t",
    "q",
    "qdot",
    "tau",
    "ee_position",
    "ee_orientation",
    "a_ee_loc",
    "a_ee_base",
    "a_ee_glob",
    "V_b",
    "A_b",
)
