"""Models for locomotion-like base disturbances."""

import math
from dataclasses import dataclass

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from steady_arm.constants import get_constants
from steady_arm.utils import FloatArray

Vec6 = tuple[float, float, float, float, float, float]

_constants = get_constants()
_UNIT_AXES: Vec6 = (1.0, 1.0, 1.0, 1.0, 1.0, 1.0)


class DisturbanceComponent(BaseModel):
    """One gait harmonic: an impulse train plus a sinusoidal sway."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    period: float = Field(..., gt=0, description="Gait period T (s)")
    impulse: Vec6 = Field(..., description="Foot-strike impulse amplitude p")
    sway: Vec6 = Field(..., description="Centre-of-mass sway amplitude s")
    phase: float = Field(..., description="Sway phase (rad)")


class DisturbanceProfile(BaseModel):
    """Parameters of a base spatial-acceleration signal."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    components: tuple[DisturbanceComponent, ...] = Field(..., min_length=1)
    impulse_std: float = Field(
        default=_constants.IMPULSE_STD, gt=0, description="Impulse width (s)"
    )
    seed: int = 0

    @classmethod
    def quiet(cls, seed: int = 0) -> "DisturbanceProfile":
        """A profile whose acceleration is identically zero."""
        zero: Vec6 = (0.0, 0.0, 0.0, 0.0, 0.0, 0.0)
        component = DisturbanceComponent(period=1.0, impulse=zero, sway=zero, phase=0.0)
        return cls(components=(component,), seed=seed)


class ProfileRanges(BaseModel):
    """
    Sampling ranges for ``sample_profile``.

    ``axis_scale`` multiplies the sampled impulse and sway amplitudes per
    axis; it shapes a scenario without changing the sampled distribution of
    periods and phases.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    period: tuple[float, float] = _constants.PERIOD_RANGE
    impulse: tuple[float, float] = _constants.IMPULSE_RANGE
    sway: tuple[float, float] = _constants.SWAY_RANGE
    phase: tuple[float, float] = (-math.pi, math.pi)
    n_components: int = _constants.N_COMPONENTS
    impulse_std: float = _constants.IMPULSE_STD
    axis_scale: Vec6 = _UNIT_AXES

    def problems(self) -> list[str]:
        """Human-readable range problems; empty when usable."""
        found: list[str] = []
        for name in ("period", "impulse", "sway", "phase"):
            low, high = getattr(self, name)
            if not low < high:
                found.append(f"{name} range must satisfy lo < hi, got ({low}, {high})")
        if self.period[0] <= 0:
            found.append("period range must be positive")
        if self.n_components < 1:
            found.append("n_components must be at least 1")
        if self.impulse_std <= 0:
            found.append("impulse_std must be positive")
        if any(scale < 0 for scale in self.axis_scale):
            found.append("axis_scale must be non-negative")
        return found


SCENARIOS: dict[str, Vec6] = {
    "default": _UNIT_AXES,
    "stepping": (0.3, 0.3, 1.0, 0.1, 0.1, 0.1),
    "forward": (1.0, 0.3, 0.6, 0.1, 0.2, 0.1),
    "lateral": (0.3, 1.0, 0.6, 0.2, 0.1, 0.1),
    "rotational": (0.3, 0.3, 0.5, 0.1, 0.1, 0.5),
    "planar": (1.0, 1.0, 0.0, 0.0, 0.0, 0.1),
}


def scenario_ranges(name: str, **overrides: object) -> ProfileRanges:
    """
    Sampling ranges for a named locomotion scenario.

    Raises:
        KeyError: For an unknown scenario name.

    """
    if name not in SCENARIOS:
        raise KeyError(
            f"unknown scenario '{name}'; expected one of {sorted(SCENARIOS)}"
        )
    return ProfileRanges.model_validate({"axis_scale": SCENARIOS[name], **overrides})


@dataclass(frozen=True)
class BaseMotionSample:
    """Base twist ``[v_b; omega_b]`` and acceleration ``[vdot_b; omegadot_b]``."""

    V_b: FloatArray
    A_b: FloatArray

    @classmethod
    def zero(cls) -> "BaseMotionSample":
        """A base at rest."""
        return cls(V_b=np.zeros(6), A_b=np.zeros(6))

    @property
    def v_b(self) -> FloatArray:
        """Linear base velocity."""
        return self.V_b[:3]

    @property
    def omega_b(self) -> FloatArray:
        """Angular base velocity."""
        return self.V_b[3:]

    @property
    def vdot_b(self) -> FloatArray:
        """Linear base acceleration."""
        return self.A_b[:3]

    @property
    def omegadot_b(self) -> FloatArray:
        """Angular base acceleration."""
        return self.A_b[3:]


@dataclass(frozen=True)
class BaseMotionSeries:
    """Base motion on a uniform time grid."""

    t: FloatArray
    V_b: FloatArray
    A_b: FloatArray

    def __len__(self) -> int:
        """Number of grid points."""
        return self.t.shape[0]

    def __getitem__(self, index: int) -> BaseMotionSample:
        """Sample at grid point ``index``."""
        return BaseMotionSample(V_b=self.V_b[index], A_b=self.A_b[index])


@dataclass(frozen=True)
class Wrench:
    """Force and torque acting at a link COM."""

    force: FloatArray
    torque: FloatArray

    @classmethod
    def zero(cls) -> "Wrench":
        """No load."""
        return cls(force=np.zeros(3), torque=np.zeros(3))

    def as_array(self) -> FloatArray:
        """Stacked ``[force; torque]``."""
        return np.concatenate([self.force, self.torque])
