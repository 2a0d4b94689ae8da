"""Data models for fixed-base serial-chain arms."""

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from pydantic import BaseModel, ConfigDict, Field
from scipy.spatial.transform import Rotation

from steady_arm.utils import FloatArray

Vec3 = tuple[float, float, float]
Quaternion = tuple[float, float, float, float]
Matrix3 = tuple[Vec3, Vec3, Vec3]

UNIT_TOLERANCE = 1e-9
SYMMETRY_TOLERANCE = 1e-12

IDENTITY_QUATERNION: Quaternion = (1.0, 0.0, 0.0, 0.0)
ZERO_VECTOR: Vec3 = (0.0, 0.0, 0.0)


class JointSpec(BaseModel):
    """A revolute joint, expressed in the frame of its parent link."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    axis: Vec3 = Field(..., description="Unit rotation axis in the joint frame")
    origin_translation: Vec3 = Field(
        default=ZERO_VECTOR, description="Joint origin in the parent frame (m)"
    )
    origin_rotation: Quaternion = Field(
        default=IDENTITY_QUATERNION,
        description="Joint frame orientation in the parent frame (w, x, y, z)",
    )
    position_limits: tuple[float, float] = Field(
        ..., description="Lower and upper position limits (rad)"
    )
    torque_limit: float = Field(..., description="Symmetric torque limit (N·m)")
    viscous_damping: float = Field(
        default=0.0, description="Viscous joint damping (N·m·s/rad)"
    )


class LinkSpec(BaseModel):
    """Inertial description of the link driven by the joint of the same index."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    mass: float = Field(..., description="Link mass (kg)")
    com_offset: Vec3 = Field(..., description="Centre of mass in the link frame (m)")
    inertia: Matrix3 = Field(
        ..., description="Rotational inertia about the COM in the link frame (kg·m²)"
    )


class EndEffectorSpec(BaseModel):
    """Rigid transform from the last link frame to the end-effector frame."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    translation: Vec3 = ZERO_VECTOR
    rotation: Quaternion = IDENTITY_QUATERNION


class Violation(BaseModel):
    """A single failed model invariant."""

    model_config = ConfigDict(frozen=True)

    field: str = Field(..., description="Dotted path of the offending field")
    rule: str = Field(..., description="The violated rule")

    def __str__(self) -> str:
        """Render as ``field: rule``."""
        return f"{self.field}: {self.rule}"


@dataclass(frozen=True)
class ChainArrays:
    """Numpy views of a chain model, built once per model."""

    axes: FloatArray
    origin_translations: FloatArray
    origin_rotations: FloatArray
    masses: FloatArray
    coms: FloatArray
    inertias: FloatArray
    lower_limits: FloatArray
    upper_limits: FloatArray
    torque_limits: FloatArray
    damping: FloatArray
    ee_translation: FloatArray
    ee_rotation: FloatArray


class ChainModel(BaseModel):
    """An n-DoF fixed-base serial arm with one link per revolute joint."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str = "chain"
    joints: tuple[JointSpec, ...]
    links: tuple[LinkSpec, ...]
    ee_offset: EndEffectorSpec = EndEffectorSpec()

    @property
    def n(self) -> int:
        """Number of degrees of freedom."""
        return len(self.joints)

    @property
    def B(self) -> int:
        """Number of links; equal to ``n`` for a serial chain."""
        return len(self.links)

    @cached_property
    def arrays(self) -> ChainArrays:
        """Stacked numpy arrays for the numeric modules."""
        axes = np.array([joint.axis for joint in self.joints], dtype=float)
        norms = np.linalg.norm(axes, axis=1, keepdims=True)
        return ChainArrays(
            axes=axes / np.where(norms > 0, norms, 1.0),
            origin_translations=np.array(
                [joint.origin_translation for joint in self.joints], dtype=float
            ),
            origin_rotations=np.array(
                [quaternion_matrix(joint.origin_rotation) for joint in self.joints]
            ),
            masses=np.array([link.mass for link in self.links], dtype=float),
            coms=np.array([link.com_offset for link in self.links], dtype=float),
            inertias=np.array([link.inertia for link in self.links], dtype=float),
            lower_limits=np.array([j.position_limits[0] for j in self.joints]),
            upper_limits=np.array([j.position_limits[1] for j in self.joints]),
            torque_limits=np.array([j.torque_limit for j in self.joints], dtype=float),
            damping=np.array([j.viscous_damping for j in self.joints], dtype=float),
            ee_translation=np.array(self.ee_offset.translation, dtype=float),
            ee_rotation=quaternion_matrix(self.ee_offset.rotation),
        )


def quaternion_matrix(quaternion: Quaternion) -> FloatArray:
    """Rotation matrix of a ``(w, x, y, z)`` quaternion."""
    return Rotation.from_quat(quaternion, scalar_first=True).as_matrix()


def validate(model: ChainModel) -> list[Violation]:
    """
    Check every invariant of a chain model.

    Violations are data, not failures: the returned list is empty iff the
    model is valid.

    Args:
        model: The model to check.

    Returns:
        One violation per broken rule, naming the field path.

    """
    violations: list[Violation] = []
    if model.n == 0:
        violations.append(Violation(field="joints", rule="no joints defined"))
    if len(model.joints) != len(model.links):
        violations.append(
            Violation(field="links", rule="joints and links differ in length")
        )

    for index, joint in enumerate(model.joints):
        violations.extend(_joint_violations(f"joints[{index}]", joint))
    for index, link in enumerate(model.links):
        violations.extend(_link_violations(f"links[{index}]", link))

    ee = model.ee_offset
    if not _finite(ee.translation):
        violations.append(Violation(field="ee_offset.translation", rule="not finite"))
    if not _is_unit(ee.rotation):
        violations.append(
            Violation(field="ee_offset.rotation", rule="quaternion not unit")
        )
    return violations


def _joint_violations(path: str, joint: JointSpec) -> list[Violation]:
    found: list[Violation] = []
    if not _finite(joint.axis) or not _is_unit(joint.axis):
        found.append(Violation(field=f"{path}.axis", rule="axis not unit"))
    if not _finite(joint.origin_translation):
        found.append(Violation(field=f"{path}.origin_translation", rule="not finite"))
    if not _finite(joint.origin_rotation) or not _is_unit(joint.origin_rotation):
        found.append(
            Violation(field=f"{path}.origin_rotation", rule="quaternion not unit")
        )
    lower, upper = joint.position_limits
    if not (_finite(joint.position_limits) and lower < upper):
        found.append(
            Violation(
                field=f"{path}.position_limits",
                rule="lower limit not below upper limit",
            )
        )
    if not (math.isfinite(joint.torque_limit) and joint.torque_limit > 0):
        found.append(
            Violation(field=f"{path}.torque_limit", rule="torque limit not positive")
        )
    if not (math.isfinite(joint.viscous_damping) and joint.viscous_damping >= 0):
        found.append(
            Violation(field=f"{path}.viscous_damping", rule="damping negative")
        )
    return found


def _link_violations(path: str, link: LinkSpec) -> list[Violation]:
    found: list[Violation] = []
    if not (math.isfinite(link.mass) and link.mass > 0):
        found.append(Violation(field=f"{path}.mass", rule="mass not positive"))
    if not _finite(link.com_offset):
        found.append(Violation(field=f"{path}.com_offset", rule="not finite"))

    inertia = np.array(link.inertia, dtype=float)
    if not np.all(np.isfinite(inertia)):
        found.append(Violation(field=f"{path}.inertia", rule="not finite"))
        return found
    if np.max(np.abs(inertia - inertia.T)) > SYMMETRY_TOLERANCE:
        found.append(Violation(field=f"{path}.inertia", rule="inertia not symmetric"))
        return found
    moments = np.linalg.eigvalsh(inertia)
    if moments[0] <= 0:
        found.append(
            Violation(field=f"{path}.inertia", rule="inertia not positive definite")
        )
        return found
    slack = SYMMETRY_TOLERANCE * max(1.0, float(moments[-1]))
    if moments[0] + moments[1] < moments[2] - slack:
        found.append(Violation(field=f"{path}.inertia", rule="triangle inequality"))
    return found


def _finite(values: tuple[float, ...]) -> bool:
    return all(math.isfinite(value) for value in values)


def _is_unit(values: tuple[float, ...]) -> bool:
    norm = math.sqrt(sum(value * value for value in values))
    return abs(norm - 1.0) <= UNIT_TOLERANCE
