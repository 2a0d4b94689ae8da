"""Reference arms shipped with the laboratory."""

import logging

from steady_arm.chain.models import ChainModel, EndEffectorSpec, JointSpec, LinkSpec
from steady_arm.errors import ChainError

logger = logging.getLogger(__name__)

SUPPORTED_DOF = (1, 2, 4)

_Z_AXIS = (0.0, 0.0, 1.0)
_Y_AXIS = (0.0, 1.0, 0.0)
_LIMITS = (-2.9, 2.9)
_TORQUE_LIMIT = 200.0


def _rod_inertia(mass: float, length: float, radial: float) -> LinkSpec:
    # Slender rod along the link x axis, COM at mid-length.
    transverse = mass * length * length / 12.0
    return LinkSpec(
        mass=mass,
        com_offset=(length / 2.0, 0.0, 0.0),
        inertia=(
            (radial, 0.0, 0.0),
            (0.0, transverse, 0.0),
            (0.0, 0.0, transverse),
        ),
    )


def _joint(
    axis: tuple[float, float, float],
    origin: tuple[float, float, float] = (0.0, 0.0, 0.0),
) -> JointSpec:
    return JointSpec(
        axis=axis,
        origin_translation=origin,
        position_limits=_LIMITS,
        torque_limit=_TORQUE_LIMIT,
    )


def builtin_toy_arm(n: int) -> ChainModel:
    """
    Build one of the documented reference arms.

    * ``n = 1``: a pendulum about y with unit mass and the COM 0.5 m out; it
      swings in the vertical x-z plane, so default gravity acts on it.
    * ``n = 2``: a planar arm, z axes, unit masses and unit link lengths;
      the end effector sits at the tip of the second link.
    * ``n = 4``: a spatial arm with alternating z/y axes and 0.3 m links.

    Args:
        n: Degrees of freedom, one of ``SUPPORTED_DOF``.

    Returns:
        The reference model.

    Raises:
        ChainError: For an unsupported ``n``.

    """
    if n == 1:
        joints = (_joint(_Y_AXIS),)
        links = (_rod_inertia(1.0, 1.0, 0.01),)
        ee = EndEffectorSpec(translation=(1.0, 0.0, 0.0))
        return ChainModel(name="pendulum", joints=joints, links=links, ee_offset=ee)

    if n == 2:
        joints = (_joint(_Z_AXIS), _joint(_Z_AXIS, (1.0, 0.0, 0.0)))
        links = (_rod_inertia(1.0, 1.0, 0.01), _rod_inertia(1.0, 1.0, 0.01))
        ee = EndEffectorSpec(translation=(1.0, 0.0, 0.0))
        return ChainModel(
            name="planar_two_link", joints=joints, links=links, ee_offset=ee
        )

    if n == 4:
        length = 0.3
        joints = tuple(
            _joint(
                _Z_AXIS if index % 2 == 0 else _Y_AXIS,
                (0.0, 0.0, 0.0) if index == 0 else (length, 0.0, 0.0),
            )
            for index in range(4)
        )
        links = tuple(_rod_inertia(1.0, length, 0.001) for _ in range(4))
        ee = EndEffectorSpec(translation=(length, 0.0, 0.0))
        return ChainModel(
            name="spatial_four_link", joints=joints, links=links, ee_offset=ee
        )

    raise ChainError(f"unsupported builtin arm n={n}; expected one of {SUPPORTED_DOF}")
