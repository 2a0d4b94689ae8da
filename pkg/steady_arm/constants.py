"""
Contains configuration constants for the steady-arm laboratory.

All defaults live here so that every subcommand is reproducible from its
config file plus seed; nothing is read from the environment.
"""

from functools import lru_cache


class Constants:
    """
    Configuration constants for the steady-arm laboratory.

    Values are the frozen defaults; experiment config files override them per
    run.
    """

    GRAVITY: tuple[float, float, float] = (0.0, 0.0, -9.81)
    LAMBDA_REG: float = 1e-6

    DT_PHYSICS: float = 1e-3  # seconds
    CONTROL_RATE: float = 50.0  # Hz
    PD_RATE: float = 500.0  # Hz

    JOINT_KP: float = 10.0
    JOINT_KD: float = 0.5
    TASK_KP: float = 100.0
    TASK_KD: float = 20.0
    NULL_DAMPING: float = 5.0
    IK_DAMPING: float = 1e-2
    IK_ITERATIONS: int = 200

    IMPULSE_STD: float = 0.01  # seconds
    N_COMPONENTS: int = 3
    PERIOD_RANGE: tuple[float, float] = (0.64, 1.28)
    IMPULSE_RANGE: tuple[float, float] = (-100.0, 100.0)
    SWAY_RANGE: tuple[float, float] = (-10.0, 10.0)

    OBS_HISTORY: int = 5
    HIDDEN_SIZES: tuple[int, ...] = (64, 64)
    ACTION_SCALE: float = 0.5  # rad
    INIT_LOG_STD: float = -1.0
    LOG_STD_BOUNDS: tuple[float, float] = (-4.0, 1.0)
    EPISODE_LENGTH: float = 10.0  # seconds

    METRICS_WARMUP: float = 0.5  # seconds
    MAD_THRESHOLD: float = 5.0
    MOCAP_RATE: float = 120.0  # Hz
    ROLLOUTS_PER_CELL: int = 3

    LOG_LEVEL: str = "INFO"

    @classmethod
    def validate_config(cls) -> list[str]:
        """
        Validate the configuration and return a list of any issues found.

        Returns:
            List of validation error messages. Empty list if all valid.

        """
        errors: list[str] = []

        if cls.DT_PHYSICS <= 0:
            errors.append("DT_PHYSICS must be positive")

        if not cls.DT_PHYSICS <= 1.0 / cls.PD_RATE <= 1.0 / cls.CONTROL_RATE:
            errors.append(
                "rates must satisfy dt_physics <= 1/pd_rate <= 1/control_rate"
            )

        if cls.LAMBDA_REG <= 0:
            errors.append("LAMBDA_REG must be positive")

        if min(cls.JOINT_KP, cls.JOINT_KD, cls.TASK_KP, cls.TASK_KD) < 0:
            errors.append("gains must be non-negative")

        if cls.PERIOD_RANGE[0] >= cls.PERIOD_RANGE[1]:
            errors.append("PERIOD_RANGE must be increasing")

        if cls.IMPULSE_STD <= 0:
            errors.append("IMPULSE_STD must be positive")

        if cls.OBS_HISTORY < 1:
            errors.append("OBS_HISTORY must be at least 1")

        low, high = cls.LOG_STD_BOUNDS
        if not low <= cls.INIT_LOG_STD <= high:
            errors.append("INIT_LOG_STD must lie inside LOG_STD_BOUNDS")

        if cls.METRICS_WARMUP < 0:
            errors.append("METRICS_WARMUP must be non-negative")

        return errors

    @classmethod
    def get_masked_config(cls) -> dict[str, str]:
        """
        Get configuration values as strings for start-up logging.

        Returns:
            Dictionary of configuration names to rendered values.

        """
        return {
            "GRAVITY": str(cls.GRAVITY),
            "LAMBDA_REG": str(cls.LAMBDA_REG),
            "DT_PHYSICS": str(cls.DT_PHYSICS),
            "CONTROL_RATE": str(cls.CONTROL_RATE),
            "PD_RATE": str(cls.PD_RATE),
            "JOINT_GAINS": f"{cls.JOINT_KP}/{cls.JOINT_KD}",
            "TASK_GAINS": f"{cls.TASK_KP}/{cls.TASK_KD}",
            "OBS_HISTORY": str(cls.OBS_HISTORY),
            "METRICS_WARMUP": str(cls.METRICS_WARMUP),
            "LOG_LEVEL": cls.LOG_LEVEL,
        }


@lru_cache(maxsize=1)
def get_constants() -> Constants:
    """
    Get a cached instance of the Constants class.

    Returns:
        Constants instance with all defaults loaded.

    """
    return Constants()
