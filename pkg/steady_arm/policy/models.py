"""Configuration models and records of the residual policy trainer."""

from dataclasses import dataclass

from pydantic import BaseModel, ConfigDict, Field

from steady_arm.constants import get_constants
from steady_arm.utils import FloatArray

_constants = get_constants()


class RewardWeights(BaseModel):
    """
    Weights and scales of the per-step training reward.

    Linear penalty weights are negative; exponential forms are rewards in
    ``(0, weight]``. Position and orientation errors below their tolerance
    count as zero.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    alive: float = 10.0
    position: float = 10.0
    position_std: float = Field(default=0.1, gt=0)
    position_tolerance: float = Field(default=0.05, ge=0, description="Dead zone (m)")
    orientation: float = 10.0
    orientation_std: float = Field(default=0.1, gt=0)
    orientation_tolerance: float = Field(
        default=0.1, ge=0, description="Dead zone (rad)"
    )
    torque_guide: float = -0.1
    torque_guide_exp: float = 5.0
    torque_guide_scale: float = Field(
        default=1.0, gt=0, description="Torque distance scale of the exp form (N m)"
    )
    ee_lin_acc: float = -0.1
    ee_lin_acc_exp: float = 1.0
    ee_lin_acc_std: float = Field(default=3.0, gt=0)
    ee_ang_acc: float = -0.01
    ee_ang_acc_exp: float = 1.0
    ee_ang_acc_std: float = Field(default=10.0, gt=0)
    action_rate: float = -0.1

    def without_torque_guide(self) -> "RewardWeights":
        """Copy with both torque-guide terms switched off."""
        return self.model_copy(update={"torque_guide": 0.0, "torque_guide_exp": 0.0})


class PPOConfig(BaseModel):
    """
    Trainer settings.

    ``horizon`` is the number of policy steps per episode; at the default
    control rate one episode lasts ``horizon / control_rate`` seconds.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    gamma: float = Field(default=0.99, ge=0, lt=1, description="Discount")
    gae_lambda: float = Field(default=0.95, ge=0, le=1)
    clip_epsilon: float = Field(default=0.2, gt=0)
    learning_rate: float = Field(default=3e-4, gt=0)
    epochs: int = Field(default=5, ge=1)
    minibatch_size: int = Field(default=64, ge=1)
    entropy_coef: float = Field(default=1e-3, ge=0)
    value_coef: float = Field(default=0.5, ge=0)
    max_grad_norm: float = Field(default=0.5, gt=0)
    normalize_advantages: bool = True
    horizon: int = Field(
        default=round(_constants.EPISODE_LENGTH * _constants.CONTROL_RATE), ge=1
    )
    episodes_per_iteration: int = Field(default=2, ge=1)
    iterations: int = Field(default=200, ge=0)
    workers: int = Field(default=1, ge=1, description="Parallel episode processes")
    hidden_sizes: tuple[int, ...] = _constants.HIDDEN_SIZES
    history: int = Field(default=_constants.OBS_HISTORY, ge=1)
    action_scale: float = Field(default=_constants.ACTION_SCALE, gt=0)
    init_log_std: float = _constants.INIT_LOG_STD
    seed: int = 0


class TrainingSwitches(BaseModel):
    """Ablations of the training setup."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    use_task_torque: bool = Field(
        default=True, description="Add the operational-space torque to the PD torque"
    )
    simulate_base_accel: bool = Field(
        default=True, description="Drive episodes with sampled base motion"
    )
    use_torque_guide: bool = True


@dataclass(frozen=True)
class RewardBreakdown:
    """Per-term reward contributions; ``total`` is their sum."""

    alive: float
    position: float
    orientation: float
    torque_guide: float
    torque_guide_exp: float
    ee_lin_acc: float
    ee_lin_acc_exp: float
    ee_ang_acc: float
    ee_ang_acc_exp: float
    action_rate: float

    @property
    def terms(self) -> dict[str, float]:
        """Contributions by name, in a fixed order."""
        return {
            "alive": self.alive,
            "position": self.position,
            "orientation": self.orientation,
            "torque_guide": self.torque_guide,
            "torque_guide_exp": self.torque_guide_exp,
            "ee_lin_acc": self.ee_lin_acc,
            "ee_lin_acc_exp": self.ee_lin_acc_exp,
            "ee_ang_acc": self.ee_ang_acc,
            "ee_ang_acc_exp": self.ee_ang_acc_exp,
            "action_rate": self.action_rate,
        }

    @property
    def total(self) -> float:
        """Scalar reward."""
        return sum(self.terms.values())

    @property
    def torque_guide_total(self) -> float:
        """Both torque-guide terms."""
        return self.torque_guide + self.torque_guide_exp


@dataclass(frozen=True)
class Batch:
    """Transitions of one training iteration, flattened over episodes."""

    observations: FloatArray
    pre_squash: FloatArray
    log_probs: FloatArray
    values: FloatArray
    rewards: FloatArray
    dones: FloatArray
    advantages: FloatArray
    returns: FloatArray

    def __len__(self) -> int:
        """Number of transitions."""
        return self.observations.shape[0]


class UpdateStats(BaseModel):
    """Diagnostics of one ``ppo_update`` call."""

    policy_loss: float
    value_loss: float
    entropy: float
    approx_kl: float
    clip_fraction: float


class IterationStats(BaseModel):
    """One row of the training curve."""

    iteration: int
    mean_reward: float
    mean_ee_lin_acc: float
    mean_torque_guide: float
    policy_loss: float = 0.0
    value_loss: float = 0.0
    approx_kl: float = 0.0
    clip_fraction: float = 0.0
    aborted_episodes: int = 0
