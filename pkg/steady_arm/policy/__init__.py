"""Residual policy: network, observations, reward, PPO and training."""

from steady_arm.policy.checkpoint import load_checkpoint, parse_policy, save_checkpoint
from steady_arm.policy.models import (
    Batch,
    IterationStats,
    PPOConfig,
    RewardBreakdown,
    RewardWeights,
    TrainingSwitches,
    UpdateStats,
)
from steady_arm.policy.network import (
    MLP,
    Adam,
    GaussianPolicy,
    gradient_check,
    policy_forward,
    squashed_log_prob,
)
from steady_arm.policy.observation import (
    ObservationHistory,
    assemble_observation,
    observation_size,
)
from steady_arm.policy.ppo import compute_gae, ppo_update, surrogate_gradient
from steady_arm.policy.reward import compute_reward
from steady_arm.policy.train import (
    PolicyController,
    TrainingResult,
    TrainingSetup,
    torque_guide_trend,
    train,
    write_curve_csv,
)

__all__ = [
    "MLP",
    "Adam",
    "Batch",
    "GaussianPolicy",
    "IterationStats",
    "ObservationHistory",
    "PPOConfig",
    "PolicyController",
    "RewardBreakdown",
    "RewardWeights",
    "TrainingResult",
    "TrainingSetup",
    "TrainingSwitches",
    "UpdateStats",
    "assemble_observation",
    "compute_gae",
    "compute_reward",
    "gradient_check",
    "load_checkpoint",
    "observation_size",
    "parse_policy",
    "policy_forward",
    "ppo_update",
    "save_checkpoint",
    "squashed_log_prob",
    "surrogate_gradient",
    "torque_guide_trend",
    "train",
    "write_curve_csv",
]
