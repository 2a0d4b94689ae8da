"""
Proximal policy optimization on the hand-differentiated networks.

The actor loss is the clipped surrogate minus an entropy bonus; the critic
regresses the GAE returns. Both use Adam with global-norm gradient clipping.
"""

import logging
import math
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from steady_arm.errors import TrainingError
from steady_arm.policy.models import Batch, PPOConfig, UpdateStats
from steady_arm.policy.network import (
    MLP,
    Adam,
    GaussianPolicy,
    clip_grad_norm,
    squashed_log_prob,
)
from steady_arm.utils import FloatArray

logger = logging.getLogger(__name__)

_GAUSSIAN_ENTROPY = 0.5 * math.log(2.0 * math.pi * math.e)


def compute_gae(
    rewards: ArrayLike,
    values: ArrayLike,
    dones: ArrayLike,
    last_value: float,
    gamma: float,
    lam: float,
) -> tuple[FloatArray, FloatArray]:
    """
    Generalized advantage estimates over one trajectory.

    Args:
        rewards: Reward per step.
        values: Critic value per step.
        dones: 1 where the episode ends after the step.
        last_value: Bootstrap value after the final step (ignored if done).
        gamma: Discount.
        lam: GAE parameter; 1 gives Monte-Carlo advantages.

    Returns:
        Advantages and the value targets ``advantages + values``.

    """
    rewards = np.asarray(rewards, dtype=float)
    values = np.asarray(values, dtype=float)
    dones = np.asarray(dones, dtype=float)
    advantages = np.zeros_like(rewards)
    running = 0.0
    next_value = last_value
    for t in reversed(range(rewards.shape[0])):
        live = 1.0 - dones[t]
        delta = rewards[t] + gamma * next_value * live - values[t]
        running = delta + gamma * lam * live * running
        advantages[t] = running
        next_value = values[t]
    return advantages, advantages + values


def surrogate_gradient(
    ratio: ArrayLike, advantages: ArrayLike, clip_epsilon: float
) -> FloatArray:
    """
    ``d/d log_prob`` of ``-min(r A, clip(r, 1 - eps, 1 + eps) A)`` per sample.

    Samples whose clipped term is the minimum contribute nothing.
    """
    ratio = np.asarray(ratio, dtype=float)
    advantages = np.asarray(advantages, dtype=float)
    clipped = np.clip(ratio, 1.0 - clip_epsilon, 1.0 + clip_epsilon)
    unclipped_active = ratio * advantages <= clipped * advantages
    return np.where(unclipped_active, -ratio * advantages, 0.0)


@dataclass
class PPOOptimizer:
    """Optimizer state carried across iterations."""

    actor: Adam
    critic: Adam

    @classmethod
    def create(
        cls, actor: GaussianPolicy, critic: MLP, learning_rate: float
    ) -> "PPOOptimizer":
        """Fresh Adam state for both networks."""
        return cls(
            actor=Adam(actor.parameters(), learning_rate),
            critic=Adam(critic.parameters(), learning_rate),
        )


def _check_finite(name: str, value: float, iteration_info: str) -> None:
    if not math.isfinite(value):
        raise TrainingError(f"non-finite {name} ({value}) {iteration_info}")


def ppo_update(
    batch: Batch,
    actor: GaussianPolicy,
    critic: MLP,
    config: PPOConfig,
    optimizer: PPOOptimizer | None = None,
    rng: np.random.Generator | None = None,
) -> UpdateStats:
    """
    Run ``epochs`` passes of minibatch updates over ``batch``.

    Parameters of ``actor`` and ``critic`` are updated in place.

    Args:
        batch: Transitions with advantages and returns filled in.
        actor: Policy network.
        critic: Value network with one output.
        config: Trainer settings.
        optimizer: Adam state; a fresh one when omitted.
        rng: Shuffling generator; seeded from ``config.seed`` when omitted.

    Returns:
        Loss and divergence statistics averaged over minibatches.

    Raises:
        TrainingError: If the batch is empty or a loss becomes non-finite.

    """
    size = len(batch)
    if size == 0:
        raise TrainingError("cannot update on an empty batch")
    optimizer = optimizer or PPOOptimizer.create(actor, critic, config.learning_rate)
    rng = rng or np.random.Generator(np.random.Philox(config.seed))

    advantages = batch.advantages
    if config.normalize_advantages and size > 1:
        advantages = (advantages - advantages.mean()) / (advantages.std() + 1e-8)

    totals = {"policy": 0.0, "value": 0.0, "entropy": 0.0, "kl": 0.0, "clip": 0.0}
    updates = 0
    for epoch in range(config.epochs):
        order = rng.permutation(size)
        for start in range(0, size, config.minibatch_size):
            index = order[start : start + config.minibatch_size]
            count = index.shape[0]
            obs = batch.observations[index]
            u = batch.pre_squash[index]
            adv = advantages[index]
            where = f"in epoch {epoch}, minibatch at {start}"

            mean, actor_cache = actor.net.forward(obs)
            log_std = actor.log_std
            log_prob = squashed_log_prob(u, mean, log_std, actor.action_scale)
            log_ratio = log_prob - batch.log_probs[index]
            ratio = np.exp(log_ratio)
            eps = config.clip_epsilon
            clipped = np.clip(ratio, 1.0 - eps, 1.0 + eps)
            policy_loss = float(-np.mean(np.minimum(ratio * adv, clipped * adv)))
            entropy = float(np.sum(log_std) + log_std.shape[0] * _GAUSSIAN_ENTROPY)
            _check_finite("policy loss", policy_loss, where)

            coefficient = surrogate_gradient(ratio, adv, config.clip_epsilon) / count
            inv_var = np.exp(-2.0 * log_std)
            residual = u - mean
            grad_mean = coefficient[:, None] * residual * inv_var
            grad_log_std = (
                np.sum(coefficient[:, None] * (residual**2 * inv_var - 1.0), axis=0)
                - config.entropy_coef
            )
            actor_grads = [*actor.net.backward(actor_cache, grad_mean), grad_log_std]
            clip_grad_norm(actor_grads, config.max_grad_norm)
            optimizer.actor.step(actor_grads)
            actor.clamp_log_std()

            values, critic_cache = critic.forward(obs)
            error = values[:, 0] - batch.returns[index]
            value_loss = float(config.value_coef * np.mean(error**2))
            _check_finite("value loss", value_loss, where)
            grad_values = (config.value_coef * 2.0 * error / count)[:, None]
            critic_grads = critic.backward(critic_cache, grad_values)
            clip_grad_norm(critic_grads, config.max_grad_norm)
            optimizer.critic.step(critic_grads)

            totals["policy"] += policy_loss
            totals["value"] += value_loss
            totals["entropy"] += entropy
            totals["kl"] += float(np.mean(-log_ratio))
            totals["clip"] += float(np.mean(np.abs(ratio - 1.0) > config.clip_epsilon))
            updates += 1

    stats = UpdateStats(
        policy_loss=totals["policy"] / updates,
        value_loss=totals["value"] / updates,
        entropy=totals["entropy"] / updates,
        approx_kl=totals["kl"] / updates,
        clip_fraction=totals["clip"] / updates,
    )
    logger.debug(
        f"PPO update on {size} transitions: policy {stats.policy_loss:.4f}, "
        f"value {stats.value_loss:.4f}, kl {stats.approx_kl:.2e}"
    )
    return stats
