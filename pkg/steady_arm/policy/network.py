"""
Small feed-forward networks with hand-written reverse-mode gradients.

Networks are tanh multilayer perceptrons with a linear output layer. Batches
are row-major: an input of shape ``(batch, inputs)`` gives an output of
shape ``(batch, outputs)``.
"""

import itertools
import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike

from steady_arm.constants import get_constants
from steady_arm.utils import FloatArray

logger = logging.getLogger(__name__)

_LOG_SQRT_2PI = 0.5 * math.log(2.0 * math.pi)


class MLP:
    """Tanh hidden layers, linear output; weights are ``(inputs, outputs)``."""

    def __init__(self, weights: Sequence[FloatArray], biases: Sequence[FloatArray]):
        """
        Wrap existing parameters.

        Raises:
            ValueError: If consecutive layer shapes do not chain.

        """
        if len(weights) != len(biases) or not weights:
            raise ValueError("need one bias per weight matrix and at least one layer")
        for index, (weight, bias) in enumerate(zip(weights, biases, strict=True)):
            if bias.shape != (weight.shape[1],):
                raise ValueError(
                    f"layer {index}: bias shape {bias.shape} does not match"
                )
            if index and weights[index - 1].shape[1] != weight.shape[0]:
                raise ValueError(f"layer {index}: input width does not chain")
        self.weights = [np.array(weight, dtype=float) for weight in weights]
        self.biases = [np.array(bias, dtype=float) for bias in biases]

    @classmethod
    def initialize(
        cls, sizes: Sequence[int], rng: np.random.Generator, output_gain: float = 1.0
    ) -> "MLP":
        """
        Scaled Gaussian initialization with zero biases.

        Args:
            sizes: Layer widths, input first.
            rng: Random generator.
            output_gain: Extra factor on the last layer's weights.

        """
        if len(sizes) < 2:
            raise ValueError("an MLP needs at least an input and an output width")
        weights = []
        for index, (fan_in, fan_out) in enumerate(itertools.pairwise(sizes)):
            gain = output_gain if index == len(sizes) - 2 else 1.0
            scale = gain / math.sqrt(fan_in)
            weights.append(scale * rng.standard_normal((fan_in, fan_out)))
        biases = [np.zeros(size) for size in sizes[1:]]
        return cls(weights, biases)

    @property
    def sizes(self) -> tuple[int, ...]:
        """Layer widths, input first."""
        return (self.weights[0].shape[0], *(weight.shape[1] for weight in self.weights))

    @property
    def input_size(self) -> int:
        """Input width."""
        return self.weights[0].shape[0]

    @property
    def output_size(self) -> int:
        """Output width."""
        return self.weights[-1].shape[1]

    def parameters(self) -> list[FloatArray]:
        """Parameter arrays ``[W0, b0, W1, b1, ...]``; updates happen in place."""
        params: list[FloatArray] = []
        for weight, bias in zip(self.weights, self.biases, strict=True):
            params.extend((weight, bias))
        return params

    def forward(self, x: ArrayLike) -> tuple[FloatArray, list[FloatArray]]:
        """
        Evaluate the network.

        Args:
            x: Inputs, ``(batch, inputs)`` or a single ``(inputs,)`` vector.

        Returns:
            The outputs and the activations needed by ``backward``.

        Raises:
            ValueError: If the input width does not match.

        """
        batch = np.atleast_2d(np.asarray(x, dtype=float))
        if batch.shape[1] != self.input_size:
            raise ValueError(
                f"network expects {self.input_size} inputs, got {batch.shape[1]}"
            )
        activations = [batch]
        last = len(self.weights) - 1
        layers = zip(self.weights, self.biases, strict=True)
        for index, (weight, bias) in enumerate(layers):
            z = activations[-1] @ weight + bias
            activations.append(z if index == last else np.tanh(z))
        return activations[-1], activations

    def __call__(self, x: ArrayLike) -> FloatArray:
        """Outputs only."""
        return self.forward(x)[0]

    def backward(
        self, activations: list[FloatArray], grad_output: ArrayLike
    ) -> list[FloatArray]:
        """
        Gradients of a scalar loss with respect to every parameter.

        Args:
            activations: Cache returned by ``forward``.
            grad_output: ``d loss / d output``, same shape as the output.

        Returns:
            Gradients in the order of ``parameters()``.

        """
        grad = np.atleast_2d(np.asarray(grad_output, dtype=float))
        grads: list[FloatArray] = []
        for index in reversed(range(len(self.weights))):
            layer_input = activations[index]
            grads.append(grad.sum(axis=0))
            grads.append(layer_input.T @ grad)
            if index:
                grad = (grad @ self.weights[index].T) * (1.0 - layer_input**2)
        grads.reverse()
        return grads

    def copy(self) -> "MLP":
        """Deep copy."""
        return MLP(self.weights, self.biases)


@dataclass
class GaussianPolicy:
    """
    Actor producing joint-target offsets.

    The network gives the mean ``mu`` of a Gaussian over a pre-squash
    variable ``u``; the action is ``action_scale * tanh(u)``.
    """

    net: MLP
    log_std: FloatArray
    action_scale: float
    history: int

    @classmethod
    def initialize(
        cls,
        obs_size: int,
        action_size: int,
        rng: np.random.Generator,
        hidden_sizes: Sequence[int] | None = None,
        action_scale: float | None = None,
        init_log_std: float | None = None,
        history: int | None = None,
    ) -> "GaussianPolicy":
        """Fresh actor with a near-zero mean output."""
        constants = get_constants()
        hidden = tuple(constants.HIDDEN_SIZES if hidden_sizes is None else hidden_sizes)
        net = MLP.initialize((obs_size, *hidden, action_size), rng, output_gain=0.01)
        if init_log_std is None:
            init_log_std = constants.INIT_LOG_STD
        if action_scale is None:
            action_scale = constants.ACTION_SCALE
        return cls(
            net=net,
            log_std=np.full(action_size, init_log_std),
            action_scale=action_scale,
            history=constants.OBS_HISTORY if history is None else history,
        )

    @property
    def action_size(self) -> int:
        """Number of joints driven."""
        return self.net.output_size

    def parameters(self) -> list[FloatArray]:
        """Network parameters followed by ``log_std``."""
        return [*self.net.parameters(), self.log_std]

    def clamp_log_std(self) -> None:
        """Keep ``log_std`` inside the configured bounds."""
        low, high = get_constants().LOG_STD_BOUNDS
        np.clip(self.log_std, low, high, out=self.log_std)

    def copy(self) -> "GaussianPolicy":
        """Deep copy."""
        return GaussianPolicy(
            net=self.net.copy(),
            log_std=self.log_std.copy(),
            action_scale=self.action_scale,
            history=self.history,
        )


@dataclass(frozen=True)
class PolicyOutput:
    """A sampled (or mean) action."""

    action: FloatArray
    pre_squash: FloatArray
    log_prob: float


def squash(u: ArrayLike, scale: float) -> FloatArray:
    """``scale * tanh(u)``."""
    return scale * np.tanh(np.asarray(u, dtype=float))


def squashed_log_prob(
    u: ArrayLike, mean: ArrayLike, log_std: ArrayLike, scale: float
) -> FloatArray:
    """
    Log density of ``a = scale * tanh(u)`` with ``u ~ N(mean, exp(log_std)^2)``.

    Change of variables: ``log N(u) - sum log(scale * (1 - tanh(u)^2))``, with
    ``log(1 - tanh(u)^2) = 2 (log 2 - u - softplus(-2u))`` for stability.

    Returns:
        One value per row of ``u`` (a scalar array for a single vector).

    """
    u = np.asarray(u, dtype=float)
    mean = np.asarray(mean, dtype=float)
    log_std = np.asarray(log_std, dtype=float)
    z = (u - mean) * np.exp(-log_std)
    gaussian = np.sum(-0.5 * z**2 - log_std - _LOG_SQRT_2PI, axis=-1)
    log_jacobian = 2.0 * (math.log(2.0) - u - np.logaddexp(0.0, -2.0 * u))
    return gaussian - np.sum(math.log(scale) + log_jacobian, axis=-1)


def policy_forward(
    policy: GaussianPolicy,
    obs: ArrayLike,
    deterministic: bool = False,
    rng: np.random.Generator | None = None,
) -> PolicyOutput:
    """
    Sample a joint-target offset for one observation.

    Args:
        policy: The actor.
        obs: Observation vector.
        deterministic: Use the mean instead of sampling.
        rng: Sampling generator; required unless ``deterministic``.

    Returns:
        Offset within ``[-action_scale, action_scale]`` and its log-probability.

    Raises:
        ValueError: If the observation length does not match the network.

    """
    vector = np.asarray(obs, dtype=float).reshape(-1)
    if vector.shape[0] != policy.net.input_size:
        raise ValueError(
            f"observation has length {vector.shape[0]}, "
            f"policy expects {policy.net.input_size}"
        )
    mean = policy.net(vector)[0]
    if deterministic:
        u = mean
    else:
        if rng is None:
            raise ValueError("stochastic actions need a random generator")
        u = mean + np.exp(policy.log_std) * rng.standard_normal(mean.shape[0])
    log_prob = float(squashed_log_prob(u, mean, policy.log_std, policy.action_scale))
    return PolicyOutput(
        action=squash(u, policy.action_scale), pre_squash=u, log_prob=log_prob
    )


class Adam:
    """Adam over a fixed list of arrays, updated in place."""

    def __init__(
        self,
        parameters: Sequence[FloatArray],
        learning_rate: float,
        betas: tuple[float, float] = (0.9, 0.999),
        eps: float = 1e-8,
    ):
        """Create zeroed moment estimates for ``parameters``."""
        self.parameters = list(parameters)
        self.learning_rate = learning_rate
        self.beta1, self.beta2 = betas
        self.eps = eps
        self.steps = 0
        self._m = [np.zeros_like(param) for param in self.parameters]
        self._v = [np.zeros_like(param) for param in self.parameters]

    def step(self, grads: Sequence[FloatArray]) -> None:
        """Apply one update; ``grads`` align with the parameter list."""
        self.steps += 1
        correction1 = 1.0 - self.beta1**self.steps
        correction2 = 1.0 - self.beta2**self.steps
        moments = zip(self.parameters, grads, self._m, self._v, strict=True)
        for param, grad, m, v in moments:
            m *= self.beta1
            m += (1.0 - self.beta1) * grad
            v *= self.beta2
            v += (1.0 - self.beta2) * grad**2
            param -= self.learning_rate * (m / correction1) / (
                np.sqrt(v / correction2) + self.eps
            )


def clip_grad_norm(grads: list[FloatArray], max_norm: float) -> float:
    """Scale ``grads`` in place to a global norm of at most ``max_norm``."""
    norm = math.sqrt(sum(float(np.sum(grad**2)) for grad in grads))
    if norm > max_norm:
        for grad in grads:
            grad *= max_norm / norm
    return norm


def gradient_check(
    sizes: Sequence[int] = (8, 4, 2), seed: int = 0, eps: float = 1e-6, batch: int = 3
) -> float:
    """
    Compare ``MLP.backward`` with central finite differences.

    The loss is a fixed random projection of the outputs summed over a batch.

    Returns:
        ``|g - g_fd| / (|g| + |g_fd|)`` over all parameters.

    """
    rng = np.random.Generator(np.random.Philox(seed))
    net = MLP.initialize(sizes, rng)
    for bias in net.biases:
        bias[:] = 0.1 * rng.standard_normal(bias.shape)
    x = rng.standard_normal((batch, sizes[0]))
    projection = rng.standard_normal((batch, sizes[-1]))

    def loss() -> float:
        return float(np.sum(net(x) * projection))

    _, activations = net.forward(x)
    analytic = net.backward(activations, projection)
    numeric = []
    for param in net.parameters():
        grad = np.zeros_like(param)
        for index in np.ndindex(param.shape):
            original = param[index]
            param[index] = original + eps
            upper = loss()
            param[index] = original - eps
            lower = loss()
            param[index] = original
            grad[index] = (upper - lower) / (2.0 * eps)
        numeric.append(grad)

    flat_analytic = np.concatenate([grad.ravel() for grad in analytic])
    flat_numeric = np.concatenate([grad.ravel() for grad in numeric])
    scale = np.linalg.norm(flat_analytic) + np.linalg.norm(flat_numeric)
    error = float(np.linalg.norm(flat_analytic - flat_numeric) / max(scale, 1e-300))
    logger.debug(f"Gradient check on {tuple(sizes)}: relative error {error:.3e}")
    return error
