"""
Policy checkpoints.

A checkpoint is a ``key = value`` document: the preamble lists the format
version, layer widths, history depth, action scale and ``log_std``; one
``[layer]`` section per layer holds the row-major ``weight`` matrix and the
``bias``.
"""

import logging
from pathlib import Path

import numpy as np

from steady_arm.constants import get_constants
from steady_arm.errors import CheckpointError, DocumentSyntaxError
from steady_arm.policy.network import MLP, GaussianPolicy
from steady_arm.textformat import Block, Entry, dump_blocks, parse_blocks, parse_floats

logger = logging.getLogger(__name__)

CHECKPOINT_VERSION = 1
FORMAT_HEADER = "steady-arm policy checkpoint"


def serialize_policy(policy: GaussianPolicy) -> str:
    """Checkpoint text for ``policy``."""
    preamble: list[tuple[str, object]] = [
        ("version", CHECKPOINT_VERSION),
        ("sizes", list(policy.net.sizes)),
        ("history", policy.history),
        ("action_scale", float(policy.action_scale)),
        ("log_std", [float(value) for value in policy.log_std]),
    ]
    sections = [
        (
            "layer",
            [
                ("weight", [float(value) for value in weight.ravel()]),
                ("bias", [float(value) for value in bias]),
            ],
        )
        for weight, bias in zip(policy.net.weights, policy.net.biases, strict=True)
    ]
    return dump_blocks(preamble, sections, header=FORMAT_HEADER)


def _required(block: Block, key: str) -> Entry:
    entries = block.as_dict()
    if key not in entries:
        where = f"[{block.name}] at line {block.line}" if block.name else "preamble"
        raise CheckpointError(f"{where}: missing '{key}'")
    return entries[key]


def parse_policy(text: str) -> GaussianPolicy:
    """
    Read a checkpoint document.

    Raises:
        CheckpointError: For syntax errors, a wrong version, inconsistent
            shapes or non-finite parameters.

    """
    try:
        blocks = parse_blocks(text)
        preamble = blocks[0]
        version = int(_required(preamble, "version").value)
        if version != CHECKPOINT_VERSION:
            raise CheckpointError(f"unsupported checkpoint version {version}")
        sizes = [int(value) for value in parse_floats(_required(preamble, "sizes"))]
        history = int(_required(preamble, "history").value)
        action_scale = parse_floats(_required(preamble, "action_scale"), 1)[0]
        log_std = np.array(parse_floats(_required(preamble, "log_std"), sizes[-1]))

        layers = [block for block in blocks[1:] if block.name == "layer"]
        if len(layers) != len(blocks) - 1:
            raise CheckpointError("only [layer] sections are allowed")
        if len(layers) != len(sizes) - 1:
            raise CheckpointError(
                f"{len(sizes) - 1} layers declared, {len(layers)} present"
            )
        weights = []
        biases = []
        for block, fan_in, fan_out in zip(layers, sizes[:-1], sizes[1:], strict=True):
            weight = parse_floats(_required(block, "weight"), fan_in * fan_out)
            weights.append(np.array(weight).reshape(fan_in, fan_out))
            biases.append(np.array(parse_floats(_required(block, "bias"), fan_out)))
    except (DocumentSyntaxError, ValueError) as e:
        raise CheckpointError(f"malformed checkpoint: {e}") from e

    if not all(np.all(np.isfinite(array)) for array in (*weights, *biases, log_std)):
        raise CheckpointError("checkpoint holds non-finite parameters")
    low, high = get_constants().LOG_STD_BOUNDS
    if np.any(log_std < low) or np.any(log_std > high):
        raise CheckpointError(f"log_std outside [{low}, {high}]")
    if history < 1 or action_scale <= 0:
        raise CheckpointError("history must be positive and action_scale > 0")
    return GaussianPolicy(
        net=MLP(weights, biases),
        log_std=log_std,
        action_scale=action_scale,
        history=history,
    )


def save_checkpoint(policy: GaussianPolicy, path: Path) -> None:
    """Write ``policy`` to ``path``."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_policy(policy), encoding="utf-8")
    logger.info(f"Wrote policy checkpoint {path}")


def load_checkpoint(path: Path) -> GaussianPolicy:
    """Read a checkpoint file."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    policy = parse_policy(text)
    logger.info(f"Loaded policy with layer widths {policy.net.sizes} from {path}")
    return policy
