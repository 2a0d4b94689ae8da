"""Fixed-base serial-chain arm models."""

from steady_arm.chain.builtin import builtin_toy_arm
from steady_arm.chain.models import (
    ChainModel,
    EndEffectorSpec,
    JointSpec,
    LinkSpec,
    Violation,
    validate,
)
from steady_arm.chain.parser import load_chain, parse_chain, serialize_chain

__all__ = [
    "ChainModel",
    "EndEffectorSpec",
    "JointSpec",
    "LinkSpec",
    "Violation",
    "builtin_toy_arm",
    "load_chain",
    "parse_chain",
    "serialize_chain",
    "validate",
]
