"""
Chain-description documents.

See ``docs/chain_format.md`` for the grammar. In short: an optional
``name = ...`` preamble, then one ``[joint]``/``[link]`` block pair per DoF
and a final ``[end_effector]`` block.
"""

import logging
from pathlib import Path

from pydantic import ValidationError

from steady_arm.chain.models import (
    IDENTITY_QUATERNION,
    ZERO_VECTOR,
    ChainModel,
    EndEffectorSpec,
    JointSpec,
    LinkSpec,
    validate,
)
from steady_arm.errors import (
    ChainError,
    ChainSemanticError,
    ChainSyntaxError,
    DocumentSyntaxError,
)
from steady_arm.textformat import Block, Entry, dump_blocks, parse_blocks, parse_floats

logger = logging.getLogger(__name__)

FORMAT_HEADER = "steady-arm chain description"
BUILTIN_PREFIX = "builtin:"

_JOINT_KEYS = {
    "axis",
    "origin_translation",
    "origin_rotation",
    "position_limits",
    "torque_limit",
    "viscous_damping",
}
_LINK_KEYS = {"mass", "com_offset", "inertia"}
_EE_KEYS = {"translation", "rotation"}


def parse_chain(text: str) -> ChainModel:
    """
    Parse a chain-description document.

    Args:
        text: UTF-8 document in the chain grammar.

    Returns:
        The validated chain model.

    Raises:
        ChainSyntaxError: Grammar violations, with line and column.
        ChainSemanticError: Missing fields or broken invariants, with the
            field path.

    """
    try:
        blocks = parse_blocks(text)
    except DocumentSyntaxError as e:
        raise ChainSyntaxError(e.message, e.line, e.column) from e

    preamble, sections = blocks[0], blocks[1:]
    name = "chain"
    for entry in preamble.entries:
        if entry.key != "name":
            raise ChainSyntaxError(
                f"unknown key '{entry.key}'", entry.line, entry.column
            )
        name = entry.value

    joints: list[JointSpec] = []
    links: list[LinkSpec] = []
    ee_offset: EndEffectorSpec | None = None
    for block in sections:
        if ee_offset is not None:
            raise ChainSyntaxError(
                "[end_effector] must be the final block", block.line, 1
            )
        if block.name == "joint":
            if len(joints) != len(links):
                raise ChainSyntaxError(
                    "[joint] must follow a [link] block", block.line, 1
                )
            joints.append(_parse_joint(block, len(joints)))
        elif block.name == "link":
            if len(links) >= len(joints):
                raise ChainSyntaxError(
                    "[link] must follow a [joint] block", block.line, 1
                )
            links.append(_parse_link(block, len(links)))
        elif block.name == "end_effector":
            ee_offset = _parse_end_effector(block)
        else:
            raise ChainSyntaxError(f"unknown section [{block.name}]", block.line, 1)

    if not joints:
        raise ChainSyntaxError("no joints defined")
    if len(links) != len(joints):
        raise ChainSemanticError(f"links[{len(links)}]", "missing [link] block")
    if ee_offset is None:
        raise ChainSemanticError("ee_offset", "missing [end_effector] block")

    model = ChainModel(
        name=name, joints=tuple(joints), links=tuple(links), ee_offset=ee_offset
    )
    violations = validate(model)
    if violations:
        first = violations[0]
        raise ChainSemanticError(first.field, first.rule)
    logger.debug(f"Parsed chain '{name}' with {model.n} joints")
    return model


def serialize_chain(model: ChainModel) -> str:
    """
    Write a model in canonical form.

    Every key is written explicitly and floats use round-trip precision, so
    ``parse_chain(serialize_chain(m)) == m`` for any valid model.
    """
    sections: list[tuple[str, list[tuple[str, object]]]] = []
    for joint, link in zip(model.joints, model.links, strict=True):
        sections.append(
            (
                "joint",
                [
                    ("axis", joint.axis),
                    ("origin_translation", joint.origin_translation),
                    ("origin_rotation", joint.origin_rotation),
                    ("position_limits", joint.position_limits),
                    ("torque_limit", float(joint.torque_limit)),
                    ("viscous_damping", float(joint.viscous_damping)),
                ],
            )
        )
        sections.append(
            (
                "link",
                [
                    ("mass", float(link.mass)),
                    ("com_offset", link.com_offset),
                    ("inertia", [value for row in link.inertia for value in row]),
                ],
            )
        )
    sections.append(
        (
            "end_effector",
            [
                ("translation", model.ee_offset.translation),
                ("rotation", model.ee_offset.rotation),
            ],
        )
    )
    return dump_blocks([("name", model.name)], sections, header=FORMAT_HEADER)


def load_chain(reference: str | Path) -> ChainModel:
    """
    Load a chain from a file path or a ``builtin:<n>`` reference.

    Raises:
        ChainError: If the file cannot be read or parsed.

    """
    text_ref = str(reference)
    if text_ref.startswith(BUILTIN_PREFIX):
        from steady_arm.chain.builtin import builtin_toy_arm

        try:
            dof = int(text_ref[len(BUILTIN_PREFIX) :])
        except ValueError as e:
            raise ChainError(f"invalid builtin reference '{text_ref}'") from e
        return builtin_toy_arm(dof)

    path = Path(reference)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ChainError(f"cannot read chain file {path}: {e}") from e
    logger.info(f"Loading chain description from {path}")
    return parse_chain(text)


def _fields(block: Block, allowed: set[str], path: str) -> dict[str, Entry]:
    try:
        entries = block.as_dict()
    except DocumentSyntaxError as e:
        raise ChainSyntaxError(e.message, e.line, e.column) from e
    for key, entry in entries.items():
        if key not in allowed:
            raise ChainSyntaxError(
                f"unknown key '{key}' in {path}", entry.line, entry.column
            )
    return entries


def _require(entries: dict[str, Entry], key: str, path: str) -> Entry:
    if key not in entries:
        raise ChainSemanticError(f"{path}.{key}", "missing")
    return entries[key]


def _floats(entry: Entry, count: int | None = None) -> tuple[float, ...]:
    try:
        return parse_floats(entry, count)
    except DocumentSyntaxError as e:
        raise ChainSyntaxError(e.message, e.line, e.column) from e


def _parse_joint(block: Block, index: int) -> JointSpec:
    path = f"joints[{index}]"
    entries = _fields(block, _JOINT_KEYS, path)
    values: dict[str, object] = {
        "axis": _floats(_require(entries, "axis", path), 3),
        "position_limits": _floats(_require(entries, "position_limits", path), 2),
        "torque_limit": _floats(_require(entries, "torque_limit", path), 1)[0],
        "origin_translation": ZERO_VECTOR,
        "origin_rotation": IDENTITY_QUATERNION,
        "viscous_damping": 0.0,
    }
    if "origin_translation" in entries:
        values["origin_translation"] = _floats(entries["origin_translation"], 3)
    if "origin_rotation" in entries:
        values["origin_rotation"] = _floats(entries["origin_rotation"], 4)
    if "viscous_damping" in entries:
        values["viscous_damping"] = _floats(entries["viscous_damping"], 1)[0]
    return _build(JointSpec, values, path)


def _parse_link(block: Block, index: int) -> LinkSpec:
    path = f"links[{index}]"
    entries = _fields(block, _LINK_KEYS, path)
    flat = _floats(_require(entries, "inertia", path), 9)
    values: dict[str, object] = {
        "mass": _floats(_require(entries, "mass", path), 1)[0],
        "com_offset": _floats(_require(entries, "com_offset", path), 3),
        "inertia": (flat[0:3], flat[3:6], flat[6:9]),
    }
    return _build(LinkSpec, values, path)


def _parse_end_effector(block: Block) -> EndEffectorSpec:
    entries = _fields(block, _EE_KEYS, "end_effector")
    values: dict[str, object] = {}
    if "translation" in entries:
        values["translation"] = _floats(entries["translation"], 3)
    if "rotation" in entries:
        values["rotation"] = _floats(entries["rotation"], 4)
    return _build(EndEffectorSpec, values, "ee_offset")


def _build[M: (JointSpec, LinkSpec, EndEffectorSpec)](
    cls: type[M], values: dict[str, object], path: str
) -> M:
    try:
        return cls.model_validate(values)
    except ValidationError as e:
        error = e.errors()[0]
        location = ".".join(str(part) for part in error["loc"])
        raise ChainSemanticError(f"{path}.{location}", error["msg"]) from e
