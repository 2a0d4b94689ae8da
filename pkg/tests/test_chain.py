import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from steady_arm.chain.builtin import builtin_toy_arm
from steady_arm.chain.models import (
    ChainModel,
    EndEffectorSpec,
    JointSpec,
    LinkSpec,
    validate,
)
from steady_arm.chain.parser import load_chain, parse_chain, serialize_chain
from steady_arm.errors import ChainError, ChainSemanticError, ChainSyntaxError

MINIMAL = """\
[joint]
axis = 0, 0, 1
position_limits = -1, 1
torque_limit = 5
[link]
mass = 2
com_offset = 0.1, 0, 0
inertia = 0.1, 0, 0, 0, 0.1, 0, 0, 0, 0.1
[end_effector]
"""


def test_minimal_document_uses_defaults():
    model = parse_chain(MINIMAL)

    assert model.name == "chain"
    assert model.n == 1
    assert model.joints[0].origin_translation == (0.0, 0.0, 0.0)
    assert model.joints[0].origin_rotation == (1.0, 0.0, 0.0, 0.0)
    assert model.joints[0].viscous_damping == 0.0
    assert model.ee_offset == EndEffectorSpec()


def test_shipped_two_link_is_canonical_builtin(repo_root):
    text = (repo_root / "models" / "two_link.chain").read_text(encoding="utf-8")

    assert serialize_chain(builtin_toy_arm(2)) == text
    assert parse_chain(text) == builtin_toy_arm(2)


@pytest.mark.parametrize("n", [1, 2, 4])
def test_builtin_round_trip(n):
    model = builtin_toy_arm(n)

    assert parse_chain(serialize_chain(model)) == model
    assert validate(model) == []


def test_load_chain_builtin_reference():
    assert load_chain("builtin:4") == builtin_toy_arm(4)


@pytest.mark.parametrize("reference", ["builtin:3", "builtin:x"])
def test_load_chain_rejects_bad_builtin(reference):
    with pytest.raises(ChainError):
        load_chain(reference)


def test_load_chain_missing_file(tmp_path):
    with pytest.raises(ChainError, match="cannot read"):
        load_chain(tmp_path / "absent.chain")


def test_syntax_error_reports_line_and_column():
    text = MINIMAL.replace("mass = 2", "  mass 2")

    with pytest.raises(ChainSyntaxError) as info:
        parse_chain(text)

    assert info.value.line == 6
    assert info.value.column == 3


def test_unknown_key_is_syntax_error():
    text = MINIMAL.replace("torque_limit = 5", "torque_limit = 5\ncolour = red")

    with pytest.raises(ChainSyntaxError, match="colour"):
        parse_chain(text)


def test_wrong_value_count_is_syntax_error():
    with pytest.raises(ChainSyntaxError, match="expects 3 values"):
        parse_chain(MINIMAL.replace("axis = 0, 0, 1", "axis = 0, 1"))


def test_link_before_joint_is_rejected():
    text = "[link]\nmass = 1\n" + MINIMAL

    with pytest.raises(ChainSyntaxError, match="must follow a \\[joint\\]"):
        parse_chain(text)


def test_missing_required_field_names_path():
    text = MINIMAL.replace("torque_limit = 5\n", "")

    with pytest.raises(ChainSemanticError) as info:
        parse_chain(text)

    assert info.value.field_path == "joints[0].torque_limit"


@pytest.mark.parametrize(
    ("old", "new", "field_path"),
    [
        ("axis = 0, 0, 1", "axis = 0, 0, 2", "joints[0].axis"),
        (
            "position_limits = -1, 1",
            "position_limits = 1, -1",
            "joints[0].position_limits",
        ),
        ("torque_limit = 5", "torque_limit = 0", "joints[0].torque_limit"),
        ("mass = 2", "mass = -1", "links[0].mass"),
        (
            "inertia = 0.1, 0, 0, 0, 0.1, 0, 0, 0, 0.1",
            "inertia = 0.1, 0, 0, 0, 0.1, 0, 0, 0, 0.5",
            "links[0].inertia",
        ),
        (
            "inertia = 0.1, 0, 0, 0, 0.1, 0, 0, 0, 0.1",
            "inertia = 0.1, 0.01, 0, 0, 0.1, 0, 0, 0, 0.1",
            "links[0].inertia",
        ),
    ],
)
def test_semantic_violations_name_the_field(old, new, field_path):
    with pytest.raises(ChainSemanticError) as info:
        parse_chain(MINIMAL.replace(old, new))

    assert info.value.field_path == field_path


def test_validate_lists_every_violation():
    joint = JointSpec(
        axis=(0.0, 0.0, 2.0), position_limits=(1.0, -1.0), torque_limit=-1.0
    )
    link = LinkSpec(
        mass=0.0,
        com_offset=(0.0, 0.0, 0.0),
        inertia=((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)),
    )
    model = ChainModel(joints=(joint,), links=(link,))

    fields = {violation.field for violation in validate(model)}

    assert fields == {
        "joints[0].axis",
        "joints[0].position_limits",
        "joints[0].torque_limit",
        "links[0].mass",
    }


AXES = [(1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, 0.0, 1.0)]
positive = st.floats(min_value=0.05, max_value=5.0, allow_nan=False)
signed = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)


@st.composite
def chains(draw: st.DrawFn) -> ChainModel:
    n = draw(st.integers(min_value=1, max_value=5))
    joints = []
    links = []
    for _ in range(n):
        axis = draw(st.sampled_from(AXES))
        low = draw(st.floats(min_value=-3.0, max_value=-0.1))
        joints.append(
            JointSpec(
                axis=axis,
                origin_translation=(draw(signed), draw(signed), draw(signed)),
                position_limits=(low, -low),
                torque_limit=draw(positive),
                viscous_damping=draw(st.floats(min_value=0.0, max_value=1.0)),
            )
        )
        moment = draw(positive)
        links.append(
            LinkSpec(
                mass=draw(positive),
                com_offset=(draw(signed), draw(signed), draw(signed)),
                inertia=((moment, 0.0, 0.0), (0.0, moment, 0.0), (0.0, 0.0, moment)),
            )
        )
    ee = EndEffectorSpec(translation=(draw(signed), draw(signed), draw(signed)))
    return ChainModel(
        name="generated", joints=tuple(joints), links=tuple(links), ee_offset=ee
    )


@settings(max_examples=50, deadline=None)
@given(chains())
def test_serialize_then_parse_is_identity(model):
    assert parse_chain(serialize_chain(model)) == model
