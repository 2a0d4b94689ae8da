from pathlib import Path

import pytest

from steady_arm.chain.builtin import builtin_toy_arm
from steady_arm.chain.models import ChainModel

ROOT = Path(__file__).resolve().parents[1]


@pytest.fixture
def pendulum() -> ChainModel:
    return builtin_toy_arm(1)


@pytest.fixture
def two_link() -> ChainModel:
    return builtin_toy_arm(2)


@pytest.fixture
def four_link() -> ChainModel:
    return builtin_toy_arm(4)


@pytest.fixture(params=[1, 2, 4], ids=["pendulum", "two_link", "four_link"])
def arm(request: pytest.FixtureRequest) -> ChainModel:
    return builtin_toy_arm(request.param)


@pytest.fixture
def repo_root() -> Path:
    return ROOT
