from pathlib import Path

import pytest

from steady_arm.config import ExperimentConfig, load_config, parse_config
from steady_arm.errors import ConfigError


def test_example_config(repo_root: Path) -> None:
    config = load_config(repo_root / "configs" / "example.cfg")

    assert config.seed == 7
    assert config.sim.seed == 7
    assert config.ppo.seed == 7
    assert config.sim.duration == 4.0
    assert config.gains.Kbar_p == (100.0,) * 6
    assert config.ppo.hidden_sizes == (64, 64)
    assert config.bench.methods == ("pd_hold", "task_only", "ideal")
    assert config.experiment.chain == str(repo_root / "models" / "two_link.chain")
    assert config.experiment.out == repo_root / "out"
    assert config.load_model().n == 2


def test_seed_override(repo_root: Path) -> None:
    config = load_config(repo_root / "configs" / "example.cfg", seed=11)
    assert (config.seed, config.sim.seed, config.ppo.seed) == (11, 11, 11)


def test_defaults_without_a_file() -> None:
    config = load_config(None)
    assert config == ExperimentConfig(base_dir=config.base_dir)


def test_relative_paths_follow_the_config(tmp_path: Path) -> None:
    (tmp_path / "profiles.txt").write_text("", encoding="utf-8")
    text = "[experiment]\nprofiles = profiles.txt\nout = results\n"

    config = parse_config(text, tmp_path)

    assert config.experiment.profiles == tmp_path / "profiles.txt"
    assert config.experiment.out == tmp_path / "results"


def test_parent_segments_are_normalized(tmp_path: Path) -> None:
    configs = tmp_path / "configs"
    configs.mkdir()

    config = parse_config("[experiment]\nout = ../results\n", configs)

    assert config.experiment.out == (tmp_path / "results").resolve()
    assert ".." not in config.experiment.out.parts


def test_scalar_fills_a_vector(tmp_path: Path) -> None:
    config = parse_config("[gains]\nKbar_d = 3\n", tmp_path)
    assert config.gains.Kbar_d == (3.0,) * 6


@pytest.mark.parametrize(
    ("text", "message"),
    [
        ("seed = 1\n", "outside a section"),
        ("[lab]\nseed = 1\n", "unknown section"),
        ("[sim]\nsteps = 10\n", "unknown key"),
        ("[sim]\nseed = 3\n", "seeds are set in"),
        ("[ppo]\nseed = 3\n", "seeds are set in"),
        ("[sim]\nduration = 1\n[sim]\nduration = 2\n", "duplicate section"),
        ("[sim]\nduration = -1\n", "invalid config"),
        ("[experiment]\nchain = missing.chain\n", "do not exist"),
        ("[disturbance]\nscenario = swimming\n", "unknown scenario"),
    ],
)
def test_rejected_configs(tmp_path: Path, text: str, message: str) -> None:
    with pytest.raises(ConfigError, match=message):
        parse_config(text, tmp_path)


def test_unreadable_config(tmp_path: Path) -> None:
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "absent.cfg")


def test_target_needs_both_parts(tmp_path: Path) -> None:
    config = parse_config("[experiment]\ntarget_position = 1, 0, 0\n", tmp_path)
    with pytest.raises(ConfigError, match="together"):
        config.task_command(config.load_model())
