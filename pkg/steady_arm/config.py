"""
Experiment configuration files.

An experiment config uses the same ``key = value`` grammar as chain
descriptions::

    [experiment]
    chain = models/two_link.chain
    seed = 7

    [sim]
    duration = 4.0

Sections are ``[experiment]``, ``[sim]``, ``[disturbance]``, ``[gains]``,
``[ppo]``, ``[reward]``, ``[bench]`` and ``[train]``; each maps onto a
pydantic model and unknown keys are errors. Values are booleans
(``true``/``false``), numbers, bare strings or comma-separated lists. A
single number given for a fixed-length vector is repeated. Relative paths
resolve against the directory of the config file.

Every seed derives from ``[experiment] seed``.
"""

import logging
import typing
from pathlib import Path
from typing import Any

from pydantic import BaseModel, ConfigDict, Field, ValidationError

from steady_arm.chain.models import ChainModel
from steady_arm.chain.parser import load_chain
from steady_arm.constants import get_constants
from steady_arm.control.models import Gains, TaskCommand
from steady_arm.disturbance.models import SCENARIOS, ProfileRanges, scenario_ranges
from steady_arm.errors import ConfigError, DocumentSyntaxError
from steady_arm.policy.models import PPOConfig, RewardWeights, TrainingSwitches
from steady_arm.sim.models import SimConfig
from steady_arm.textformat import Block, parse_blocks, split_list

logger = logging.getLogger(__name__)

_constants = get_constants()

BUILTIN_PREFIX = "builtin:"
POLICY_PREFIX = "policy:"

Vec3 = tuple[float, float, float]
Quaternion = tuple[float, float, float, float]


class ExperimentSection(BaseModel):
    """Inputs and outputs of a run."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    chain: str = "builtin:2"
    profiles: Path | None = None
    checkpoint: Path | None = None
    out: Path = Path("out")
    seed: int = 0
    n_profiles: int = Field(default=20, ge=1, description="Profiles sampled if no file")
    target_position: Vec3 | None = None
    target_orientation: Quaternion | None = None


class DisturbanceSection(BaseModel):
    """Scenario preset plus optional range overrides."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    scenario: str = "default"
    period: tuple[float, float] | None = None
    impulse: tuple[float, float] | None = None
    sway: tuple[float, float] | None = None
    n_components: int | None = None
    impulse_std: float | None = None

    def ranges(self, scenario: str | None = None) -> ProfileRanges:
        """Sampling ranges of ``scenario`` (this section's by default)."""
        overrides = self.model_dump(exclude={"scenario"}, exclude_none=True)
        return scenario_ranges(scenario or self.scenario, **overrides)


class BenchSection(BaseModel):
    """Benchmark grid."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    methods: tuple[str, ...] = ("pd_hold", "task_only", "ideal")
    profiles: int = Field(default=20, ge=1)
    rollouts: int = Field(default=_constants.ROLLOUTS_PER_CELL, ge=1)
    workers: int = Field(default=1, ge=1)


_TRAINING_PLANT_KEYS = {
    "noise_q",
    "noise_qdot",
    "noise_accel",
    "noise_gyro",
    "joint_friction",
}


class TrainSection(TrainingSwitches):
    """Training ablations, training-only plant settings and held-out evaluation."""

    noise_q: float = Field(default=0.0, ge=0)
    noise_qdot: float = Field(default=0.0, ge=0)
    noise_accel: float = Field(default=0.0, ge=0)
    noise_gyro: float = Field(default=0.0, ge=0)
    joint_friction: float = Field(default=0.0, ge=0)
    held_out: int = Field(default=20, ge=0, description="Held-out evaluation profiles")
    held_out_scenario: str | None = None

    def switches(self) -> TrainingSwitches:
        """The ablation switches alone."""
        return TrainingSwitches(
            **self.model_dump(include=set(TrainingSwitches.model_fields))
        )

    def sim_overrides(self) -> dict[str, float]:
        """Noise and friction applied to training episodes."""
        return self.model_dump(include=_TRAINING_PLANT_KEYS)


class ExperimentConfig(BaseModel):
    """A fully validated experiment."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    experiment: ExperimentSection = ExperimentSection()
    sim: SimConfig = SimConfig()
    disturbance: DisturbanceSection = DisturbanceSection()
    gains: Gains = Gains()
    ppo: PPOConfig = PPOConfig()
    reward: RewardWeights = RewardWeights()
    bench: BenchSection = BenchSection()
    train: TrainSection = TrainSection()
    base_dir: Path = Path(".")

    @property
    def seed(self) -> int:
        """Root seed."""
        return self.experiment.seed

    def with_seed(self, seed: int) -> "ExperimentConfig":
        """Copy whose every seed derives from ``seed``."""
        return self.model_copy(
            update={
                "experiment": self.experiment.model_copy(update={"seed": seed}),
                "sim": self.sim.model_copy(update={"seed": seed}),
                "ppo": self.ppo.model_copy(update={"seed": seed}),
            }
        )

    def load_model(self) -> ChainModel:
        """The arm named by ``[experiment] chain``."""
        return load_chain(self.experiment.chain)

    def task_command(self, model: ChainModel) -> TaskCommand | None:
        """
        The configured target, or ``None`` to hold the initial pose.

        Raises:
            ConfigError: If only one of position and orientation is set.

        """
        position = self.experiment.target_position
        orientation = self.experiment.target_orientation
        if position is None and orientation is None:
            return None
        if position is None or orientation is None:
            raise ConfigError(
                "target_position and target_orientation must be given together"
            )
        try:
            return TaskCommand(position=position, orientation=orientation)
        except ValidationError as e:
            raise ConfigError(f"invalid target: {e}") from e

    def out_dir(self, override: Path | None = None) -> Path:
        """Output directory; ``override`` wins over the config."""
        return override if override is not None else self.experiment.out


_SECTIONS: dict[str, type[BaseModel]] = {
    "experiment": ExperimentSection,
    "sim": SimConfig,
    "disturbance": DisturbanceSection,
    "gains": Gains,
    "ppo": PPOConfig,
    "reward": RewardWeights,
    "bench": BenchSection,
    "train": TrainSection,
}
_PATH_KEYS = {
    ("experiment", "profiles"),
    ("experiment", "checkpoint"),
    ("experiment", "out"),
}


def _scalar(text: str) -> object:
    lowered = text.lower()
    if lowered in ("true", "false"):
        return lowered == "true"
    for kind in (int, float):
        try:
            return kind(text)
        except ValueError:
            continue
    return text


def _tuple_length(annotation: object) -> int | None:
    """Fixed length of a (possibly optional) tuple annotation; -1 for variadic."""
    for candidate in (annotation, *typing.get_args(annotation)):
        if typing.get_origin(candidate) is tuple:
            args = typing.get_args(candidate)
            return -1 if len(args) == 2 and args[1] is Ellipsis else len(args)
    return None


def _section_values(block: Block, model: type[BaseModel]) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for key, entry in block.as_dict().items():
        if key not in model.model_fields:
            raise ConfigError(
                f"line {entry.line}, column {entry.column}: "
                f"unknown key '{key}' in [{block.name}]"
            )
        items = split_list(entry.value)
        length = _tuple_length(model.model_fields[key].annotation)
        if len(items) > 1:
            values[key] = [_scalar(item) for item in items]
        elif length == -1:
            values[key] = [_scalar(items[0])]
        elif length is not None and length > 1:
            values[key] = [_scalar(items[0])] * length
        else:
            values[key] = _scalar(items[0])
    return values


def _resolve(base_dir: Path, value: Path | str) -> Path:
    return (base_dir / Path(value)).resolve()


def _resolve_paths(sections: dict[str, dict[str, Any]], base_dir: Path) -> None:
    experiment = sections.setdefault("experiment", {})
    for section, key in _PATH_KEYS:
        if key in sections.get(section, {}):
            sections[section][key] = _resolve(base_dir, str(sections[section][key]))
    chain = experiment.get("chain")
    if chain is not None and not str(chain).startswith(BUILTIN_PREFIX):
        experiment["chain"] = str(_resolve(base_dir, str(chain)))
    bench = sections.get("bench", {})
    if "methods" in bench:
        methods = bench["methods"]
        methods = methods if isinstance(methods, list) else [methods]
        bench["methods"] = [
            POLICY_PREFIX + str(_resolve(base_dir, method.removeprefix(POLICY_PREFIX)))
            if str(method).startswith(POLICY_PREFIX)
            else str(method)
            for method in methods
        ]


def _check_inputs(config: ExperimentConfig) -> None:
    missing = []
    chain = config.experiment.chain
    if not chain.startswith(BUILTIN_PREFIX) and not Path(chain).is_file():
        missing.append(f"chain '{chain}'")
    for name in ("profiles", "checkpoint"):
        path = getattr(config.experiment, name)
        if path is not None and not path.is_file():
            missing.append(f"{name} '{path}'")
    for method in config.bench.methods:
        if method.startswith(POLICY_PREFIX):
            path = Path(method.removeprefix(POLICY_PREFIX))
            if not path.is_file():
                missing.append(f"checkpoint of method '{method}'")
    if missing:
        raise ConfigError("referenced files do not exist: " + ", ".join(missing))
    for scenario in (config.disturbance.scenario, config.train.held_out_scenario):
        if scenario is not None and scenario not in SCENARIOS:
            raise ConfigError(
                f"unknown scenario '{scenario}'; expected one of {sorted(SCENARIOS)}"
            )
    problems = config.disturbance.ranges().problems()
    if problems:
        raise ConfigError("[disturbance]: " + "; ".join(problems))


def parse_config(text: str, base_dir: Path) -> ExperimentConfig:
    """
    Validate a config document.

    Args:
        text: The document.
        base_dir: Directory relative paths resolve against.

    Returns:
        The config with every seed derived from ``[experiment] seed``.

    Raises:
        ConfigError: For syntax errors, unknown sections or keys, invalid
            values, seeds outside ``[experiment]`` or missing files.

    """
    try:
        blocks = parse_blocks(text)
    except DocumentSyntaxError as e:
        raise ConfigError(str(e)) from e
    if blocks[0].entries:
        entry = blocks[0].entries[0]
        raise ConfigError(f"line {entry.line}: entry '{entry.key}' outside a section")

    sections: dict[str, dict[str, Any]] = {}
    try:
        for block in blocks[1:]:
            if block.name not in _SECTIONS:
                raise ConfigError(f"line {block.line}: unknown section [{block.name}]")
            if block.name in sections:
                raise ConfigError(
                    f"line {block.line}: duplicate section [{block.name}]"
                )
            if block.name in ("sim", "ppo") and "seed" in block.as_dict():
                raise ConfigError(f"[{block.name}]: seeds are set in [experiment]")
            sections[block.name] = _section_values(block, _SECTIONS[block.name])
    except DocumentSyntaxError as e:
        raise ConfigError(str(e)) from e

    _resolve_paths(sections, base_dir)
    try:
        config = ExperimentConfig.model_validate({**sections, "base_dir": base_dir})
    except ValidationError as e:
        raise ConfigError(f"invalid config: {e}") from e
    _check_inputs(config)
    return config.with_seed(config.experiment.seed)


def load_config(path: Path | None, seed: int | None = None) -> ExperimentConfig:
    """
    Read a config file, or the defaults when ``path`` is ``None``.

    Args:
        path: Config file.
        seed: Overrides ``[experiment] seed``.

    Raises:
        ConfigError: If the file cannot be read or is invalid.

    """
    if path is None:
        config = ExperimentConfig(base_dir=Path.cwd())
    else:
        try:
            text = path.read_text(encoding="utf-8")
        except OSError as e:
            raise ConfigError(f"cannot read config {path}: {e}") from e
        config = parse_config(text, path.resolve().parent)
        logger.info(f"Loaded experiment config {path}")
    if seed is not None:
        config = config.with_seed(seed)
    return config
