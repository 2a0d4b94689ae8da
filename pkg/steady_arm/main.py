"""Main entry point for the steady-arm laboratory."""

import json
import logging
import sys
from collections.abc import Callable, Iterator
from contextlib import contextmanager
from pathlib import Path
from typing import Annotated, NoReturn

import typer

from steady_arm.commands.bench import bench_logic
from steady_arm.commands.plot import plot_logic
from steady_arm.commands.profile import profile_gen_logic
from steady_arm.commands.simulate import simulate_logic
from steady_arm.commands.train import train_logic
from steady_arm.commands.verify import verify_logic
from steady_arm.config import ExperimentConfig, load_config
from steady_arm.constants import get_constants
from steady_arm.errors import (
    ChainError,
    CheckpointError,
    ConfigError,
    ProfileError,
    SteadyArmError,
)
from steady_arm.utils import ResponseWithMessage

logger = logging.getLogger(__name__)

EXIT_FAILURE = 1
EXIT_USAGE = 2

_USAGE_ERRORS = (ConfigError, ChainError, ProfileError, CheckpointError, ValueError)

ConfigOption = Annotated[
    Path | None, typer.Option("--config", "-c", help="Experiment config file.")
]
SeedOption = Annotated[
    int | None, typer.Option("--seed", help="Overrides [experiment] seed.")
]
OutOption = Annotated[
    Path | None, typer.Option("--out", "-o", help="Overrides [experiment] out.")
]

app = typer.Typer(
    name="steady-arm",
    help="End-effector stabilization laboratory for arms on moving bases.",
    no_args_is_help=True,
    add_completion=False,
)
profile_app = typer.Typer(help="Disturbance profiles.", no_args_is_help=True)
app.add_typer(profile_app, name="profile")


def setup_logging(log_level: str = "INFO") -> None:
    """Configure logging for the command line."""
    numeric_level = getattr(logging, log_level.upper(), logging.INFO)

    formatter = logging.Formatter(
        fmt="%(asctime)s - %(name)s - %(levelname)s - [%(filename)s:%(lineno)d]"
        " - %(message)s",
        datefmt="%Y-%m-%d %H:%M:%S",
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(numeric_level)

    for handler in root_logger.handlers[:]:
        root_logger.removeHandler(handler)

    console_handler = logging.StreamHandler(sys.stdout)
    console_handler.setFormatter(formatter)
    root_logger.addHandler(console_handler)


def _fail(kind: str, message: str, code: int) -> NoReturn:
    logger.error(message)
    typer.echo("error: " + json.dumps({"kind": kind, "message": message}), err=True)
    raise typer.Exit(code)


@contextmanager
def _exit_codes() -> Iterator[None]:
    """Convert domain errors into the documented exit codes."""
    try:
        yield
    except _USAGE_ERRORS as e:
        _fail(type(e).__name__, str(e), EXIT_USAGE)
    except SteadyArmError as e:
        _fail(type(e).__name__, str(e), EXIT_FAILURE)


def _run[T](action: Callable[[], ResponseWithMessage[T]]) -> ResponseWithMessage[T]:
    with _exit_codes():
        response = action()
    typer.echo(response.message)
    return response


def _config(path: Path | None, seed: int | None) -> ExperimentConfig:
    with _exit_codes():
        config = load_config(path, seed)
    logger.info(f"Experiment seed {config.seed}, chain {config.experiment.chain}")
    return config


@app.callback()
def startup(
    log_level: Annotated[
        str | None, typer.Option("--log-level", help="Logging level.")
    ] = None,
) -> None:
    """Set up logging and validate the built-in defaults."""
    constants = get_constants()
    setup_logging(log_level or constants.LOG_LEVEL)

    logger.info("Starting steady-arm")
    logger.info("=" * 50)
    logger.info("Defaults:")
    for key, value in constants.get_masked_config().items():
        logger.info(f"  {key}: {value}")

    errors = constants.validate_config()
    if errors:
        logger.error("Default configuration is invalid:")
        for error in errors:
            logger.error(error)
        _fail("ConfigError", "; ".join(errors), EXIT_USAGE)
    logger.info("=" * 50)


@app.command()
def verify(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    samples: Annotated[
        int, typer.Option(help="Configurations for the Jacobian check.")
    ] = 1000,
    quick: Annotated[bool, typer.Option(help="Smaller sample counts.")] = False,
) -> None:
    """Run the numerical self-checks; exit 1 if any fails."""
    experiment = _config(config, seed)
    response = _run(
        lambda: verify_logic(samples, quick, experiment.seed, experiment.out_dir(out))
    )
    for check in response.data.checks:
        status = "pass" if check.passed else "FAIL"
        typer.echo(
            f"{status}  {check.name}  {check.value:.3e} "
            f"(tolerance {check.tolerance:.0e})"
        )
    if not response.data.passed:
        _fail("CheckFailed", response.message, EXIT_FAILURE)


@profile_app.command("gen")
def profile_gen(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    count: Annotated[
        int | None, typer.Option(help="Overrides [experiment] n_profiles.")
    ] = None,
) -> None:
    """Sample disturbance profiles and write them."""
    experiment = _config(config, seed)
    _run(lambda: profile_gen_logic(experiment, out, count))


@app.command()
def simulate(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    method: Annotated[
        str, typer.Option(help="pd_hold, task_only, ideal or policy:<checkpoint>.")
    ] = "ideal",
    profile: Annotated[int, typer.Option(help="Experiment profile index.")] = 0,
) -> None:
    """Roll out one method and write its log."""
    experiment = _config(config, seed)
    _run(lambda: simulate_logic(experiment, method, profile, out))


@app.command()
def bench(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
) -> None:
    """Benchmark the configured methods on paired rollouts."""
    experiment = _config(config, seed)
    response = _run(lambda: bench_logic(experiment, out))
    typer.echo(response.data.markdown.read_text(encoding="utf-8"))


@app.command()
def train(
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    iterations: Annotated[
        int | None, typer.Option(help="Overrides [ppo] iterations.")
    ] = None,
) -> None:
    """Train the residual policy and evaluate it on held-out profiles."""
    experiment = _config(config, seed)
    _run(lambda: train_logic(experiment, out, iterations))


@app.command()
def plot(
    logs: Annotated[list[Path], typer.Argument(help="Rollout log CSVs.")],
    config: ConfigOption = None,
    seed: SeedOption = None,
    out: OutOption = None,
    name: Annotated[str, typer.Option(help="Figure file name.")] = "accel.svg",
) -> None:
    """Plot end-effector acceleration against time to SVG."""
    experiment = _config(config, seed)
    _run(lambda: plot_logic(logs, experiment.out_dir(out), name))


def main() -> None:
    """Entry point for the steady-arm command line."""
    try:
        app()
    except KeyboardInterrupt:
        logger.info("Received shutdown signal (Ctrl+C)")
        sys.exit(EXIT_FAILURE)


if __name__ == "__main__":
    main()
