import json
import logging
from pathlib import Path

import pytest
from typer.testing import CliRunner, Result

from steady_arm.commands import verify as verify_command
from steady_arm.eval.oracles import CheckResult, VerifyReport
from steady_arm.main import EXIT_USAGE, app

runner = CliRunner()

SHORT_CONFIG = """
[experiment]
seed = 3
n_profiles = 2

[sim]
duration = 0.6
noise_q = 0.001

[disturbance]
scenario = planar

[bench]
methods = pd_hold, ideal
profiles = 1
rollouts = 1
"""


def invoke(args: list[str]) -> Result:
    """Run the app, then put back the root handlers it replaced."""
    root = logging.getLogger()
    handlers, level = root.handlers[:], root.level
    try:
        return runner.invoke(app, args)
    finally:
        root.handlers[:] = handlers
        root.setLevel(level)


@pytest.fixture
def config_file(tmp_path: Path) -> Path:
    path = tmp_path / "short.cfg"
    path.write_text(SHORT_CONFIG, encoding="utf-8")
    return path


def error_line(output: str) -> dict[str, str]:
    line = next(line for line in output.splitlines() if line.startswith("error: "))
    return json.loads(line.removeprefix("error: "))


def test_simulate_is_reproducible(config_file: Path, tmp_path: Path) -> None:
    logs = []
    for run in ("first", "second"):
        out = tmp_path / run
        result = invoke(["simulate", "-c", str(config_file), "-o", str(out)])
        assert result.exit_code == 0, result.output
        logs.append((out / "rollout_ideal.csv").read_bytes())
    assert logs[0] == logs[1]


def test_seed_option_changes_the_rollout(config_file: Path, tmp_path: Path) -> None:
    logs = []
    for seed in ("3", "4"):
        out = tmp_path / seed
        result = invoke(
            ["simulate", "-c", str(config_file), "--seed", seed, "-o", str(out)]
        )
        assert result.exit_code == 0, result.output
        logs.append((out / "rollout_ideal.csv").read_bytes())
    assert logs[0] != logs[1]


def test_profile_gen(config_file: Path, tmp_path: Path) -> None:
    result = invoke(
        ["profile", "gen", "-c", str(config_file), "-o", str(tmp_path), "--count", "3"]
    )
    assert result.exit_code == 0, result.output
    text = (tmp_path / "profiles.txt").read_text(encoding="utf-8")
    assert text.count("[profile]") == 3


def test_bench_writes_both_reports(config_file: Path, tmp_path: Path) -> None:
    result = invoke(["bench", "-c", str(config_file), "-o", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "| pd_hold |" in (tmp_path / "bench.md").read_text(encoding="utf-8")
    assert (tmp_path / "bench.csv").is_file()


def test_plot_writes_svg(config_file: Path, tmp_path: Path) -> None:
    invoke(["simulate", "-c", str(config_file), "-o", str(tmp_path)])
    log = tmp_path / "rollout_ideal.csv"

    result = invoke(["plot", str(log), "-c", str(config_file), "-o", str(tmp_path)])

    assert result.exit_code == 0, result.output
    svg = (tmp_path / "accel.svg").read_text(encoding="utf-8")
    assert svg.lstrip().startswith("<?xml")


def test_bad_config_exits_with_usage_code(tmp_path: Path) -> None:
    path = tmp_path / "bad.cfg"
    path.write_text("[sim]\nsteps = 10\n", encoding="utf-8")

    result = invoke(["simulate", "-c", str(path)])

    assert result.exit_code == EXIT_USAGE
    error = error_line(result.output)
    assert error["kind"] == "ConfigError"
    assert "unknown key" in error["message"]


def test_unknown_method_exits_with_usage_code(config_file: Path) -> None:
    result = invoke(["simulate", "-c", str(config_file), "--method", "lqr"])
    assert result.exit_code == EXIT_USAGE
    assert error_line(result.output)["kind"] == "ValueError"


def test_missing_checkpoint_exits_with_usage_code(
    config_file: Path, tmp_path: Path
) -> None:
    method = "policy:" + str(tmp_path / "none.ckpt")
    result = invoke(
        ["simulate", "-c", str(config_file), "-o", str(tmp_path), "--method", method]
    )
    assert result.exit_code == EXIT_USAGE
    assert error_line(result.output)["kind"] == "CheckpointError"


def test_verify_rejects_zero_samples() -> None:
    result = invoke(["verify", "--samples", "0"])
    assert result.exit_code == EXIT_USAGE


def test_verify_uses_seed_and_writes_report(
    monkeypatch: pytest.MonkeyPatch, config_file: Path, tmp_path: Path
) -> None:
    calls = []

    def fake_checks(samples: int, quick: bool, seed: int) -> VerifyReport:
        calls.append((samples, quick, seed))
        check = CheckResult(name="stub", passed=True, value=0.0, tolerance=1.0)
        return VerifyReport(checks=[check])

    monkeypatch.setattr(verify_command, "run_checks", fake_checks)

    result = invoke(
        ["verify", "-c", str(config_file), "--seed", "9", "-o", str(tmp_path)]
    )

    assert result.exit_code == 0, result.output
    assert calls == [(1000, False, 9)]
    report = json.loads((tmp_path / "verify.json").read_text(encoding="utf-8"))
    assert report["checks"][0]["name"] == "stub"


def test_logging_works_after_a_run(capsys: pytest.CaptureFixture[str]) -> None:
    invoke(["verify", "--samples", "0"])

    logging.getLogger("steady_arm").warning("after the command")

    assert "Logging error" not in capsys.readouterr().err


@pytest.mark.slow
def test_quick_verify_passes(tmp_path: Path) -> None:
    result = invoke(["verify", "--quick", "-o", str(tmp_path)])
    assert result.exit_code == 0, result.output
    assert "FAIL" not in result.output
