from pathlib import Path

import numpy as np
import pytest
from scipy.spatial.transform import Rotation

from steady_arm.chain.models import ChainModel
from steady_arm.control import Gains
from steady_arm.disturbance import sample_profiles, scenario_ranges
from steady_arm.errors import MetricsError, SteadyArmError
from steady_arm.eval import (
    BenchmarkRow,
    BenchmarkTable,
    StabilityMetrics,
    aggregate,
    benchmark,
    build_controller,
    compute_metrics,
    double_diff_accel,
    emit_markdown,
    read_benchmark_csv,
    write_benchmark_csv,
)
from steady_arm.eval.metrics import remove_outliers
from steady_arm.eval.oracles import check_double_diff
from steady_arm.sim import RolloutLog, SimConfig


def synthetic_log(t: np.ndarray, a_glob: np.ndarray) -> RolloutLog:
    count = t.shape[0]
    zeros = np.zeros((count, 6))
    return RolloutLog(
        t=t,
        q=np.zeros((count, 2)),
        qdot=np.zeros((count, 2)),
        tau=np.zeros((count, 2)),
        ee_position=np.zeros((count, 3)),
        ee_orientation=np.tile([1.0, 0.0, 0.0, 0.0], (count, 1)),
        a_ee_loc=a_glob,
        a_ee_base=zeros,
        a_ee_glob=a_glob,
        V_b=zeros,
        A_b=zeros,
    )


def metrics(mean_lin: float, max_lin: float) -> StabilityMetrics:
    return StabilityMetrics(mean_lin=mean_lin, max_lin=max_lin, mean_ang=0, max_ang=0)


def test_metrics_skip_the_warm_up() -> None:
    t = np.arange(11) * 0.1
    a_glob = np.tile([3.0, 0.0, 4.0, 0.0, 0.0, 2.0], (11, 1))
    a_glob[:5] = 100.0

    scored = compute_metrics(synthetic_log(t, a_glob), warmup=0.5)

    assert scored.mean_lin == pytest.approx(5.0)
    assert scored.max_lin == pytest.approx(5.0)
    assert scored.mean_ang == pytest.approx(2.0)
    assert scored.max_ang == pytest.approx(2.0)


def test_metrics_need_records_after_warm_up() -> None:
    t = np.arange(3) * 0.1
    with pytest.raises(MetricsError, match="warm-up"):
        compute_metrics(synthetic_log(t, np.zeros((3, 6))), warmup=0.5)


def test_aggregate_uses_population_spread() -> None:
    summary = aggregate([metrics(1.0, 4.0), metrics(3.0, 8.0)])
    assert summary.mean_lin == pytest.approx(2.0)
    assert summary.mean_lin_std == pytest.approx(1.0)
    assert summary.max_lin == pytest.approx(6.0)
    assert summary.max_lin_std == pytest.approx(2.0)
    assert summary.rollouts == 2
    with pytest.raises(MetricsError):
        aggregate([])


def test_double_diff_of_a_parabola() -> None:
    rate = 100.0
    t = np.arange(50) / rate
    positions = np.column_stack([t**2, np.zeros_like(t), -3.0 * t**2])
    orientations = Rotation.from_euler("z", 2.0 * t).as_quat(scalar_first=True)

    lin, ang = double_diff_accel(positions, orientations, rate)

    assert lin.shape == ang.shape == (50, 3)
    assert np.allclose(lin, [2.0, 0.0, -6.0], atol=1e-6)
    assert np.allclose(ang, 0.0, atol=1e-6)


def test_double_diff_recovers_sinusoid_with_glitch() -> None:
    result = check_double_diff()
    assert result.passed, result


def test_double_diff_rejects_bad_input() -> None:
    identity = np.tile([1.0, 0.0, 0.0, 0.0], (5, 1))
    with pytest.raises(MetricsError, match="rate"):
        double_diff_accel(np.zeros((5, 3)), identity, 0.0)
    with pytest.raises(MetricsError, match="at least 3"):
        double_diff_accel(np.zeros((2, 3)), identity[:2], 120.0)


def test_outliers_are_infilled() -> None:
    series = np.ones((9, 3))
    series[4] = [50.0, 50.0, 50.0]
    cleaned, removed = remove_outliers(series, 5.0)
    assert removed == 1
    assert np.allclose(cleaned, 1.0)


def test_unknown_method() -> None:
    with pytest.raises(ValueError, match="unknown method"):
        build_controller("lqr", Gains())


def test_single_cell_benchmark(two_link: ChainModel) -> None:
    profiles = sample_profiles(0, 1, scenario_ranges("planar"))
    config = SimConfig(duration=0.6)

    table = benchmark(two_link, ["ideal"], profiles, 1, None, config)

    assert [row.method for row in table.rows] == ["ideal"]
    row = table.row("ideal")
    assert not row.failed
    assert row.mean_lin_std == 0.0
    assert row.max_lin >= row.mean_lin > 0.0


def test_benchmark_rejects_empty_grid(two_link: ChainModel) -> None:
    profiles = sample_profiles(0, 1)
    with pytest.raises(ValueError, match="at least 1"):
        benchmark(two_link, ["ideal"], profiles, 0, None, SimConfig())
    with pytest.raises(ValueError, match="at least one method"):
        benchmark(two_link, [], profiles, 1, None, SimConfig())


def table_with_failure() -> BenchmarkTable:
    return BenchmarkTable(
        rows=[
            BenchmarkRow(
                method="ideal",
                mean_lin=0.125,
                mean_lin_std=0.01,
                max_lin=1.5,
                max_lin_std=0.25,
                mean_ang=0.1,
                mean_ang_std=0.0,
                max_ang=2.0,
                max_ang_std=1.0 / 3.0,
            ),
            BenchmarkRow(method="policy:diverged.ckpt"),
        ]
    )


def test_markdown_marks_failed_methods() -> None:
    lines = emit_markdown(table_with_failure()).splitlines()
    assert lines[0].startswith("| Method |")
    assert lines[2] == (
        "| ideal | 0.125 ± 0.010 | 1.500 ± 0.250 | 0.100 ± 0.000 | 2.000 ± 0.333 |"
    )
    assert lines[3] == "| policy:diverged.ckpt | -- | -- | -- | -- |"


def test_benchmark_csv_round_trip(tmp_path: Path) -> None:
    table = table_with_failure()
    path = tmp_path / "bench.csv"

    write_benchmark_csv(table, path)

    assert read_benchmark_csv(path) == table
    assert path.read_text(encoding="utf-8").splitlines()[0] == (
        "method,mean_lin,std,max_lin,std,mean_ang,std,max_ang,std"
    )


@pytest.mark.slow
def test_compensation_beats_task_only_tracking(two_link: ChainModel) -> None:
    profiles = sample_profiles(7, 3, scenario_ranges("planar"))
    config = SimConfig(duration=4.0)

    table = benchmark(two_link, ["task_only", "ideal"], profiles, 1, None, config)

    assert table.row("ideal").mean_lin < table.row("task_only").mean_lin


@pytest.mark.slow
def test_compensation_beats_pd_hold(two_link: ChainModel) -> None:
    profiles = sample_profiles(7, 20, scenario_ranges("planar"))
    config = SimConfig(duration=4.0)

    table = benchmark(two_link, ["pd_hold", "ideal"], profiles, 1, None, config)

    assert table.row("ideal").mean_lin <= 0.6 * table.row("pd_hold").mean_lin


def test_foreign_benchmark_csv(tmp_path: Path) -> None:
    path = tmp_path / "bench.csv"
    path.write_text("method,score\nideal,1.0\n", encoding="utf-8")
    with pytest.raises(SteadyArmError, match="header"):
        read_benchmark_csv(path)
