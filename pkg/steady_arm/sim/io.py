"""
Rollout logs as CSV.

One row per record; the column order is ``t``, ``q_i``, ``qd_i``, ``tau_i``
for every joint, the end-effector position ``ee_x, ee_y, ee_z`` and
orientation ``ee_qw, ee_qx, ee_qy, ee_qz``, then six columns each of
``a_loc``, ``a_base``, ``a_glob``, ``V_b`` and ``A_b``.
"""

import csv
import logging
from pathlib import Path

import numpy as np

from steady_arm.errors import SimulationError
from steady_arm.sim.models import RolloutLog
from steady_arm.textformat import format_float

logger = logging.getLogger(__name__)

_SIX = ("a_loc", "a_base", "a_glob", "V_b", "A_b")
_SIX_FIELDS = ("a_ee_loc", "a_ee_base", "a_ee_glob", "V_b", "A_b")
_EE = ("ee_x", "ee_y", "ee_z", "ee_qw", "ee_qx", "ee_qy", "ee_qz")


def log_columns(n: int) -> list[str]:
    """Header of a log for an ``n``-joint arm."""
    columns = ["t"]
    for prefix in ("q", "qd", "tau"):
        columns.extend(f"{prefix}_{i}" for i in range(n))
    columns.extend(_EE)
    for prefix in _SIX:
        columns.extend(f"{prefix}_{i}" for i in range(6))
    return columns


def log_matrix(log: RolloutLog) -> np.ndarray:
    """Rows of the CSV as a float matrix."""
    return np.column_stack(
        [
            log.t,
            log.q,
            log.qdot,
            log.tau,
            log.ee_position,
            log.ee_orientation,
            *(getattr(log, name) for name in _SIX_FIELDS),
        ]
    )


def write_log_csv(log: RolloutLog, path: Path) -> None:
    """Write a log with round-trip float precision."""
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(log_columns(log.n))
        for row in log_matrix(log):
            writer.writerow(format_float(value) for value in row)
    logger.info(f"Wrote rollout log with {len(log)} records to {path}")


def read_log_csv(path: Path) -> RolloutLog:
    """
    Read a log written by ``write_log_csv``.

    Raises:
        SimulationError: If the file is missing or its header is not a log header.

    """
    try:
        with path.open(newline="", encoding="utf-8") as handle:
            rows = list(csv.reader(handle))
    except OSError as e:
        raise SimulationError(f"cannot read rollout log {path}: {e}") from e
    if not rows:
        raise SimulationError(f"rollout log {path} is empty")

    header = rows[0]
    n = sum(1 for column in header if column.startswith("q_"))
    if header != log_columns(n):
        raise SimulationError(f"{path} does not have a rollout log header")
    try:
        data = np.array([[float(value) for value in row] for row in rows[1:]])
    except ValueError as e:
        raise SimulationError(f"non-numeric value in {path}: {e}") from e
    data = data.reshape(-1, len(header))

    offset = 1
    blocks: dict[str, np.ndarray] = {"t": data[:, 0]}
    for name, width in (
        ("q", n),
        ("qdot", n),
        ("tau", n),
        ("ee_position", 3),
        ("ee_orientation", 4),
        *((field, 6) for field in _SIX_FIELDS),
    ):
        blocks[name] = data[:, offset : offset + width]
        offset += width
    return RolloutLog(**blocks)
