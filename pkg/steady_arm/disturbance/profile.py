"""
Base-acceleration profiles: sampling, evaluation, integration and files.

A profile's acceleration is a sum over components of a periodic train of
unit-peak Gaussian impulses, centred at integer multiples of the period, and
a sinusoidal sway::

    A_b(t) = sum_k p_k g(t; T_k) + s_k sin(2 pi t / T_k + phi_k)
"""

import logging
import math
from collections.abc import Sequence
from pathlib import Path

import numpy as np
from numpy.typing import ArrayLike
from pydantic import ValidationError

from steady_arm.disturbance.models import (
    BaseMotionSeries,
    DisturbanceComponent,
    DisturbanceProfile,
    ProfileRanges,
)
from steady_arm.errors import DocumentSyntaxError, ProfileError
from steady_arm.textformat import dump_blocks, parse_blocks, parse_floats
from steady_arm.utils import FloatArray

logger = logging.getLogger(__name__)

FORMAT_HEADER = "steady-arm disturbance profiles"
IMPULSE_SUPPORT = 8.0  # impulse widths beyond which a bump is dropped
GRID_TOLERANCE = 1e-9


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based generator; distinct seeds give independent streams."""
    return np.random.Generator(np.random.Philox(seed))


def sample_profile(
    seed: int, ranges: ProfileRanges | None = None
) -> DisturbanceProfile:
    """
    Draw a disturbance profile.

    Periods are log-uniform, amplitudes and phases uniform, all inside
    ``ranges``; amplitudes are then scaled per axis by ``ranges.axis_scale``.

    Args:
        seed: Generator seed; the same seed always yields the same profile.
        ranges: Sampling ranges, the documented defaults when omitted.

    Returns:
        The sampled profile, carrying ``seed``.

    Raises:
        ProfileError: If a range is empty or inverted.

    """
    ranges = ranges or ProfileRanges()
    problems = ranges.problems()
    if problems:
        raise ProfileError("; ".join(problems))

    rng = make_rng(seed)
    scale = np.asarray(ranges.axis_scale)
    log_low, log_high = (math.log(bound) for bound in ranges.period)
    components = []
    for _ in range(ranges.n_components):
        period = float(np.exp(rng.uniform(log_low, log_high)))
        impulse = rng.uniform(*ranges.impulse, size=6) * scale
        sway = rng.uniform(*ranges.sway, size=6) * scale
        phase = float(rng.uniform(*ranges.phase))
        components.append(
            DisturbanceComponent(
                period=min(max(period, ranges.period[0]), ranges.period[1]),
                impulse=tuple(float(value) for value in impulse),
                sway=tuple(float(value) for value in sway),
                phase=phase,
            )
        )
    return DisturbanceProfile(
        components=tuple(components), impulse_std=ranges.impulse_std, seed=seed
    )


def impulse_train(t: FloatArray, period: float, std: float) -> FloatArray:
    """Unit-peak Gaussian bumps centred at ``j * period`` for ``j >= 0``."""
    reach = math.ceil(IMPULSE_SUPPORT * std / period) + 1
    nearest = np.round(t / period)
    total = np.zeros_like(t)
    for offset in range(-reach, reach + 1):
        index = nearest + offset
        centre = index * period
        bump = np.exp(-0.5 * ((t - centre) / std) ** 2)
        total += np.where(index >= 0, bump, 0.0)
    return total


def eval_accel(profile: DisturbanceProfile, t: ArrayLike) -> FloatArray:
    """
    Base spatial acceleration ``A_b(t)``.

    Args:
        profile: The disturbance profile.
        t: A time or an array of times (s).

    Returns:
        A 6-vector for scalar ``t``, otherwise an ``(len(t), 6)`` array.

    """
    times = np.asarray(t, dtype=float)
    flat = np.atleast_1d(times)
    total = np.zeros((flat.shape[0], 6))
    for component in profile.components:
        bumps = impulse_train(flat, component.period, profile.impulse_std)
        swing = np.sin(2.0 * math.pi * flat / component.period + component.phase)
        total += np.outer(bumps, component.impulse) + np.outer(swing, component.sway)
    return total[0] if times.ndim == 0 else total


def integrate_accel(accel: FloatArray, dt: float) -> FloatArray:
    """Trapezoidal running integral of a sampled series, starting at zero."""
    velocity = np.zeros_like(accel)
    if accel.shape[0] > 1:
        increments = 0.5 * dt * (accel[1:] + accel[:-1])
        velocity[1:] = np.cumsum(increments, axis=0)
    return velocity


def integrate_twist(
    profile: DisturbanceProfile, t_grid: ArrayLike, dt: float | None = None
) -> BaseMotionSeries:
    """
    Base twist and acceleration on a uniform grid, with ``V_b(t_grid[0]) = 0``.

    Args:
        profile: The disturbance profile.
        t_grid: Uniform, increasing times.
        dt: Grid spacing; inferred from the grid when omitted.

    Returns:
        Paired ``V_b`` and ``A_b`` for every grid point.

    Raises:
        ProfileError: If the grid is not uniform with spacing ``dt``.

    """
    grid = np.asarray(t_grid, dtype=float).reshape(-1)
    if grid.shape[0] > 1:
        steps = np.diff(grid)
        spacing = float(steps[0]) if dt is None else dt
        if spacing <= 0 or np.max(np.abs(steps - spacing)) > GRID_TOLERANCE * max(
            1.0, spacing
        ):
            raise ProfileError("time grid must be uniform and increasing")
    else:
        spacing = dt or 0.0
    accel = eval_accel(profile, grid)
    return BaseMotionSeries(t=grid, V_b=integrate_accel(accel, spacing), A_b=accel)


def _component_values(component: DisturbanceComponent) -> list[float]:
    return [component.period, *component.impulse, *component.sway, component.phase]


def serialize_profiles(profiles: Sequence[DisturbanceProfile]) -> str:
    """
    Write profiles, one ``[profile]`` section each.

    Each component is a single ``component = T, p(6), s(6), phi`` line.
    """
    sections = []
    for profile in profiles:
        entries: list[tuple[str, object]] = [
            ("seed", profile.seed),
            ("impulse_std", float(profile.impulse_std)),
        ]
        entries.extend(
            ("component", _component_values(component))
            for component in profile.components
        )
        sections.append(("profile", entries))
    return dump_blocks([], sections, header=FORMAT_HEADER)


def parse_profiles(text: str) -> list[DisturbanceProfile]:
    """
    Read profiles written by ``serialize_profiles``.

    Raises:
        ProfileError: For syntax errors or invalid values.

    """
    try:
        blocks = parse_blocks(text)
    except DocumentSyntaxError as e:
        raise ProfileError(str(e)) from e
    if blocks[0].entries:
        raise ProfileError("entries outside a [profile] section")

    profiles = []
    for block in blocks[1:]:
        if block.name != "profile":
            raise ProfileError(f"line {block.line}: unknown section [{block.name}]")
        values: dict[str, object] = {}
        components = []
        try:
            for entry in block.entries:
                if entry.key == "component":
                    row = parse_floats(entry, 14)
                    components.append(
                        {
                            "period": row[0],
                            "impulse": row[1:7],
                            "sway": row[7:13],
                            "phase": row[13],
                        }
                    )
                elif entry.key == "seed":
                    values["seed"] = int(entry.value)
                elif entry.key == "impulse_std":
                    values["impulse_std"] = parse_floats(entry, 1)[0]
                else:
                    raise ProfileError(f"line {entry.line}: unknown key '{entry.key}'")
            profiles.append(
                DisturbanceProfile.model_validate({**values, "components": components})
            )
        except (DocumentSyntaxError, ValidationError, ValueError) as e:
            raise ProfileError(f"invalid profile at line {block.line}: {e}") from e
    return profiles


def load_profiles(path: Path) -> list[DisturbanceProfile]:
    """Read a profile file."""
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise ProfileError(f"cannot read profile file {path}: {e}") from e
    profiles = parse_profiles(text)
    logger.info(f"Loaded {len(profiles)} disturbance profile(s) from {path}")
    return profiles


def save_profiles(profiles: Sequence[DisturbanceProfile], path: Path) -> None:
    """Write a profile file."""
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(serialize_profiles(profiles), encoding="utf-8")
    logger.info(f"Wrote {len(profiles)} disturbance profile(s) to {path}")


def sample_profiles(
    seed: int, count: int, ranges: ProfileRanges | None = None, stream: int = 0
) -> list[DisturbanceProfile]:
    """
    Draw ``count`` profiles from one seed.

    Profile seeds come from child ``stream`` of the generator seeded with
    ``seed``; different streams give independent profile sets, and the
    first ``k`` profiles do not depend on ``count``.
    """
    child = make_rng(seed).spawn(stream + 1)[stream]
    seeds = child.integers(0, 2**31 - 1, size=count)
    return [sample_profile(int(profile_seed), ranges) for profile_seed in seeds]
