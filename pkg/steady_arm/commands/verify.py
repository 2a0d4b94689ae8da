"""Command running the numerical self-checks."""

import logging
from pathlib import Path

from steady_arm.eval.oracles import VerifyReport, run_checks
from steady_arm.utils import ResponseWithMessage

logger = logging.getLogger(__name__)


def verify_logic(
    samples: int = 1000,
    quick: bool = False,
    seed: int = 0,
    out: Path | None = None,
) -> ResponseWithMessage[VerifyReport]:
    """
    Run every self-check on the builtin arms.

    Args:
        samples: Random configurations for the Jacobian check.
        quick: Reduce sample counts for a fast smoke run.
        seed: Seed of every sampled check.
        out: Directory for ``verify.json``; nothing is written if omitted.

    Returns:
        The report; the message names any failed checks.

    Raises:
        ValueError: If ``samples`` is not positive.

    """
    if samples < 1:
        raise ValueError(f"samples must be positive, got {samples}")
    logger.info(f"Running self-checks ({'quick' if quick else 'full'}, seed {seed})")
    report = run_checks(samples, quick, seed)
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        path = out / "verify.json"
        path.write_text(report.model_dump_json(indent=2), encoding="utf-8")
        logger.info(f"Wrote {path}")
    failed = [check.name for check in report.checks if not check.passed]
    if failed:
        message = f"{len(failed)} of {len(report.checks)} checks failed: " + ", ".join(
            failed
        )
    else:
        message = f"all {len(report.checks)} checks passed"
    return ResponseWithMessage(message=message, data=report)
