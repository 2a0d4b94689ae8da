"""Exception hierarchy shared by every steady-arm module."""


class SteadyArmError(Exception):
    """Base exception for steady-arm errors."""

    pass


class DocumentSyntaxError(SteadyArmError):
    """Raised when a text document violates the ``key = value`` line grammar."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        """
        Initialize the syntax error.

        Args:
            message: What is wrong.
            line: 1-based line number, 0 when the error is document-wide.
            column: 1-based column number, 0 when unknown.

        """
        self.line = line
        self.column = column
        self.message = message
        location = f"line {line}, column {column}: " if line else ""
        super().__init__(f"{location}{message}")


class ChainError(SteadyArmError):
    """Raised when a chain description cannot be turned into a model."""

    pass


class ChainSyntaxError(ChainError, DocumentSyntaxError):
    """Raised when a chain document violates the chain grammar."""

    pass


class ChainSemanticError(ChainError):
    """Raised when a well-formed chain document describes an invalid model."""

    def __init__(self, field_path: str, message: str):
        """
        Initialize the semantic error.

        Args:
            field_path: Dotted path of the offending field, e.g. ``links[0].mass``.
            message: The violated rule.

        """
        self.field_path = field_path
        self.message = message
        super().__init__(f"{field_path}: {message}")


class ConfigError(SteadyArmError):
    """Raised when an experiment config file is malformed or inconsistent."""

    pass


class ProfileError(SteadyArmError):
    """Raised for invalid disturbance ranges or profile documents."""

    pass


class SimulationError(SteadyArmError):
    """Base exception for simulation failures."""

    pass


class RolloutAbortedError(SimulationError):
    """Raised when the dynamics produce non-finite values during a rollout."""

    def __init__(self, time: float, diagnostic: str, partial: object | None = None):
        """
        Initialize the abort error.

        Args:
            time: Simulation time of the failing step in seconds.
            diagnostic: Description of the non-finite quantity.
            partial: Rollout log of the steps completed before the failure.

        """
        self.time = time
        self.diagnostic = diagnostic
        self.partial = partial
        super().__init__(f"rollout aborted at t={time:.4f}s: {diagnostic}")


class TrainingError(SteadyArmError):
    """Raised when a policy update produces a non-finite loss."""

    pass


class CheckpointError(SteadyArmError):
    """Raised when a policy checkpoint cannot be read or written."""

    pass


class MetricsError(SteadyArmError):
    """Raised when metrics are requested from unusable data."""

    pass
