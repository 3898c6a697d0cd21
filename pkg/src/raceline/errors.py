"""Exception taxonomy shared across the package.

Each class maps to one CLI exit code: UsageError -> 1, ConfigError and
CheckpointError -> 2, TrainingError -> 3.
"""


class RacelineError(Exception):
    """Base class for all errors raised by this package."""


class ConfigError(RacelineError):
    """Invalid configuration, track file, or network architecture."""


class UsageError(RacelineError):
    """An operation was called in a way its contract forbids."""


class TrainingError(RacelineError):
    """Numerical failure during training (non-finite loss or gradient)."""


class CheckpointError(RacelineError):
    """Corrupt or incompatible checkpoint file."""
