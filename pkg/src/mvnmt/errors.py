"""Exception types raised across the package."""


class MVNMTError(Exception):
    """Base class for all library errors."""

    kind = "error"


class ConfigError(MVNMTError, ValueError):
    kind = "config"


class ShapeError(MVNMTError, ValueError):
    kind = "shape"


class InvalidDistributionError(MVNMTError, ValueError):
    kind = "invalid-distribution"


class EmptyBatchError(MVNMTError, ValueError):
    kind = "empty-batch"


class CheckpointError(MVNMTError):
    kind = "checkpoint"


class ConfigMismatchError(CheckpointError):
    kind = "config-mismatch"


class IntegrityError(CheckpointError):
    kind = "integrity"


class NonFiniteLossError(MVNMTError, FloatingPointError):
    """Raised by the trainer when a loss or gradient stops being finite.

    The ``diagnostics`` dict carries the step, every loss component and the
    per-parameter gradient norms at the moment of failure.
    """

    kind = "non-finite-loss"

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}
