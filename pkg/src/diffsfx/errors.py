"""Exception types shared across the engine."""


class DiffsfxError(Exception):
    """Base class for engine errors."""


class InputError(DiffsfxError, ValueError):
    """Caller-supplied data violates a precondition (bad shape, range, file)."""


class ConfigError(DiffsfxError, ValueError):
    """Inconsistent configuration (shape/parameter mismatch between components)."""


class CheckpointError(DiffsfxError):
    """Checkpoint cannot be read or does not match the running configuration."""


class NumericsError(DiffsfxError):
    """A numerical routine produced NaN/Inf or failed to converge."""
