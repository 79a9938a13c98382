"""Exception types shared across the simulator."""


class MetisError(Exception):
    """Base class for all domain errors."""


class DegenerateBounds(MetisError):
    """Scenario bounding box has zero extent on some axis."""


class ParseError(MetisError):
    """Scenario document is malformed.

    ``location`` is a JSON-path-like string pointing at the offending node,
    e.g. ``"walls[2].thickness"``.
    """

    def __init__(self, message: str, location: str = ""):
        super().__init__(f"{message} (at {location})" if location else message)
        self.location = location


class VersionError(MetisError):
    """Scenario or checkpoint schema version is not supported."""


class ShapeError(MetisError):
    """Sequence lengths passed to a numeric routine do not agree."""


class EmptyBatch(MetisError):
    """An optimization step was requested on an empty batch."""


class CheckpointError(MetisError):
    """Checkpoint bytes are corrupt, truncated or of an unknown version."""


class IncompatiblePolicy(MetisError):
    """Policy network input width does not match the observation length."""


class SimEnded(MetisError):
    """A command was sent to a simulation that has already ended."""


class InvalidArea(MetisError):
    """Episode recorded against a spawn area outside the unlocked range."""


class TrainingDiverged(MetisError):
    """Loss became non-finite; carries the last good checkpoint bytes."""

    def __init__(self, message: str, last_good_checkpoint: bytes | None = None):
        super().__init__(message)
        self.last_good_checkpoint = last_good_checkpoint
