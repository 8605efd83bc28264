"""Custom exceptions for capsgan.

Every exception carries the process exit code the CLI reports for it.
"""

from typing import Optional, Any


class CapsGanException(Exception):
    """Base exception for capsgan."""

    exit_code: int = 1

    def __init__(self, message: str, details: Optional[dict[str, Any]] = None):
        self.message = message
        self.details = details or {}
        super().__init__(self.message)


class UsageException(CapsGanException):
    """Invalid use of an API or command."""

    exit_code = 2


class AutodiffUsageError(UsageException):
    """Backward called on something that cannot be differentiated."""
    pass


class RoutingConfigError(UsageException):
    """Invalid dynamic routing parameters."""
    pass


class ArchitectureError(UsageException):
    """Unknown architecture or unsupported network configuration."""
    pass


class MissingDigitCapsSourceError(UsageException):
    """capsgan2 needs real images as its DigitCaps source."""

    def __init__(self, action: str):
        super().__init__(
            f"capsgan2 needs real images as its DigitCaps source to {action}; pass --data",
            {"action": action}
        )


class InvalidRunConfigError(UsageException):
    """Run configuration failed validation."""
    pass


class ShapeError(UsageException):
    """Tensor shapes do not conform."""

    def __init__(self, op: str, message: str, **shapes: Any):
        super().__init__(f"{op}: {message}", {"op": op, **{k: tuple(v) for k, v in shapes.items()}})


class DataFormatException(CapsGanException):
    """Malformed input data."""

    exit_code = 3


class DatasetNotFoundError(DataFormatException):
    """Dataset file does not exist."""

    def __init__(self, path: str):
        super().__init__(f"Dataset file not found: {path}", {"path": path})


class IdxMagicError(DataFormatException):
    """IDX magic number is wrong."""
    pass


class IdxHeaderError(DataFormatException):
    """IDX header is shorter than its declared layout."""
    pass


class IdxSizeError(DataFormatException):
    """IDX payload length differs from what the header declares."""
    pass


class IdxTruncatedError(IdxSizeError):
    """IDX payload is shorter than the header declares."""
    pass


class IdxDimensionError(DataFormatException):
    """IDX images are not 28x28."""
    pass


class IdxCountMismatchError(DataFormatException):
    """Image and label files disagree on the item count."""
    pass


class IdxLabelRangeError(DataFormatException):
    """A label lies outside [0, 9]."""
    pass


class ProbabilityMatrixError(DataFormatException):
    """Rows of a probability matrix are not distributions."""
    pass


class CheckpointException(CapsGanException):
    """Checkpoint-related exceptions."""

    exit_code = 4


class CheckpointNotFoundError(CheckpointException):
    """Checkpoint file does not exist."""

    def __init__(self, path: str):
        super().__init__(f"Checkpoint not found: {path}", {"path": path})


class CheckpointMagicError(CheckpointException):
    """File is not a CGANCKPT container."""
    pass


class CheckpointVersionError(CheckpointException):
    """Container version is not supported."""
    pass


class CheckpointSizeError(CheckpointException):
    """Payload sizes disagree with the manifest."""
    pass


class CheckpointFormatError(CheckpointException):
    """A header field cannot be decoded."""
    pass


class CheckpointArchitectureError(CheckpointException):
    """Checkpoint does not hold what the caller needs."""
    pass


class NumericalFailureError(CapsGanException):
    """NaN or Inf appeared in values or gradients."""

    exit_code = 5

    def __init__(self, message: str, step: Optional[int] = None, details: Optional[dict[str, Any]] = None):
        details = dict(details or {})
        if step is not None:
            details["step"] = step
            message = f"{message} (step {step})"
        self.step = step
        super().__init__(message, details)


class ScorerFloorError(CapsGanException):
    """Surrogate scorer missed its accuracy floor."""

    exit_code = 6

    def __init__(self, accuracy: float, floor: float):
        self.accuracy = accuracy
        self.floor = floor
        super().__init__(
            f"Scorer accuracy {accuracy:.4f} is below the floor {floor:.2f}",
            {"accuracy": accuracy, "floor": floor}
        )


class ConfigurationException(CapsGanException):
    """Configuration-related exceptions."""

    exit_code = 2


class ConfigFileNotFoundError(ConfigurationException):
    """Configuration file not found."""
    pass


class InvalidConfigError(ConfigurationException):
    """Invalid configuration."""
    pass
