"""Error types shared by every fairgen module."""


class FairGenError(Exception):
    """Base class for validation and usage failures reported to the user."""

    code = "fairgen"


class ShapeError(FairGenError, ValueError):
    """Operands have incompatible shapes."""

    code = "shape"


class ParameterError(FairGenError, ValueError):
    """A numeric or structural parameter is out of range."""

    code = "parameter"


class UsageError(FairGenError, RuntimeError):
    """An operation was called in the wrong state."""

    code = "usage"


class IngestionError(FairGenError, ValueError):
    """A schema or data file could not be loaded."""

    code = "ingestion"


class AugmentationError(FairGenError, ValueError):
    """The synthetic pool cannot satisfy an augmentation plan."""

    code = "augmentation"


class TrainingError(FairGenError, RuntimeError):
    """Training diverged or could not start."""

    code = "training"
