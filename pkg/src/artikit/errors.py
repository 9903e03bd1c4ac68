"""Exception types raised across the toolkit."""


class ArtikitError(Exception):
    """Base class for all toolkit errors."""


# corpus ingestion

class IngestionError(ArtikitError):
    """A corpus file is missing, unreadable, or malformed."""


class ClassMapError(ArtikitError):
    """A phone label has no entry in the class map."""


class MetadataError(ArtikitError):
    """Utterance metadata is invalid (bad fps, shape, sample rate...)."""


class SplitError(ArtikitError):
    """Speaker sets passed to a corpus split overlap."""


class SyntheticSpecError(ArtikitError):
    """A synthetic corpus spec has out-of-range parameters."""


# feature extraction

class AudioTooShortError(ArtikitError):
    """Audio shorter than a single analysis window."""


class FrameShapeError(ArtikitError):
    """An image or feature array has a degenerate or mismatched shape."""


class UnsampleableError(ArtikitError):
    """Anchor time falls outside both the audio and ultrasound streams."""


# network

class ShapeMismatchError(ArtikitError):
    """Batch shapes do not match the model architecture."""


class NumericError(ArtikitError):
    """A non-finite value appeared during forward/backward computation."""


class ModelStateError(ArtikitError):
    """The model is in a state that cannot serve the request."""


class TrainingDivergedError(ArtikitError):
    """Training loss became non-finite; carries the epoch log so far."""

    def __init__(self, message, epoch_log=None):
        super().__init__(message)
        self.epoch_log = epoch_log or []


class CheckpointError(ArtikitError):
    """A checkpoint file is truncated, corrupt, or version-incompatible."""


class IncompatibleArchitectureError(CheckpointError):
    """Checkpoint architecture fingerprint does not match the expected one."""


# statistics

class DegenerateDataError(ArtikitError):
    """Agreement statistic undefined: no variation anywhere in the data."""


class UndefinedStatisticError(ArtikitError):
    """Statistic undefined for this input; ``flag`` names the convention."""

    def __init__(self, message, flag=None):
        super().__init__(message)
        self.flag = flag


class RatingValidationError(ArtikitError):
    """An expert rating violates the primary/secondary score rules."""


# annotation service

class MediaRenderError(ArtikitError):
    """A media bundle was requested for an instance outside its streams."""


# reports

class EmptyInputError(ArtikitError):
    """A report was requested over an empty record set."""
