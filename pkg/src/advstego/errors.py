"""Exception hierarchy.

The CLI maps each family to an exit code, so every error raised by the
library derives from one of the four family bases below.
"""


class AdvStegoError(Exception):
    """Base class for all library errors."""


# -- model family (exit 5) ---------------------------------------------------

class ModelError(AdvStegoError):
    pass


class DimensionError(ModelError, ValueError):
    pass


class LabelError(ModelError, ValueError):
    pass


class CheckpointError(ModelError):
    pass


class CheckpointMagicError(CheckpointError):
    pass


class CheckpointVersionError(CheckpointError):
    pass


class CheckpointTruncatedError(CheckpointError):
    pass


class CheckpointShapeError(CheckpointError):
    pass


# -- payload family (exit 4) -------------------------------------------------

class StegoError(AdvStegoError):
    pass


class CapacityError(StegoError):
    pass


class NoMagicError(StegoError):
    pass


class FrameVersionError(StegoError):
    pass


class FrameLengthError(StegoError):
    pass


class ChecksumError(StegoError):
    pass


# -- data/io family (exit 3) -------------------------------------------------

class DataFormatError(AdvStegoError):
    pass


class PngFormatError(DataFormatError):
    pass


class IdxError(DataFormatError):
    pass


class IdxMagicError(IdxError):
    pass


class IdxCountError(IdxError):
    pass


class IdxTruncatedError(IdxError):
    pass


# -- usage family (exit 2) ---------------------------------------------------

class DatasetError(AdvStegoError, ValueError):
    """Bad dataset request or manifest."""
