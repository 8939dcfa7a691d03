"""Exception taxonomy shared by every engine module."""


class MfrsError(Exception):
    """Base class for all engine errors."""


# --- recognition ---

class InvalidRegion(MfrsError):
    """Crop region is degenerate or falls outside the image."""


class DegenerateFace(MfrsError):
    """Constant crop: the descriptor is all zero, no encoding exists."""


class EmptyTrainingSet(MfrsError):
    """Detector training requires at least one window per class."""


class DegenerateModel(MfrsError):
    """Class means coincide; the weight vector would be zero."""


class InvalidEncoding(MfrsError):
    """Value is not a valid 128-dimensional encoding."""


class InvalidInput(MfrsError):
    """Mismatched argument shapes (e.g. boxes vs. scores)."""


# --- imaging / ingestion ---

class DecodeError(MfrsError):
    """Payload could not be decoded as a supported image format."""


# --- audio / memo ---

class EmptyAudio(MfrsError):
    """Clip has no samples."""


class WavError(MfrsError):
    """WAV payload rejected.

    ``kind`` is "malformed" (broken structure) or "unsupported"
    (valid RIFF but not PCM mono 16 kHz 16-bit).
    """

    def __init__(self, kind, message):
        super().__init__(message)
        self.kind = kind

    @classmethod
    def malformed(cls, message):
        return cls("malformed", message)

    @classmethod
    def unsupported(cls, message):
        return cls("unsupported", message)


# --- store ---

class ValidationError(MfrsError):
    """Mutation rejected by a field constraint."""


class NotFound(MfrsError):
    """Referenced entity does not exist."""


class CorruptSnapshot(MfrsError):
    """Snapshot checksum or framing is invalid."""


class UnsupportedVersion(MfrsError):
    """Snapshot was written by an unknown format version."""


# --- evaluation harness ---

class ParseError(MfrsError):
    """Pair-list text is malformed."""


class MissingImage(MfrsError):
    """Pair list references an image that does not resolve."""


class EvalError(MfrsError):
    """Evaluation could not produce a report (e.g. every pair skipped)."""


class InvalidParams(MfrsError):
    """Generator parameters outside the supported range."""
