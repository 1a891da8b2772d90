"""Exception taxonomy shared by all isofade modules."""


class IsofadeError(Exception):
    """Base class for all errors raised by this package."""


def error_code(exc: BaseException) -> str:
    """Snake-case wire identifier for an exception type."""
    name = type(exc).__name__
    parts = []
    for i, ch in enumerate(name):
        if ch.isupper() and i > 0:
            parts.append("_")
        parts.append(ch.lower())
    return "".join(parts)


# --- emotion model ---------------------------------------------------------

class UnknownEmotion(IsofadeError):
    pass


class UnmappedTag(IsofadeError):
    pass


class MappingFormatError(IsofadeError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


# --- tag ingestion ---------------------------------------------------------

class MalformedLine(IsofadeError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


# --- prompt engine ---------------------------------------------------------

class EmptyDistribution(IsofadeError):
    pass


class NoMoodForEmotion(IsofadeError):
    pass


# --- generation ------------------------------------------------------------

class BackendUnavailable(IsofadeError):
    pass


class BadAudio(IsofadeError):
    pass


class GenerationFailed(IsofadeError):
    pass


# --- dsp -------------------------------------------------------------------

class AllSilent(IsofadeError):
    pass


class SilentClip(IsofadeError):
    pass


class RateMismatch(IsofadeError):
    pass


class OverlapTooLong(IsofadeError):
    pass


class TooShort(IsofadeError):
    pass


class BadHeader(IsofadeError):
    pass


class UnsupportedFormat(IsofadeError):
    pass


# --- evaluation ------------------------------------------------------------

class LengthMismatch(IsofadeError):
    pass


class NoPositives(IsofadeError):
    pass


class ZeroVector(IsofadeError):
    pass


class DimMismatch(IsofadeError):
    pass


class NoMappableTags(IsofadeError):
    pass


class InvalidRatings(IsofadeError):
    pass


# --- session ---------------------------------------------------------------

class ConfigError(IsofadeError):
    pass


class SessionFailed(IsofadeError):
    """A session aborted mid-render; carries the partial manifest."""

    def __init__(self, message: str, error_code: str, partial_manifest: dict):
        super().__init__(message)
        self.error_code = error_code
        self.partial_manifest = partial_manifest
