"""Exception hierarchy shared by all fragseg modules."""


class FragsegError(Exception):
    """Base class for all fragseg errors."""


class MissingFile(FragsegError, FileNotFoundError):
    pass


class DecodeError(FragsegError, ValueError):
    pass


class DimensionMismatch(FragsegError, ValueError):
    pass


class JsonParseError(FragsegError, ValueError):
    pass


class NegativeDimension(FragsegError, ValueError):
    pass


class WktParseError(FragsegError, ValueError):
    """Raised on malformed WKT; carries the character offset of the failure."""

    def __init__(self, message: str, position: int = -1, filename: str | None = None):
        self.message = message
        self.position = position
        self.filename = filename
        where = f" at offset {position}" if position >= 0 else ""
        source = f" in {filename}" if filename else ""
        super().__init__(f"{message}{where}{source}")


class DegenerateRing(FragsegError, ValueError):
    pass


class UnrepairableGeometry(FragsegError, ValueError):
    pass


class UnknownExtractor(FragsegError, KeyError):
    pass


class MetricMismatch(FragsegError, ValueError):
    pass


class EmptySet(FragsegError, ValueError):
    pass


class TooFewMatches(FragsegError, ValueError):
    pass


class DegenerateInput(FragsegError, ValueError):
    pass


class SingularTransform(FragsegError, ValueError):
    pass


class AlignmentFailed(FragsegError, RuntimeError):
    pass


class OutOfBounds(FragsegError, ValueError):
    pass


class EmptyList(FragsegError, ValueError):
    pass
