"""Exception hierarchy shared by all wbarray modules."""


class WbArrayError(Exception):
    """Base class for every error raised by this package."""


class DimensionError(WbArrayError, ValueError):
    """Array extents do not conform."""


class DomainError(WbArrayError, ValueError):
    """A scalar argument lies outside its admissible range."""


class FormatError(WbArrayError):
    """A tensor file could not be parsed."""


class MagicError(FormatError):
    pass


class VersionError(FormatError):
    pass


class TruncatedError(FormatError):
    pass


class DimsOverflowError(FormatError):
    pass


class ConfigError(WbArrayError):
    """Invalid run configuration. ``key`` names the offending entry, if any."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
