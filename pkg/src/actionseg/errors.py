"""Exception hierarchy shared by all actionseg modules."""


class ActionsegError(Exception):
    """Base class for all errors raised by this package."""


class ArgumentError(ActionsegError, ValueError):
    """An argument violates a documented precondition."""


class FormatError(ActionsegError):
    """A file or record is malformed (bad PGM header, bad CSV row, ...)."""


class SequenceGapError(ActionsegError):
    """Frame files are missing or not consecutively numbered."""


class LengthMismatchError(ActionsegError):
    """Two tracks or files that must have equal length do not."""


class IoError(ActionsegError):
    """A path could not be read or written."""


class NumericalError(ActionsegError):
    """A numerical routine produced a non-finite value."""


class EmptyWindowError(ActionsegError):
    """An encoder was asked to encode an empty feature set."""


class InsufficientDataError(ActionsegError):
    """Too few samples to fit a calibration or classifier reliably."""


class CompatibilityError(ActionsegError):
    """Vocabulary and classifier artifacts do not fit together."""
