"""Exception types shared across the engine."""


class ViewAdaptError(Exception):
    """Base class for engine errors."""


class InvalidInput(ViewAdaptError):
    """An argument violated an operation's precondition."""


class DegenerateVector(ViewAdaptError):
    """A zero-norm vector reached a similarity computation."""


class ConfigError(ViewAdaptError):
    """Inconsistent or out-of-range configuration."""


class WindowOutOfRange(ViewAdaptError):
    """The requested observation window starts before the available frames."""


class EmptyEvaluation(ViewAdaptError):
    """No ground-truth class was ever observed, so recall is undefined."""


class FormatError(ViewAdaptError):
    """Malformed container file. Carries the byte offset of the failure."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset
